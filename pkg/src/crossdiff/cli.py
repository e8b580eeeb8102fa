"""Experiment harness: named reproductions, sweeps and reports.

Usage:
    crossdiff <experiment> [--config FILE] [--epsilon LIST] [--cells J]
              [--horizon T] [--samples M] [--out DIR] [--jobs N] [--svg]

Experiments: fig1 fig2 fig3 fig5 sweep compare picard constants convergence.
Precedence of settings: command-line flags > config file > experiment
defaults.  Config files are flat TOML; unknown keys are rejected.  Every
run writes a manifest (resolved configuration plus library versions),
RFC-4180 CSV tables with LF line endings, and gnuplot-ready series
files; re-running a configuration reproduces the outputs byte for byte.
Summary tables contain only quantities recomputed by the analysis layer
from the emitted trajectories.

Exit codes: 0 success, 2 configuration error, 3 solver failure in an
experiment that is not supposed to blow up (fig3/sweep record failures
as data and still exit 0).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import analysis, certificates, experiments
from ._output import fmt, write_csv, write_manifest, write_series, write_svg
from .discretization import Grid, StateField
from .integrator import SolverOptions, integrate, steady_state
from .linearized import mean_contraction_ratio, picard_solve
from .models import (
    GaussianWell,
    PhysicalParams,
    TabulatedPotential,
    ZeroPotential,
    build_model,
)

EXPERIMENTS = (
    "fig1",
    "fig2",
    "fig3",
    "fig5",
    "sweep",
    "compare",
    "picard",
    "constants",
    "convergence",
)


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """Flat, fully resolved experiment configuration."""

    experiment: str
    family: str = "hardsphere"
    family_b: str = "gradflow"
    epsilon: tuple = ()
    dim: int = 2
    n_frac: tuple = (0.5, 0.5)
    size_frac: tuple = (1.0, 1.0)
    diffusivity: tuple = (1.0, 1.0)
    initial: str = "tanh-plateau"
    gaussian_center: float = -0.2
    gaussian_sharpness: float = 80.0
    plateau_half_width: float = 0.5
    plateau_shift: float = 0.05
    potential_1: str = "gaussian-well"
    potential_2: str = "zero"
    well_amplitude_1: float = 1.0
    well_sharpness_1: float = 120.0
    well_center_1: float = 0.0
    well_amplitude_2: float = 1.0
    well_sharpness_2: float = 120.0
    well_center_2: float = 0.0
    potential_file_1: str = ""
    potential_file_2: str = ""
    cells: int = 200
    cells_list: tuple = (50, 100, 200, 400)
    horizon: float = 1.0
    samples: int = 100
    rtol: float = 1e-6
    atol: float = 1e-9
    newton_tol: float = 1e-5
    newton_max_iters: int = 12
    jacobian: str = "finite-difference"
    u_star: float = experiments.PLATEAU_U_STAR
    steady_tol: float = 1e-8
    t_max: float = 20.0
    picard_tol: float = 1e-5
    picard_max_iters: int = 25
    # constants-report inputs
    coeff_bound: float = 1.0
    ellipticity: float = 1.0
    embedding_constants: float = 1.0
    m_omega: float = 1.0
    m_a: float = 1.0
    m_b: float = 0.0
    m_t: float = 0.0
    m_v: float = 0.0
    m_v1: float = 0.0
    m_v2: float = 0.0
    time_independent: bool = False
    norm_u0: float = 1.0
    norm_u0_tilde: float = 1.0
    out: str = ""
    jobs: int = 0  # 0 = one worker per available core
    svg: bool = False

    def asdict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_LIST_KEYS = {"epsilon", "n_frac", "size_frac", "diffusivity", "cells_list"}

_EXPERIMENT_DEFAULTS = {
    "fig1": dict(family="hardsphere", initial="normalized-gaussian", horizon=1.0, samples=200),
    "fig2": dict(family="hardsphere", initial="normalized-gaussian"),
    "fig3": dict(
        family="hardsphere",
        initial="tanh-plateau",
        potential_1="zero",
        potential_2="zero",
        horizon=0.1,
        cells=500,
    ),
    "fig5": dict(diffusivity=(1.5, 1.0), initial="tanh-plateau", rtol=1e-8, atol=1e-11),
    "sweep": dict(initial="tanh-plateau", potential_1="zero", potential_2="zero", horizon=0.1),
    "compare": dict(diffusivity=(1.5, 1.0), initial="tanh-plateau", rtol=1e-8, atol=1e-11),
    "picard": dict(initial="normalized-gaussian", cells=100, samples=100),
    "constants": dict(),
    "convergence": dict(potential_1="zero", potential_2="zero"),
}


def _coerce(name: str, value, target):
    if target is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"key {name!r} expects a boolean")
    if target is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key {name!r} expects an integer")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"key {name!r} expects an integer")
        return int(value)
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key {name!r} expects a number")
        return float(value)
    if target is str:
        if not isinstance(value, str):
            raise ConfigError(f"key {name!r} expects a string")
        return value
    raise ConfigError(f"unsupported key {name!r}")


def build_config(experiment: str, file_values: dict, overrides: dict) -> ExperimentConfig:
    """Resolve defaults, config file and flag overrides into one record."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    merged = dict(_EXPERIMENT_DEFAULTS[experiment])
    for source in (file_values, overrides):
        for key, value in source.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            merged[key] = value
    if merged.get("experiment", experiment) != experiment:
        raise ConfigError(
            f"config file is for experiment {merged['experiment']!r}, not {experiment!r}"
        )
    merged["experiment"] = experiment
    cfg = ExperimentConfig(experiment=experiment)
    resolved = {}
    for name, value in merged.items():
        if name in _LIST_KEYS:
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"key {name!r} expects a list")
            kind = int if name == "cells_list" else float
            resolved[name] = tuple(_coerce(name, v, kind) for v in value)
        elif name == "experiment":
            resolved[name] = value
        else:
            default = getattr(cfg, name)
            resolved[name] = _coerce(name, value, type(default))
    cfg = replace(cfg, **resolved)
    if not cfg.epsilon:
        cfg = replace(cfg, epsilon=experiments.DEFAULT_EPSILONS.get(experiment, (0.1,)))
    if "cells" not in merged:
        cfg = replace(cfg, cells=experiments.DEFAULT_CELLS.get(experiment, 200))
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    if cfg.cells < 3:
        raise ConfigError("cells must be at least 3")
    if cfg.horizon <= 0:
        raise ConfigError("horizon must be positive")
    if cfg.samples < 1:
        raise ConfigError("samples must be at least 1")
    if cfg.jobs < 0:
        raise ConfigError("jobs must be nonnegative")
    if cfg.initial not in ("normalized-gaussian", "uniform", "tanh-plateau"):
        raise ConfigError(f"unknown initial-data family {cfg.initial!r}")
    for name in (cfg.family, cfg.family_b):
        if name not in ("reference", "lattice", "hardsphere", "gradflow"):
            raise ConfigError(f"unknown model family {name!r}")
    for pot in (cfg.potential_1, cfg.potential_2):
        if pot not in ("zero", "gaussian-well", "tabulated"):
            raise ConfigError(f"unknown potential kind {pot!r}")
    if any(e < 0 for e in cfg.epsilon):
        raise ConfigError("epsilon values must be nonnegative")


def _potential(cfg: ExperimentConfig, which: int):
    kind = cfg.potential_1 if which == 1 else cfg.potential_2
    if kind == "zero":
        return ZeroPotential()
    if kind == "gaussian-well":
        if which == 1:
            return GaussianWell(cfg.well_amplitude_1, cfg.well_sharpness_1, cfg.well_center_1)
        return GaussianWell(cfg.well_amplitude_2, cfg.well_sharpness_2, cfg.well_center_2)
    path = cfg.potential_file_1 if which == 1 else cfg.potential_file_2
    if not path:
        raise ConfigError(f"tabulated potential {which} needs potential_file_{which}")
    data = np.loadtxt(path)
    return TabulatedPotential(data[:, 0], data[:, 1])


def make_model(cfg: ExperimentConfig, epsilon: float, family: str | None = None):
    params = PhysicalParams(
        dim=cfg.dim,
        n_frac=cfg.n_frac,
        size_frac=cfg.size_frac,
        diffusivity=cfg.diffusivity,
        epsilon=epsilon,
    )
    return build_model(family or cfg.family, params, (_potential(cfg, 1), _potential(cfg, 2)))


def make_initial(cfg: ExperimentConfig) -> StateField:
    grid = Grid(cfg.cells)
    if cfg.initial == "normalized-gaussian":
        vals = np.stack(
            [
                experiments.normalized_gaussian(grid, cfg.gaussian_center, cfg.gaussian_sharpness),
                experiments.uniform_profile(grid),
            ]
        )
    elif cfg.initial == "uniform":
        vals = np.stack([experiments.uniform_profile(grid), experiments.uniform_profile(grid)])
    else:
        vals = experiments.tanh_plateau_pair(grid, cfg.plateau_half_width, cfg.plateau_shift)
    return StateField(grid, vals)


def solver_options(cfg: ExperimentConfig) -> SolverOptions:
    return SolverOptions(
        rtol=cfg.rtol,
        atol=cfg.atol,
        newton_tol=cfg.newton_tol,
        newton_max_iters=cfg.newton_max_iters,
        jacobian_mode=cfg.jacobian,
    )


def _states_rows(traj):
    mids = traj.grid.midpoints
    for state in traj.states:
        for n in range(traj.grid.J):
            yield (state.time, mids[n], state.values[0, n], state.values[1, n])


def _write_states(path: Path, traj):
    write_csv(path, ("t", "x", "u_1", "u_2"), _states_rows(traj))


def _eps_tag(eps: float) -> str:
    return fmt(float(eps)).replace(".", "p").replace("-", "m")


# ---------------------------------------------------------------------------
# per-point workers (module level so process pools can pickle them)


def _point_trajectory(args):
    cfg, eps, family = args
    model = make_model(cfg, eps, family)
    traj = integrate(model, make_initial(cfg), cfg.horizon, cfg.samples, solver_options(cfg))
    return eps, family, traj


def _point_steady(args):
    cfg, eps = args
    model = make_model(cfg, eps)
    state, converged, t_reached = steady_state(
        model,
        make_initial(cfg),
        solver_options(cfg),
        steady_tol=cfg.steady_tol,
        t_max=cfg.t_max,
    )
    return eps, state, converged, t_reached


def _point_picard(args):
    cfg, eps = args
    model = make_model(cfg, eps)
    u0 = make_initial(cfg)
    report = picard_solve(
        model,
        u0,
        cfg.horizon,
        cfg.samples,
        solver_options(cfg),
        max_iters=cfg.picard_max_iters,
        tol=cfg.picard_tol,
    )
    reference = integrate(model, u0, cfg.horizon, cfg.samples, solver_options(cfg))
    gap = math.nan
    if not reference.failed:
        gap = analysis.difference_norm(report.final, reference).w_norm
    return eps, report, gap


def _parallel(worker, points, jobs: int):
    if jobs == 0:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(points) <= 1:
        return [worker(p) for p in points]
    with ProcessPoolExecutor(max_workers=min(jobs, len(points))) as pool:
        return list(pool.map(worker, points))


# ---------------------------------------------------------------------------
# experiment runners


def _run_fig1(cfg: ExperimentConfig, out: Path) -> int:
    eps = cfg.epsilon[0]
    _, _, traj = _point_trajectory((cfg, eps, cfg.family))
    if traj.failed:
        print(f"solver failure at t = {traj.failure_time} ({traj.failure_reason})", file=sys.stderr)
        return 3
    _write_states(out / f"states_eps{_eps_tag(eps)}.csv", traj)
    rep = analysis.w_norm(traj)
    min_det, arg = analysis.scan_det_sym(make_model(cfg, eps), traj)
    masses = analysis.mass_total(traj.states[-1])
    write_csv(
        out / "summary.csv",
        ("epsilon", "w_norm", "l2_part", "sup_part", "min_det_sym", "mass_1", "mass_2"),
        [(eps, rep.w_norm, rep.l2_part, rep.sup_part, min_det, masses[0], masses[1])],
    )
    mids = traj.grid.midpoints
    times = traj.times()
    M = len(times) - 1
    picks = sorted({0, 1, 2, M // 10, M})
    for i in (0, 1):
        cols = [mids] + [traj.states[k].values[i] for k in picks]
        write_series(out / f"profiles_u{i + 1}.dat", cols)
    if cfg.svg:
        for i in (0, 1):
            write_svg(
                out / f"profiles_u{i + 1}.svg",
                [(f"t={times[k]:g}", mids, traj.states[k].values[i]) for k in picks],
                title=f"species {i + 1}",
                xlabel="x",
                ylabel=f"u_{i + 1}",
            )
    return 0


def _run_fig2(cfg: ExperimentConfig, out: Path) -> int:
    results = _parallel(_point_steady, [(cfg, e) for e in cfg.epsilon], cfg.jobs)
    results.sort(key=lambda r: r[0])
    rows = []
    for eps, state, converged, t_reached in results:
        if not converged:
            print(f"steady state not reached for epsilon = {eps}", file=sys.stderr)
            return 3
        masses = analysis.mass_total(state)
        rows.append(
            (
                eps,
                float(state.values[0].max()),
                float(state.values[1].min()),
                converged,
                t_reached,
                masses[0],
                masses[1],
            )
        )
        write_series(
            out / f"steady_eps{_eps_tag(eps)}.dat",
            [state.grid.midpoints, state.values[0], state.values[1]],
        )
    write_csv(
        out / "summary.csv",
        ("epsilon", "max_u1", "min_u2", "converged", "t_reached", "mass_1", "mass_2"),
        rows,
    )
    if cfg.svg:
        series = []
        for eps, state, _, _ in results:
            series.append((f"u1 eps={eps:g}", state.grid.midpoints, state.values[0]))
            series.append((f"u2 eps={eps:g}", state.grid.midpoints, state.values[1]))
        write_svg(out / "steady.svg", series, title="steady states", xlabel="x", ylabel="u")
    return 0


def _run_fig3(cfg: ExperimentConfig, out: Path) -> int:
    results = _parallel(
        _point_trajectory, [(cfg, e, cfg.family) for e in cfg.epsilon], cfg.jobs
    )
    results.sort(key=lambda r: r[0])
    try:
        eps_star = analysis.epsilon_star(
            "diffusivities", make_model(cfg, 0.0).params, cfg.u_star
        ).epsilon_star
    except ValueError:
        eps_star = math.nan  # side conditions not met for this parameter set
    rows = []
    for eps, _, traj in results:
        model = make_model(cfg, eps)
        min_det, _ = analysis.scan_det_sym(model, traj)
        measured_max = float(np.abs(traj.states[0].values).max())
        if traj.failed:
            rows.append(
                (eps, math.nan, min_det, True, traj.failure_time, eps_star, measured_max)
            )
        else:
            rep = analysis.w_norm(traj)
            rows.append((eps, rep.w_norm, min_det, False, math.nan, eps_star, measured_max))
            _write_states(out / f"states_eps{_eps_tag(eps)}.csv", traj)
    write_csv(
        out / "summary.csv",
        ("epsilon", "w_norm", "min_det_sym", "failed", "failure_time", "epsilon_star", "max_u0"),
        rows,
    )
    ok = [(r[0], r[1]) for r in rows if not r[3]]
    write_series(out / "norm_vs_eps.dat", [[p[0] for p in ok], [p[1] for p in ok]])
    write_series(
        out / "det_sym_vs_eps.dat", [[r[0] for r in rows], [r[2] for r in rows]]
    )
    if cfg.svg and ok:
        write_svg(
            out / "norm_vs_eps.svg",
            [("|u|_W", [p[0] for p in ok], [p[1] for p in ok])],
            title="trajectory norm vs epsilon",
            xlabel="epsilon",
            ylabel="|u|_W",
            logy=True,
        )
    return 0


_FIG5_PAIRS = (("lattice", "hardsphere"), ("hardsphere", "gradflow"))


def _run_fig5(cfg: ExperimentConfig, out: Path) -> int:
    families = ("lattice", "hardsphere", "gradflow")
    points = [(cfg, e, fam) for e in cfg.epsilon for fam in families]
    results = _parallel(_point_trajectory, points, cfg.jobs)
    by_key = {(eps, fam): traj for eps, fam, traj in results}
    rows = []
    gaps = {pair: [] for pair in _FIG5_PAIRS}
    for eps in sorted(cfg.epsilon):
        trajs = {}
        for fam in families:
            traj = by_key[(eps, fam)]
            if traj.failed:
                print(
                    f"solver failure for {fam} at epsilon = {eps} "
                    f"(t = {traj.failure_time}, {traj.failure_reason})",
                    file=sys.stderr,
                )
                return 3
            trajs[fam] = traj
            _write_states(out / f"states_{fam}_eps{_eps_tag(eps)}.csv", traj)
        row = [eps]
        for pair in _FIG5_PAIRS:
            gap = analysis.difference_norm(trajs[pair[0]], trajs[pair[1]]).w_norm
            gaps[pair].append((eps, gap))
            row.append(gap)
        rows.append(tuple(row))
    write_csv(out / "summary.csv", ("epsilon", "diff_lattice_hardsphere", "diff_hardsphere_gradflow"), rows)
    fit_rows = []
    for pair in _FIG5_PAIRS:
        name = f"{pair[0]}_vs_{pair[1]}"
        write_series(out / f"diff_{name}.dat", [[p[0] for p in gaps[pair]], [p[1] for p in gaps[pair]]])
        if len(gaps[pair]) >= 3:
            fit = analysis.fit_order(gaps[pair])
            fit_rows.append((name, fit.slope, fit.intercept, fit.residual))
    if fit_rows:
        write_csv(out / "slopes.csv", ("pair", "slope", "intercept", "residual"), fit_rows)
    if cfg.svg:
        write_svg(
            out / "model_gaps.svg",
            [
                (f"{a}-{b}", [p[0] for p in gaps[(a, b)]], [p[1] for p in gaps[(a, b)]])
                for a, b in _FIG5_PAIRS
            ],
            title="model differences",
            xlabel="epsilon",
            ylabel="|du|_W",
            logx=True,
            logy=True,
        )
    return 0


def _run_compare(cfg: ExperimentConfig, out: Path) -> int:
    points = [(cfg, e, fam) for e in cfg.epsilon for fam in (cfg.family, cfg.family_b)]
    results = _parallel(_point_trajectory, points, cfg.jobs)
    by_key = {(eps, fam): traj for eps, fam, traj in results}
    env = certificates.lipschitz_envelopes(make_model(cfg, 0.0, cfg.family))
    ledger = certificates.stability_gammas(
        certificates.make_ledger(
            env,
            certificates.ConstantsInput(
                M=cfg.coeff_bound, lam=cfg.ellipticity, T=cfg.horizon
            ),
        ),
        cfg.norm_u0,
        cfg.norm_u0_tilde,
    )
    rows = []
    for eps in sorted(cfg.epsilon):
        ta = by_key[(eps, cfg.family)]
        tb = by_key[(eps, cfg.family_b)]
        if ta.failed or tb.failed:
            print(f"solver failure at epsilon = {eps}", file=sys.stderr)
            return 3
        gap = analysis.difference_norm(ta, tb).w_norm
        # reported-only consistency figure: the stability bound with unit
        # embedding constants and equal initial data
        bound = eps * ledger.Gamma2
        rows.append((eps, gap, bound, gap / bound if bound > 0 else math.nan))
    write_csv(
        out / "summary.csv",
        ("epsilon", "diff_norm", "gamma2_bound_unit_constants", "ratio"),
        rows,
    )
    return 0


def _run_sweep(cfg: ExperimentConfig, out: Path) -> int:
    return _run_fig3(cfg, out)


def _run_picard(cfg: ExperimentConfig, out: Path) -> int:
    results = _parallel(_point_picard, [(cfg, e) for e in cfg.epsilon], cfg.jobs)
    results.sort(key=lambda r: r[0])
    rows = []
    ratio_points = []
    for eps, report, gap in results:
        iter_rows = []
        for k, d in enumerate(report.diffs):
            ratio = report.ratios[k - 1] if 1 <= k <= len(report.ratios) else math.nan
            iter_rows.append((k, d, ratio))
        write_csv(out / f"iterations_eps{_eps_tag(eps)}.csv", ("iteration", "diff", "ratio"), iter_rows)
        mean_ratio = math.nan
        try:
            mean_ratio = mean_contraction_ratio(report, floor=10.0 * cfg.picard_tol)
        except ValueError:
            pass
        rows.append((eps, len(report.diffs), report.converged, mean_ratio, gap))
        if math.isfinite(mean_ratio):
            ratio_points.append((eps, mean_ratio))
    write_csv(
        out / "summary.csv",
        ("epsilon", "iterations", "converged", "mean_ratio", "gap_vs_nonlinear"),
        rows,
    )
    if len(ratio_points) >= 3:
        fit = analysis.fit_order(ratio_points)
        write_csv(
            out / "slopes.csv",
            ("pair", "slope", "intercept", "residual"),
            [("ratio_vs_epsilon", fit.slope, fit.intercept, fit.residual)],
        )
    return 0


def _run_constants(cfg: ExperimentConfig, out: Path) -> int:
    env = certificates.lipschitz_envelopes(make_model(cfg, cfg.epsilon[0]))
    inputs = certificates.ConstantsInput(
        M=cfg.coeff_bound,
        lam=cfg.ellipticity,
        C_S_inf=cfg.embedding_constants,
        C_S_1=cfg.embedding_constants,
        C_S_2=cfg.embedding_constants,
        C_S=cfg.embedding_constants,
        C_P=cfg.embedding_constants,
        M_omega=cfg.m_omega,
        M_A=cfg.m_a,
        M_B=cfg.m_b,
        M_T=cfg.m_t,
        M_V=cfg.m_v,
        M_V1=cfg.m_v1,
        M_V2=cfg.m_v2,
        T=cfg.horizon,
        hypothesis_h=cfg.time_independent,
    )
    ledger = certificates.stability_gammas(
        certificates.make_ledger(env, inputs), cfg.norm_u0, cfg.norm_u0_tilde
    )
    rows = certificates.ledger_rows(ledger)
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {fmt(float(value))}")
    write_csv(out / "constants.csv", ("name", "value"), rows)
    return 0


def _run_convergence(cfg: ExperimentConfig, out: Path) -> int:
    from .discretization import _assemble_rhs

    rows = []
    pts = []
    for J in cfg.cells_list:
        grid = Grid(J)
        model = make_model(cfg, 0.0, "reference")
        x = grid.midpoints
        u = np.stack([np.cos(np.pi * x) + 2.0, np.cos(np.pi * x) + 2.0])
        dudt, _ = _assemble_rhs(model, grid, u)
        target = -np.pi**2 * np.cos(np.pi * x)
        d1 = cfg.diffusivity[0]
        err = float(np.abs(dudt[0][1:-1] - d1 * target[1:-1]).max())
        rows.append((J, grid.dx, err))
        pts.append((grid.dx, err))
    fit = analysis.fit_order(pts)
    write_csv(out / "errors.csv", ("cells", "dx", "max_interior_error"), rows)
    write_csv(
        out / "slopes.csv",
        ("pair", "slope", "intercept", "residual"),
        [("error_vs_dx", fit.slope, fit.intercept, fit.residual)],
    )
    print(f"observed spatial order: {fit.slope:.3f}")
    return 0


_RUNNERS = {
    "fig1": _run_fig1,
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig5": _run_fig5,
    "sweep": _run_sweep,
    "compare": _run_compare,
    "picard": _run_picard,
    "constants": _run_constants,
    "convergence": _run_convergence,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Execute a resolved configuration; returns the process exit code."""
    root = cfg.out or os.environ.get("CROSSDIFF_OUT", "crossdiff_out")
    out = Path(root) / cfg.experiment
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.json", cfg.asdict())
    return _RUNNERS[cfg.experiment](cfg, out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossdiff",
        description="cross-diffusion simulation laboratory",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="flat TOML config file")
        p.add_argument("--epsilon", type=str, default=None, help="comma-separated list")
        p.add_argument("--cells", type=int, default=None, help="grid cells J")
        p.add_argument("--horizon", type=float, default=None, help="final time T")
        p.add_argument("--samples", type=int, default=None, help="output intervals M")
        p.add_argument("--out", type=str, default=None, help="output directory root")
        p.add_argument("--jobs", type=int, default=None, help="sweep worker processes")
        p.add_argument("--family", type=str, default=None)
        p.add_argument("--rtol", type=float, default=None)
        p.add_argument("--atol", type=float, default=None)
        p.add_argument("--svg", action="store_true", default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        file_values = {}
        if args.config:
            with open(args.config, "rb") as f:
                file_values = tomllib.load(f)
        overrides = {
            "epsilon": [float(v) for v in args.epsilon.split(",")] if args.epsilon else None,
            "cells": args.cells,
            "horizon": args.horizon,
            "samples": args.samples,
            "out": args.out,
            "jobs": args.jobs,
            "family": args.family,
            "rtol": args.rtol,
            "atol": args.atol,
            "svg": args.svg,
        }
        cfg = build_config(args.experiment, file_values, overrides)
    except (ConfigError, OSError, tomllib.TOMLDecodeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
