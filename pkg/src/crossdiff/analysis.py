"""Discrete trajectory norms, ellipticity diagnostics and order fitting.

The trajectory norm combines a space-time L2 integral of second space
differences and forward time differences with a sup-in-time discrete H1
term:

    sqrt( dx dt sum_{n,k} [u_xx^2 + u_t^2] )
      + max_k sqrt( dx sum_n [u^2 + u_x^2] )

summed over both species.  Boundary stencils use even-reflection ghost
midpoints, consistent with the zero-flux symmetry of the scheme; the
forward time difference is omitted at the final sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import certificates
from .discretization import StateField
from .integrator import Trajectory
from .models import ModelSpec, PhysicalParams, eval_matrices


class FailedTrajectoryError(RuntimeError):
    """Raised when a norm is requested for a run that blew up."""

    def __init__(self, failure_time, reason):
        self.failure_time = failure_time
        self.reason = reason
        super().__init__(f"trajectory failed at t = {failure_time} ({reason})")


@dataclass(frozen=True)
class NormReport:
    """Trajectory norm split into its integral and sup-in-time parts."""

    w_norm: float
    l2_part: float
    sup_part: float
    species_l2: tuple
    species_sup: tuple


@dataclass(frozen=True)
class EllipticityReport:
    """Ellipticity threshold data and, when scanned, the worst point."""

    theta: float | None = None
    epsilon_star: float | None = None
    u_star: float | None = None
    case: str | None = None
    min_det_sym: float | None = None
    argmin: tuple | None = None


@dataclass(frozen=True)
class OrderFit:
    """Least-squares slope of log(value) against log(epsilon)."""

    points: tuple
    slope: float
    intercept: float
    residual: float


def _check_uniform_times(times: np.ndarray):
    if len(times) < 2:
        return 0.0
    dts = np.diff(times)
    dt = float(dts[0])
    if not np.allclose(dts, dt, rtol=1e-9, atol=1e-12):
        raise ValueError("trajectory output times are not uniformly spaced")
    return dt


def _w_norm_arrays(values: np.ndarray, dx: float, dt: float) -> NormReport:
    """Norm of stacked values (K, m, J) with spacing dx and time step dt."""
    K, m, J = values.shape
    if J < 3:
        raise ValueError("norm stencils need at least three cells")
    padded = np.concatenate(
        [values[:, :, :1], values, values[:, :, -1:]], axis=2
    )  # even-reflection ghosts
    uxx = (padded[:, :, 2:] + padded[:, :, :-2] - 2.0 * values) / dx**2
    ux = (padded[:, :, 2:] - padded[:, :, :-2]) / (2.0 * dx)
    l2_sq = np.zeros(m)
    if K > 1:
        ut = (values[1:] - values[:-1]) / dt
        l2_sq = dx * dt * (
            (uxx[:-1] ** 2).sum(axis=(0, 2)) + (ut**2).sum(axis=(0, 2))
        )
    sup_sq = dx * ((values**2).sum(axis=2) + (ux**2).sum(axis=2))  # (K, m)
    species_l2 = tuple(float(v) for v in np.sqrt(l2_sq))
    species_sup = tuple(float(v) for v in np.sqrt(sup_sq.max(axis=0)))
    l2_part = float(np.sqrt(l2_sq.sum()))
    sup_part = float(np.sqrt(sup_sq.sum(axis=1).max()))
    return NormReport(
        w_norm=l2_part + sup_part,
        l2_part=l2_part,
        sup_part=sup_part,
        species_l2=species_l2,
        species_sup=species_sup,
    )


def w_norm(traj: Trajectory) -> NormReport:
    """Discrete trajectory norm of a successful run.

    A single-state trajectory is allowed: its integral part is an empty
    sum and only the sup term remains.
    """
    if traj.failed:
        raise FailedTrajectoryError(traj.failure_time, traj.failure_reason)
    dt = _check_uniform_times(traj.times())
    return _w_norm_arrays(traj.as_array(), traj.grid.dx, dt)


def difference_norm(traj_a: Trajectory, traj_b: Trajectory) -> NormReport:
    """Trajectory norm of the state-wise difference traj_b - traj_a."""
    for traj in (traj_a, traj_b):
        if traj.failed:
            raise FailedTrajectoryError(traj.failure_time, traj.failure_reason)
    if traj_a.grid.J != traj_b.grid.J:
        raise ValueError("trajectories live on different grids")
    ta, tb = traj_a.times(), traj_b.times()
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=1e-12, atol=1e-12):
        raise ValueError("trajectories have mismatched output times")
    dt = _check_uniform_times(ta)
    return _w_norm_arrays(
        traj_b.as_array() - traj_a.as_array(), traj_a.grid.dx, dt
    )


_CASES = ("diffusivities", "sizes", "numbers")


def _require(cond: bool, case: str, what: str):
    if not cond:
        raise ValueError(f"case {case!r} requires {what}")


def epsilon_star(case: str, params: PhysicalParams, u_star: float) -> EllipticityReport:
    """Ellipticity threshold eps* = (1 + sqrt(9 + 4 theta)) / ((2 + theta) pi u*).

    The asymmetry measure theta depends on which parameter pair differs:
    'diffusivities' needs equal sizes and numbers, 'sizes' equal
    diffusivities and numbers, 'numbers' equal diffusivities and sizes.
    Beyond eps* the symmetrized diffusion matrix degenerates where both
    species reach u*.
    """
    if case not in _CASES:
        raise ValueError(f"unknown case {case!r}, expected one of {_CASES}")
    if u_star <= 0:
        raise ValueError("u_star must be positive")
    if params.m != 2:
        raise ValueError("ellipticity cases are two-species")
    n1, n2 = params.n_frac
    s1, s2 = params.size_frac
    d1, d2 = params.diffusivity
    tol = 1e-9
    if case == "diffusivities":
        _require(abs(s1 - 1) < tol and abs(s2 - 1) < tol, case, "unit relative sizes")
        _require(abs(n1 - 0.5) < tol and abs(n2 - 0.5) < tol, case, "equal number fractions")
        theta = (d1 - d2) ** 2 / (4.0 * d1 * d2)
    elif case == "sizes":
        _require(abs(d1 - 1) < tol and abs(d2 - 1) < tol, case, "unit diffusivities")
        _require(abs(n1 - 0.5) < tol and abs(n2 - 0.5) < tol, case, "equal number fractions")
        theta = 1.0 - 2.0 * s1 + s1**2
    else:
        _require(abs(d1 - 1) < tol and abs(d2 - 1) < tol, case, "unit diffusivities")
        _require(abs(s1 - 1) < tol and abs(s2 - 1) < tol, case, "unit relative sizes")
        theta = 9.0 * (0.25 - n1 + n1**2)
    eps_star = (1.0 + math.sqrt(9.0 + 4.0 * theta)) / ((2.0 + theta) * math.pi * u_star)
    return EllipticityReport(theta=theta, epsilon_star=eps_star, u_star=u_star, case=case)


def det_sym_diffusion(model: ModelSpec, u) -> float:
    """det(Sym(D)) = det(D) - ((D_12 - D_21)/2)^2 at density u (two species)."""
    if model.m != 2:
        raise ValueError("symmetrized determinant is defined for two species")
    D, _ = eval_matrices(model, 0.0, np.asarray(u, dtype=float))
    det = D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]
    skew = 0.5 * (D[0, 1] - D[1, 0])
    return det - skew**2


def scan_det_sym(model: ModelSpec, traj: Trajectory):
    """Minimum of det(Sym(D)) over all output times and cells.

    Returns (min_value, (t, x)) with the location of the minimum; scans
    the partial trajectory when the run failed.
    """
    best = math.inf
    arg = (math.nan, math.nan)
    mids = traj.grid.midpoints
    for state in traj.states:
        D, _ = eval_matrices(model, mids, state.values)
        det = D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]
        vals = det - (0.5 * (D[0, 1] - D[1, 0])) ** 2
        n = int(np.argmin(vals))
        if vals[n] < best:
            best = float(vals[n])
            arg = (state.time, float(mids[n]))
    return best, arg


def trajectory_ellipticity(
    model: ModelSpec, traj: Trajectory, base: EllipticityReport | None = None
) -> EllipticityReport:
    """Attach the scanned minimum of det(Sym(D)) to a threshold report."""
    min_det, arg = scan_det_sym(model, traj)
    base = base or EllipticityReport()
    return EllipticityReport(
        theta=base.theta,
        epsilon_star=base.epsilon_star,
        u_star=base.u_star,
        case=base.case,
        min_det_sym=min_det,
        argmin=arg,
    )


def practical_bound(model: ModelSpec, u_star: float, lam: float) -> float:
    """Coercivity-based admissible epsilon: min(lambda / (1 + |a|_inf L0(u*)), 1).

    L0 is the model's analytic Lipschitz envelope and |a|_inf the largest
    coefficient amplitude multiplying the density-dependent perturbation.
    Cruder than the symmetrized-determinant threshold but needs no
    trajectory information.
    """
    if u_star < 0:
        raise ValueError("u_star must be nonnegative")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    env = certificates.lipschitz_envelopes(model)
    a_inf = certificates.coefficient_amplitude(model)
    return min(lam / (1.0 + a_inf * env.L0(u_star)), 1.0)


def mass_total(state: StateField) -> np.ndarray:
    """Per-species mass dx * sum(values), shape (m,)."""
    return state.grid.dx * state.values.sum(axis=1)


def fit_order(points) -> OrderFit:
    """Fit log(value) = intercept + slope * log(eps) by least squares.

    Needs at least three points with positive eps and value; residual is
    the root-mean-square misfit in log space.
    """
    pts = [(float(e), float(v)) for e, v in points]
    if len(pts) < 3:
        raise ValueError("order fit needs at least three points")
    eps = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if np.any(eps <= 0) or np.any(val <= 0):
        raise ValueError("order fit needs positive epsilons and values")
    ln_e = np.log(eps)
    ln_v = np.log(val)
    slope, intercept = np.polyfit(ln_e, ln_v, 1)
    resid = float(np.sqrt(np.mean((ln_v - (intercept + slope * ln_e)) ** 2)))
    return OrderFit(points=tuple(pts), slope=float(slope), intercept=float(intercept), residual=resid)
