"""Frozen-coefficient linearized solver and Picard fixed-point iteration.

The linearized operator uses the same staggered stencil as the nonlinear
one, but every density-dependent matrix factor is evaluated along a
frozen field h.  The unknown enters linearly: its node value in a drift
term is the arithmetic face average times the frozen field's
harmonic-to-arithmetic ratio at that face.  The ratio depends on h only,
so the operator is exactly linear in the unknown, and at h = u it
reproduces the nonlinear right-hand side bit for bit.

Picard iteration solves the nonlinear system by repeatedly integrating
this linear evolution with coefficients frozen along the previous
iterate (piecewise-linear in time between its output samples), starting
from the constant-in-time extension of the initial data.  Successive
difference ratios measure the contraction factor, which shrinks linearly
with the perturbation size epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import difference_norm
from .discretization import DELTA, Grid, StateField, face_average
from .integrator import (
    IntegratorStats,
    SolverOptions,
    Trajectory,
    _output_times,
    _pack,
    _run_method_of_lines,
    _unpack,
)
from .models import ModelSpec, eval_matrices


class PicardError(RuntimeError):
    """A linear solve inside the fixed-point iteration failed."""

    def __init__(self, iterate: int, failure_time, reason):
        self.iterate = iterate
        self.failure_time = failure_time
        self.reason = reason
        super().__init__(
            f"linear solve failed on iterate {iterate} at t = {failure_time} ({reason})"
        )


def _assemble_linearized(model: ModelSpec, grid: Grid, h: np.ndarray, u: np.ndarray):
    """dudt of the frozen-coefficient operator; linear in u for fixed h."""
    dx = grid.dx
    hL, hR = h[:, :-1], h[:, 1:]
    hbar = face_average(hL, hR)
    s = hL + hR
    # harmonic/arithmetic ratio of the frozen field; 0 on degenerate faces
    ratio = np.where(s > DELTA, 4.0 * hL * hR / np.where(s > DELTA, s, 1.0) ** 2, 0.0)
    D, F = eval_matrices(model, grid.nodes[1:-1], hbar)
    uL, uR = u[:, :-1], u[:, 1:]
    grad = (uR - uL) / dx
    uface = ratio * 0.5 * (uL + uR)
    q = np.zeros((u.shape[0], grid.J + 1))
    q[:, 1:-1] = np.einsum("ijn,jn->in", D, grad) - np.einsum("ijn,jn->in", F, uface)
    return (q[:, 1:] - q[:, :-1]) / dx


def linearized_rhs(model: ModelSpec, frozen: StateField, state: StateField) -> np.ndarray:
    """Right-hand side with matrix coefficients frozen at another field.

    Identical stencil to the nonlinear operator; at frozen = state the
    two agree exactly, and for fixed frozen the map state -> dudt is
    linear.
    """
    if frozen.grid.J != state.grid.J:
        raise ValueError("frozen field and state live on different grids")
    if frozen.m != state.m or state.m != model.m:
        raise ValueError("species counts do not match")
    return _assemble_linearized(model, state.grid, frozen.values, state.values)


class _FrozenPath:
    """Piecewise-linear-in-time view of a trajectory's states."""

    def __init__(self, traj: Trajectory):
        self.times = traj.times()
        self.values = traj.as_array()  # (K, m, J)

    def __call__(self, t: float) -> np.ndarray:
        times = self.times
        if t <= times[0]:
            return self.values[0]
        if t >= times[-1]:
            return self.values[-1]
        k = int(np.searchsorted(times, t, side="right") - 1)
        w = (t - times[k]) / (times[k + 1] - times[k])
        return (1.0 - w) * self.values[k] + w * self.values[k + 1]


@dataclass
class PicardReport:
    """Iterates, their successive differences and contraction ratios.

    ratios[k] = diffs[k+1] / diffs[k], recorded only where diffs[k] > 0.
    final is the last computed iterate whether or not the tolerance was
    reached.
    """

    iterates: list
    diffs: list
    ratios: list
    converged: bool
    final: Trajectory


def _solve_frozen(model, u0, path, t_out, opts, iterate_idx):
    m, J = u0.m, u0.grid.J

    def f(t, y):
        return _pack(_assemble_linearized(model, u0.grid, path(t), _unpack(y, m, J)))

    traj = _run_method_of_lines(f, None, u0, t_out, opts)
    if traj.failed:
        raise PicardError(iterate_idx, traj.failure_time, traj.failure_reason)
    return traj


def picard_solve(
    model: ModelSpec,
    u0: StateField,
    T: float,
    M: int,
    opts: SolverOptions | None = None,
    max_iters: int = 25,
    tol: float = 1e-6,
) -> PicardReport:
    """Fixed-point iteration on the frozen-coefficient linear evolution.

    v_0 is the constant-in-time extension of u0; v_{n+1} solves the
    linear evolution with coefficients frozen along v_n.  Stops when the
    trajectory-norm difference of successive iterates drops below tol or
    max_iters is reached.
    """
    opts = opts or SolverOptions()
    opts.validate()
    if T <= 0 or M < 1:
        raise ValueError("need T > 0 and at least one output interval")
    if max_iters < 1 or tol <= 0:
        raise ValueError("need max_iters >= 1 and tol > 0")
    t_out = _output_times(u0.time, T, M)
    frozen0 = Trajectory(
        states=[StateField(u0.grid, u0.values.copy(), t) for t in [u0.time, *t_out]],
        stats=IntegratorStats(),
    )
    iterates = [frozen0]
    diffs: list = []
    ratios: list = []
    converged = False
    for k in range(max_iters):
        nxt = _solve_frozen(model, u0, _FrozenPath(iterates[-1]), t_out, opts, k)
        d = difference_norm(iterates[-1], nxt).w_norm
        if diffs and diffs[-1] > 0.0:
            ratios.append(d / diffs[-1])
        diffs.append(d)
        iterates.append(nxt)
        if d < tol:
            converged = True
            break
    return PicardReport(
        iterates=iterates,
        diffs=diffs,
        ratios=ratios,
        converged=converged,
        final=iterates[-1],
    )


def mean_contraction_ratio(report: PicardReport, floor: float = 0.0) -> float:
    """Average the recorded ratios whose incoming difference exceeds floor.

    Ratios at the tolerance floor measure solver noise, not contraction,
    so callers pass a floor around 10x the stopping tolerance.
    """
    usable = [
        r
        for r, d_next in zip(report.ratios, report.diffs[1:])
        if d_next > floor
    ]
    if not usable:
        raise ValueError("no contraction ratios above the floor")
    return float(np.mean(usable))
