"""Stiff method-of-lines time integration.

The stepper is an adaptive TR-BDF2 composite (trapezoidal stage to
t + gamma*h, then a two-interval BDF2 stage to t + h, gamma = 2 - sqrt(2)):
L-stable, second order, with an embedded third-order error estimate.
Both stages share the Newton iteration matrix I - (gamma*h/2) J with J the
banded Jacobian of the semi-discrete right-hand side, refreshed every step.

Steps are constrained to land on the requested output times exactly, so
trajectories are reproducible bit-for-bit and no dense interpolation is
involved.  Unrecoverable step failures (step-size underflow, Newton
divergence, overflow of the state) are reported on the returned
Trajectory instead of raising: blow-up is data here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .discretization import Grid, StateField, _assemble_rhs, banded_jacobian
from .models import ModelSpec

SQRT2 = math.sqrt(2.0)
GAMMA = 2.0 - SQRT2
D_IMPL = GAMMA / 2.0                 # implicit weight of both stages
W_GAMMA = (1.0 + SQRT2) / 2.0        # BDF2 stage: y1 = W_GAMMA*yg + W_PREV*y0 + d*h*f1
W_PREV = -(SQRT2 - 1.0) / 2.0
# Embedded error weights (difference to the third-order companion).
E_0 = (SQRT2 - 1.0) / 3.0
E_G = -1.0 / 3.0
E_1 = (2.0 - SQRT2) / 3.0

BLOWUP_LIMIT = 1e12   # max-norm beyond which a run is declared blown up
MAX_ATTEMPTS = 40     # step-size reductions allowed within a single step


@dataclass
class SolverOptions:
    """Tolerances and Newton controls for the implicit stepper.

    newton_tol is measured in the same weighted norm as the local error
    (1.0 means one unit of the step tolerance), so stage equations are
    solved well below the truncation error.
    """

    rtol: float = 1e-6
    atol: float = 1e-9
    max_step: float = math.inf
    initial_step: float | None = None
    newton_tol: float = 1e-5
    newton_max_iters: int = 12
    jacobian_mode: str = "finite-difference"

    def validate(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.initial_step is not None and self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iters < 1:
            raise ValueError("newton_max_iters must be at least 1")
        if self.jacobian_mode not in ("finite-difference", "analytic-banded"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass
class IntegratorStats:
    steps: int = 0
    rejected: int = 0
    newton_iters: int = 0
    nfev: int = 0
    njev: int = 0


@dataclass
class Trajectory:
    """States at uniformly spaced output times plus integrator statistics.

    When failed is set, states holds only the output times reached before
    failure_time and failure_reason names what broke.
    """

    states: list
    stats: IntegratorStats
    failed: bool = False
    failure_time: float | None = None
    failure_reason: str | None = None

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    @property
    def m(self) -> int:
        return self.states[0].m

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def as_array(self) -> np.ndarray:
        """Stacked values, shape (n_times, m, J)."""
        return np.stack([s.values for s in self.states])


class _StepFailure(Exception):
    """Internal: a stage could not be completed at the current step size."""


def _weighted_rms(v, scale):
    return float(np.sqrt(np.mean((v / scale) ** 2)))


def _fd_banded_jacobian(f, t, y, f0, bw, stats):
    """Banded finite-difference Jacobian by column coloring.

    Columns a full bandwidth apart never share a row, so ml + mu + 1
    right-hand-side evaluations resolve every entry.
    """
    n = y.size
    ncolor = 2 * bw + 1
    ab = np.zeros((ncolor, n))
    h = math.sqrt(np.finfo(float).eps) * np.maximum(np.abs(y), 1.0)
    for color in range(ncolor):
        cols = np.arange(color, n, ncolor)
        yp = y.copy()
        yp[cols] += h[cols]
        df = f(t, yp) - f0
        stats.nfev += 1
        for off in range(-bw, bw + 1):
            rows = cols + off
            ok = (rows >= 0) & (rows < n)
            ab[bw + off, cols[ok]] = df[rows[ok]] / h[cols[ok]]
    return ab


def _newton_matrix(jac_ab, h, bw):
    w = -D_IMPL * h * jac_ab
    w[bw, :] += 1.0
    return w


class _Stepper:
    """Drives TR-BDF2 from output time to output time for a generic rhs."""

    def __init__(self, f, jac, n, bw, opts):
        self.f = f
        self.jac = jac          # jac(t, y, f0) -> banded rhs Jacobian, or None for FD
        self.n = n
        self.bw = bw
        self.opts = opts
        self.stats = IntegratorStats()

    def _eval(self, t, y):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = self.f(t, y)
        self.stats.nfev += 1
        return out

    def _jacobian(self, t, y, f0):
        self.stats.njev += 1
        if self.jac is not None:
            return self.jac(t, y, f0)
        return _fd_banded_jacobian(self.f, t, y, f0, self.bw, self.stats)

    def _solve_stage(self, w_ab, t_stage, z0, psi, h, scale):
        """Newton for z - d*h*f(t_stage, z) = psi; returns converged z."""
        opts = self.opts
        z = z0.copy()
        prev = math.inf
        for _ in range(opts.newton_max_iters):
            if not np.isfinite(z).all():
                raise _StepFailure("nonfinite stage iterate")
            fz = self._eval(t_stage, z)
            if not np.isfinite(fz).all():
                raise _StepFailure("nonfinite right-hand side")
            g = z - D_IMPL * h * fz - psi
            dz = solve_banded((self.bw, self.bw), w_ab, -g)
            z += dz
            self.stats.newton_iters += 1
            ndz = _weighted_rms(dz, scale)
            if not math.isfinite(ndz):
                raise _StepFailure("nonfinite Newton update")
            if ndz < opts.newton_tol:
                return z
            if ndz > 0.9 * prev and prev < math.inf:
                raise _StepFailure("Newton stalled")
            prev = ndz
        raise _StepFailure("Newton did not converge")

    def _initial_step(self, t0, y0, f0, span):
        opts = self.opts
        if opts.initial_step is not None:
            return min(opts.initial_step, span, opts.max_step)
        scale = opts.atol + opts.rtol * np.abs(y0)
        d0 = _weighted_rms(y0, scale)
        d1 = _weighted_rms(f0, scale)
        if d1 > 1e-14 and d0 > 1e-14:
            h = 0.01 * d0 / d1
        else:
            h = 1e-3 * span
        return max(min(h, span, opts.max_step), 1e-12 * span)

    def run(self, t0, y0, t_out):
        """Advance from (t0, y0) through the strictly increasing t_out.

        Returns (outputs, failure_time, reason); outputs pairs (t, y) for
        the times reached, and reason is None on success.
        """
        opts = self.opts
        t = t0
        y = y0.copy()
        outputs = [(t, y.copy())]
        f0 = self._eval(t, y)
        if not np.isfinite(f0).all():
            return outputs, t, "nonfinite right-hand side at start"
        span = t_out[-1] - t0
        h = self._initial_step(t0, y0, f0, span)
        for target in t_out:
            while t < target:
                h = min(h, opts.max_step, target - t)
                hmin = 1e-13 * max(abs(t), abs(span), 1.0)
                accepted = False
                rejected_here = False
                for _ in range(MAX_ATTEMPTS):
                    if h < hmin:
                        return outputs, t, "step size underflow"
                    jac_ab = self._jacobian(t, y, f0)
                    w_ab = _newton_matrix(jac_ab, h, self.bw)
                    scale = opts.atol + opts.rtol * np.abs(y)
                    try:
                        psi1 = y + D_IMPL * h * f0
                        yg = self._solve_stage(
                            w_ab, t + GAMMA * h, y + GAMMA * h * f0, psi1, h, scale
                        )
                        fg = (yg - psi1) / (D_IMPL * h)
                        psi2 = W_GAMMA * yg + W_PREV * y
                        y1 = self._solve_stage(
                            w_ab, t + h, y + (yg - y) / GAMMA, psi2, h, scale
                        )
                        f1 = (y1 - psi2) / (D_IMPL * h)
                    except _StepFailure:
                        self.stats.rejected += 1
                        rejected_here = True
                        h *= 0.25
                        continue
                    est = h * (E_0 * f0 + E_G * fg + E_1 * f1)
                    est = solve_banded((self.bw, self.bw), w_ab, est)
                    sc = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y1))
                    err = _weighted_rms(est, sc)
                    if not math.isfinite(err):
                        self.stats.rejected += 1
                        rejected_here = True
                        h *= 0.25
                        continue
                    if err <= 1.0:
                        accepted = True
                        break
                    self.stats.rejected += 1
                    rejected_here = True
                    h *= min(0.9, max(0.1, 0.9 * err ** (-1.0 / 3.0)))
                    continue
                if not accepted:
                    return outputs, t, "repeated step rejections"
                # Land exactly on the target to keep output times exact.
                t = target if (target - t) - h <= 1e-14 * max(abs(target), 1.0) else t + h
                y = y1
                self.stats.steps += 1
                if np.max(np.abs(y)) > BLOWUP_LIMIT:
                    return outputs, t, "state blow-up"
                f0 = self._eval(t, y)
                if not np.isfinite(f0).all():
                    return outputs, t, "nonfinite right-hand side"
                grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** (-1.0 / 3.0)))
                if rejected_here:
                    grow = min(grow, 1.0)  # no growth right after a rejection
                h *= grow
            outputs.append((t, y.copy()))
        return outputs, None, None


def _pack(values: np.ndarray) -> np.ndarray:
    # species-interleaved flat vector: index = cell * m + species
    return values.T.ravel()


def _unpack(y: np.ndarray, m: int, J: int) -> np.ndarray:
    return y.reshape(J, m).T


def _make_rhs(model: ModelSpec, grid: Grid, m: int):
    def f(t, y):
        dudt, _ = _assemble_rhs(model, grid, _unpack(y, m, grid.J))
        return _pack(dudt)

    return f


def _run_method_of_lines(f, jac, u0: StateField, t_out, opts: SolverOptions):
    """Shared driver: flat ODE advance, repacked into a Trajectory."""
    m, J = u0.m, u0.grid.J
    bw = 2 * m - 1
    stepper = _Stepper(f, jac, m * J, bw, opts)
    outputs, fail_t, reason = stepper.run(u0.time, _pack(u0.values), t_out)
    states = [StateField(u0.grid, _unpack(y, m, J), t) for t, y in outputs]
    return Trajectory(
        states=states,
        stats=stepper.stats,
        failed=reason is not None,
        failure_time=fail_t,
        failure_reason=reason,
    )


def _output_times(t0: float, T: float, M: int) -> np.ndarray:
    t_out = t0 + (T / M) * np.arange(1, M + 1)
    t_out[-1] = t0 + T
    return t_out


def integrate(
    model: ModelSpec,
    u0: StateField,
    T: float,
    M: int,
    opts: SolverOptions | None = None,
) -> Trajectory:
    """Integrate the semi-discrete system over [t0, t0 + T].

    The solution is returned at the M + 1 uniformly spaced output times
    t0 + k*T/M, which the adaptive stepper hits exactly.  Each species'
    mass is conserved up to Newton tolerances.  On unrecoverable step
    failure a partial Trajectory with the failure flag set is returned.
    """
    opts = opts or SolverOptions()
    opts.validate()
    if T <= 0:
        raise ValueError("horizon T must be positive")
    if M < 1:
        raise ValueError("need at least one output interval")
    if model.m != u0.m:
        raise ValueError("state and model have mismatched species counts")
    if not np.isfinite(u0.values).all():
        raise ValueError("initial state contains NaN or Inf")
    grid = u0.grid
    m = u0.m
    f = _make_rhs(model, grid, m)
    jac = None
    if opts.jacobian_mode == "analytic-banded":
        def jac(t, y, f0):
            return banded_jacobian(model, grid, _unpack(y, m, grid.J))
    return _run_method_of_lines(f, jac, u0, _output_times(u0.time, T, M), opts)


def steady_state(
    model: ModelSpec,
    u0: StateField,
    opts: SolverOptions | None = None,
    steady_tol: float = 1e-8,
    t_max: float = 20.0,
    window: float = 1.0,
):
    """March in time windows until max|dudt| < steady_tol or t >= t_max.

    Returns (state, converged, t_reached).  A solver failure inside a
    window ends the march with converged = False at the failure time.
    """
    opts = opts or SolverOptions()
    opts.validate()
    state = u0.copy()
    t = u0.time

    def residual(s):
        dudt, _ = _assemble_rhs(model, s.grid, s.values)
        return float(np.max(np.abs(dudt)))

    if residual(state) < steady_tol:
        return state, True, t
    while t < t_max:
        w = min(window, t_max - t)
        traj = integrate(model, state, w, 1, opts)
        if traj.failed:
            return traj.states[-1], False, traj.failure_time
        state = traj.states[-1]
        t = state.time
        if residual(state) < steady_tol:
            return state, True, t
    return state, False, t
