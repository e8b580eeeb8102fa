"""Staggered finite-difference spatial operator on (-1/2, 1/2).

Densities live at cell midpoints, fluxes at the nodes in between; the
boundary fluxes are pinned to zero so each species' mass telescopes
exactly.  Density factors entering a flux are averaged onto the node
with the positivity-preserving harmonic mean 2ab/(a+b); purely
x-dependent factors (potential gradients, coefficients) are evaluated
at the node itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .models import ModelSpec, eval_matrices, eval_matrix_jacobians

# Degeneracy guard for the harmonic mean: below this the face value is 0.
DELTA = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform staggered mesh of J cells on (-1/2, 1/2)."""

    J: int

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("grid needs at least one cell")

    @cached_property
    def dx(self) -> float:
        return 1.0 / self.J

    @cached_property
    def nodes(self) -> np.ndarray:
        return -0.5 + self.dx * np.arange(self.J + 1)

    @cached_property
    def midpoints(self) -> np.ndarray:
        return -0.5 + self.dx * (np.arange(self.J) + 0.5)


@dataclass
class StateField:
    """Per-species densities at the cell midpoints of a grid."""

    grid: Grid
    values: np.ndarray  # (m, J)
    time: float = 0.0

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[1] != self.grid.J:
            raise ValueError(
                f"state has {self.values.shape[1]} cells, grid has {self.grid.J}"
            )

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def copy(self) -> "StateField":
        return StateField(self.grid, self.values.copy(), self.time)


@dataclass
class FluxField:
    """Per-species fluxes at the nodes; the two boundary entries are zero."""

    grid: Grid
    values: np.ndarray  # (m, J+1)


def face_average(left, right):
    """Harmonic face value 2ab/(a+b), or 0 when a + b <= 1e-14.

    Vectorized; the zero branch makes the average degenerate smoothly to
    zero so that empty cells exchange no density-carried flux.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    s = left + right
    safe = np.where(s > DELTA, s, 1.0)
    out = np.where(s > DELTA, 2.0 * left * right / safe, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def _assemble_fluxes(model: ModelSpec, grid: Grid, u: np.ndarray) -> np.ndarray:
    """Node fluxes q (m, J+1) for densities u (m, J); boundary entries zero."""
    dx = grid.dx
    uL = u[:, :-1]
    uR = u[:, 1:]
    ubar = face_average(uL, uR)            # (m, J-1) at interior nodes
    grad = (uR - uL) / dx
    D, F = eval_matrices(model, grid.nodes[1:-1], ubar)
    q = np.zeros((u.shape[0], grid.J + 1))
    q[:, 1:-1] = np.einsum("ijn,jn->in", D, grad) - np.einsum("ijn,jn->in", F, ubar)
    return q


def _assemble_rhs(model: ModelSpec, grid: Grid, u: np.ndarray):
    """Raw-array version of spatial_rhs; returns (dudt, node fluxes)."""
    q = _assemble_fluxes(model, grid, u)
    dudt = (q[:, 1:] - q[:, :-1]) / grid.dx
    return dudt, q


def spatial_rhs(model: ModelSpec, state: StateField):
    """Semi-discrete right-hand side and the node fluxes producing it.

    At each interior node the gradient is the two-cell difference
    quotient, density factors are harmonic face averages and x factors
    are taken at the node; dudt on a cell is the flux difference across
    it divided by dx.
    """
    if state.m != model.m:
        raise ValueError("state and model have mismatched species counts")
    if not np.isfinite(state.values).all():
        raise ValueError("state contains NaN or Inf")
    dudt, q = _assemble_rhs(model, state.grid, state.values)
    return dudt, FluxField(state.grid, q)


def _harmonic_partials(left, right):
    """(d/dleft, d/dright) of the guarded harmonic mean."""
    s = left + right
    ok = s > DELTA
    safe = np.where(ok, s, 1.0)
    da = np.where(ok, 2.0 * right ** 2 / safe ** 2, 0.0)
    db = np.where(ok, 2.0 * left ** 2 / safe ** 2, 0.0)
    return da, db


def banded_jacobian(model: ModelSpec, grid: Grid, u: np.ndarray) -> np.ndarray:
    """Banded Jacobian of the assembled dudt in species-interleaved order.

    Unknown ordering is k = cell * m + species, giving lower/upper
    bandwidth 2m - 1.  Returned in scipy solve_banded layout
    ab[mu + r - c, c] with mu = ml = 2m - 1.
    """
    m = model.m
    J = grid.J
    dx = grid.dx
    uL = u[:, :-1]
    uR = u[:, 1:]
    ubar = face_average(uL, uR)
    grad = (uR - uL) / dx
    hL, hR = _harmonic_partials(uL, uR)     # (m, J-1)
    x_int = grid.nodes[1:-1]
    D, F = eval_matrices(model, x_int, ubar)
    dD, dF = eval_matrix_jacobians(model, x_int, ubar)
    # dq[i, p, v] per interior node v: sensitivity of q_i to the left/right
    # cell value of species p.
    core = np.einsum("ijpn,jn->ipn", dD, grad) - np.einsum("ijpn,jn->ipn", dF, ubar)
    AL = core * hL[None, :, :] - D / dx - F * hL[None, :, :]
    AR = core * hR[None, :, :] + D / dx - F * hR[None, :, :]

    bw = 2 * m - 1
    n = m * J
    ab = np.zeros((2 * bw + 1, n))

    def scatter(block, rows_cell, cols_cell):
        # block: (m, m, K) contributions d dudt[i, rows_cell] / d u[p, cols_cell]
        for i in range(m):
            for p in range(m):
                r = rows_cell * m + i
                c = cols_cell * m + p
                ab[bw + r - c, c] += block[i, p]

    cells = np.arange(J)
    # Interior node v = n+1 (right edge of cell n, n = 0..J-2) has array
    # index n in AL/AR; node v = n (left edge of cell n, n = 1..J-1) has
    # array index n-1.
    scatter(AL / dx, cells[:-1], cells[:-1])      # d q_{n+1}/d u_n
    scatter(AR / dx, cells[:-1], cells[1:])       # d q_{n+1}/d u_{n+1}
    scatter(-AL / dx, cells[1:], cells[:-1])      # -d q_n/d u_{n-1}
    scatter(-AR / dx, cells[1:], cells[1:])       # -d q_n/d u_n
    return ab
