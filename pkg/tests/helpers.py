"""Shared test utilities: brute-force oracles and model builders.

The stencil oracles re-derive the spatial operators cell by cell with
scalar arithmetic, independently of the vectorized assembly they check.
"""

import numpy as np

from crossdiff.discretization import Grid, StateField, face_average
from crossdiff.models import PhysicalParams, build_model, eval_matrices
from crossdiff.experiments import well_potentials, zero_potentials


def stencil_rhs(model, state):
    """Per-stencil scalar evaluation of the staggered operator."""
    g = state.grid
    u = state.values
    m = state.m
    q = np.zeros((m, g.J + 1))
    for v in range(1, g.J):
        x = float(g.nodes[v])
        ubar = np.array([face_average(u[k, v - 1], u[k, v]) for k in range(m)])
        D, F = eval_matrices(model, x, ubar)
        for i in range(m):
            acc = 0.0
            for j in range(m):
                grad = (u[j, v] - u[j, v - 1]) / g.dx
                acc += D[i, j] * grad - F[i, j] * ubar[j]
            q[i, v] = acc
    dudt = np.zeros((m, g.J))
    for i in range(m):
        for n in range(g.J):
            dudt[i, n] = (q[i, n + 1] - q[i, n]) / g.dx
    return dudt, q


def stencil_linearized_rhs(model, frozen, state):
    """Scalar evaluation of the frozen-coefficient operator."""
    g = state.grid
    h = frozen.values
    u = state.values
    m = state.m
    q = np.zeros((m, g.J + 1))
    for v in range(1, g.J):
        x = float(g.nodes[v])
        hbar = np.array([face_average(h[k, v - 1], h[k, v]) for k in range(m)])
        D, F = eval_matrices(model, x, hbar)
        for i in range(m):
            acc = 0.0
            for j in range(m):
                grad = (u[j, v] - u[j, v - 1]) / g.dx
                s = h[j, v - 1] + h[j, v]
                ratio = 4.0 * h[j, v - 1] * h[j, v] / s**2 if s > 1e-14 else 0.0
                uface = ratio * 0.5 * (u[j, v - 1] + u[j, v])
                acc += D[i, j] * grad - F[i, j] * uface
            q[i, v] = acc
    dudt = np.zeros((m, g.J))
    for i in range(m):
        for n in range(g.J):
            dudt[i, n] = (q[i, n + 1] - q[i, n]) / g.dx
    return dudt


def two_species_params(epsilon=0.0, diffusivity=(1.0, 1.0), n_frac=(0.5, 0.5),
                       size_frac=(1.0, 1.0), dim=2):
    return PhysicalParams(dim=dim, n_frac=n_frac, size_frac=size_frac,
                          diffusivity=diffusivity, epsilon=epsilon)


def make_two_species(family, epsilon=0.0, diffusivity=(1.0, 1.0), potentials=None):
    pots = zero_potentials() if potentials is None else potentials
    return build_model(family, two_species_params(epsilon, diffusivity), pots)


def make_single_species(diffusivity=1.0):
    params = PhysicalParams(dim=2, n_frac=(1.0,), size_frac=(1.0,),
                            diffusivity=(diffusivity,), epsilon=0.0)
    from crossdiff.models import ZeroPotential

    return build_model("reference", params, (ZeroPotential(),))


def random_state(grid, m=2, seed=0, low=0.2, high=2.0):
    rng = np.random.default_rng(seed)
    return StateField(grid, low + (high - low) * rng.random((m, grid.J)))


__all__ = [
    "stencil_rhs",
    "stencil_linearized_rhs",
    "two_species_params",
    "make_two_species",
    "make_single_species",
    "random_state",
    "well_potentials",
    "zero_potentials",
    "Grid",
    "StateField",
]
