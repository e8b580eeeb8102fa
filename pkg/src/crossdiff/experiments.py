"""Named experiment setups: models, initial data and parameter sets.

These builders pin the configurations used by the command-line harness
and the acceptance suite in one place.  Desk-scale defaults use J = 200
cells; the finer production resolution (J = 500) is one flag away.
"""

from __future__ import annotations

import numpy as np

from .discretization import Grid, StateField
from .models import (
    GaussianWell,
    ModelSpec,
    PhysicalParams,
    ZeroPotential,
    build_model,
)

# Reference value of the maximum of the normalized plateau initial data,
# used for ellipticity threshold reporting: 2 / 1.5 = 4/3.
PLATEAU_U_STAR = 4.0 / 3.0


def symmetric_params(epsilon: float, diffusivity=(1.0, 1.0), dim: int = 2) -> PhysicalParams:
    """Equal number fractions and sizes; diffusivities may differ."""
    return PhysicalParams(
        dim=dim,
        n_frac=(0.5, 0.5),
        size_frac=(1.0, 1.0),
        diffusivity=tuple(diffusivity),
        epsilon=epsilon,
    )


def well_potentials(amplitude: float = 1.0, sharpness: float = 120.0, center: float = 0.0):
    """Species 1 in a Gaussian well, species 2 potential-free."""
    return (GaussianWell(amplitude, sharpness, center), ZeroPotential())


def zero_potentials():
    return (ZeroPotential(), ZeroPotential())


def catalog_model(
    family: str,
    epsilon: float,
    diffusivity=(1.0, 1.0),
    potentials=None,
    dim: int = 2,
) -> ModelSpec:
    pots = well_potentials() if potentials is None else potentials
    return build_model(family, symmetric_params(epsilon, diffusivity, dim), pots)


def normalized_gaussian(grid: Grid, center: float = -0.2, sharpness: float = 80.0) -> np.ndarray:
    """Gaussian bump at the midpoints, normalized to unit discrete mass."""
    x = grid.midpoints
    prof = np.exp(-sharpness * (x - center) ** 2)
    return prof / (grid.dx * prof.sum())


def uniform_profile(grid: Grid) -> np.ndarray:
    return np.ones(grid.J)


def tanh_plateau_pair(grid: Grid, a: float = 0.5, b: float = 0.05) -> np.ndarray:
    """Two overlapping normalized plateaus, shape (2, J).

    u_1 ~ 1 + 0.5 tanh(10(2x + a - b)) + 0.5 tanh(-10(2x - a - b)) and u_2
    the same with b -> -b; each row is normalized to unit mass, which puts
    the shared maximum near 4/3.
    """
    x = grid.midpoints
    u1 = 1.0 + 0.5 * np.tanh(10.0 * (2.0 * x + a - b)) + 0.5 * np.tanh(-10.0 * (2.0 * x - a - b))
    u2 = 1.0 + 0.5 * np.tanh(10.0 * (2.0 * x + a + b)) + 0.5 * np.tanh(-10.0 * (2.0 * x - a + b))
    out = np.stack([u1, u2])
    out /= grid.dx * out.sum(axis=1, keepdims=True)
    return out


def relaxation_setup(J: int = 200, epsilon: float = 0.25, family: str = "hardsphere"):
    """Gaussian bump relaxing in a well while displacing a uniform partner.

    Returns (model, initial state, T, M): symmetric parameters, species 1
    starts as a normalized Gaussian at x = -0.2 inside the well, species 2
    uniform; horizon T = 1.
    """
    grid = Grid(J)
    model = catalog_model(family, epsilon)
    u0 = StateField(grid, np.stack([normalized_gaussian(grid), uniform_profile(grid)]))
    return model, u0, 1.0, 200


def plateau_stress_setup(J: int = 500, epsilon: float = 0.3):
    """Potential-free overlapping plateaus probing the ellipticity threshold.

    Returns (model, initial state, T, M) with T = 0.1, M = 100.
    """
    grid = Grid(J)
    model = catalog_model("hardsphere", epsilon, potentials=zero_potentials())
    u0 = StateField(grid, tanh_plateau_pair(grid))
    return model, u0, 0.1, 100


def comparison_setup(J: int = 200, epsilon: float = 0.1, family: str = "hardsphere"):
    """Model-gap sweep setup: plateau data, well potential, unequal diffusivities.

    Returns (model, initial state, T, M) with D = (1.5, 1.0) and T = 1.
    """
    grid = Grid(J)
    model = catalog_model(family, epsilon, diffusivity=(1.5, 1.0))
    u0 = StateField(grid, tanh_plateau_pair(grid))
    return model, u0, 1.0, 100


DEFAULT_EPSILONS = {
    "fig1": (0.25,),
    "fig2": (0.0, 0.125, 0.25),
    "fig3": tuple(round(0.05 * k, 10) for k in range(1, 13)),
    "fig5": (0.025, 0.05, 0.1, 0.2),
    "picard": (0.05, 0.1, 0.2),
}

DEFAULT_CELLS = {
    "fig1": 200,
    "fig2": 200,
    "fig3": 500,
    "fig5": 200,
    "sweep": 200,
    "compare": 200,
    "picard": 100,
    "convergence": 400,
}
