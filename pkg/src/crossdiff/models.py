"""Catalog of interacting-species drift-diffusion models.

Two-species mixtures whose diffusion and drift matrices are small
perturbations, of size ``epsilon`` (the occupied-volume fraction), of a
pair of decoupled linear drift-diffusion equations:

* ``reference``  -- the decoupled limit (any species count),
* ``lattice``    -- size-exclusion random walk on a square lattice,
* ``hardsphere`` -- Brownian hard-sphere mixture,
* ``gradflow``   -- entropy/mobility variant of ``hardsphere``; same drift,
  diffusion corrected at order epsilon^2.

Matrix convention: the evolution is du_i/dt = d/dx [ sum_j (D_ij du_j/dx
- F_ij u_j) ], so the unperturbed drift entries are F_ii = -V_i'(x) and the
unperturbed steady state of species i is proportional to exp(-V_i/D_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

FAMILIES = ("reference", "lattice", "hardsphere", "gradflow")


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless physical inputs shared by every model family.

    dim is the dimension of the underlying physics (2 or 3); the solver
    itself works on one spatial coordinate.  n_frac are the number
    fractions (sum 1), size_frac the relative diameters (sum 2 for two
    species), diffusivity the per-species diffusion constants, and
    epsilon the occupied-volume fraction.
    """

    dim: int
    n_frac: tuple
    size_frac: tuple
    diffusivity: tuple
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "n_frac", tuple(float(v) for v in self.n_frac))
        object.__setattr__(self, "size_frac", tuple(float(v) for v in self.size_frac))
        object.__setattr__(self, "diffusivity", tuple(float(v) for v in self.diffusivity))
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        m = len(self.n_frac)
        if len(self.size_frac) != m or len(self.diffusivity) != m:
            raise ValueError("n_frac, size_frac and diffusivity must have equal length")
        if any(d <= 0 for d in self.diffusivity):
            raise ValueError("diffusivities must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if abs(sum(self.n_frac) - 1.0) > 1e-9:
            raise ValueError("number fractions must sum to 1")
        if m == 2 and abs(sum(self.size_frac) - 2.0) > 1e-9:
            raise ValueError("relative diameters must sum to 2 for two species")

    @property
    def m(self) -> int:
        return len(self.n_frac)


@dataclass(frozen=True)
class Coefficients:
    """Interaction coefficients of the two-species hard-sphere expansion."""

    a: tuple
    b: tuple
    c: tuple
    a12: float
    theta1: float
    theta2: float


def derive_coefficients(params: PhysicalParams) -> Coefficients:
    """Interaction coefficients for a two-species mixture.

    a_i = (2 pi / d)(d - 1) N_i s_i^d,
    b_i = (2 pi / d) ((d - 1) D_i + d D_j) / (D_i + D_j) N_i,
    c_i = (2 pi / d) D_i / (D_i + D_j) N_j,
    with cross coupling a12 = (d - 1)(c_1 + c_2) and the gradient-flow
    defects theta_1 = a_1 c_1 - a12 c_2, theta_2 = a_2 c_2 - a12 c_1.
    """
    if params.m != 2:
        raise ValueError("coefficient formulas require exactly two species")
    d = params.dim
    pref = 2.0 * math.pi / d
    n = params.n_frac
    s = params.size_frac
    dv = params.diffusivity
    a = tuple(pref * (d - 1) * n[i] * s[i] ** d for i in (0, 1))
    b = tuple(
        pref * ((d - 1) * dv[i] + d * dv[1 - i]) / (dv[i] + dv[1 - i]) * n[i]
        for i in (0, 1)
    )
    c = tuple(pref * dv[i] / (dv[i] + dv[1 - i]) * n[1 - i] for i in (0, 1))
    a12 = (d - 1) * (c[0] + c[1])
    theta1 = a[0] * c[0] - a12 * c[1]
    theta2 = a[1] * c[1] - a12 * c[0]
    return Coefficients(a=a, b=b, c=c, a12=a12, theta1=theta1, theta2=theta2)


class ZeroPotential:
    """V identically zero."""

    kind = "zero"

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def grad(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def __repr__(self):
        return "ZeroPotential()"


@dataclass(frozen=True)
class GaussianWell:
    """V(x) = amplitude * (1 - exp(-sharpness (x - center)^2))."""

    amplitude: float = 1.0
    sharpness: float = 120.0
    center: float = 0.0
    kind = "gaussian_well"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * (1.0 - np.exp(-self.sharpness * (x - self.center) ** 2))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        s = x - self.center
        return 2.0 * self.amplitude * self.sharpness * s * np.exp(-self.sharpness * s * s)


class TabulatedPotential:
    """Potential sampled on a grid, interpolated with a C^1 monotone cubic."""

    kind = "tabulated"

    def __init__(self, x_samples, v_samples):
        x_samples = np.asarray(x_samples, dtype=float)
        v_samples = np.asarray(v_samples, dtype=float)
        if x_samples.ndim != 1 or x_samples.shape != v_samples.shape:
            raise ValueError("samples must be two matching 1-d arrays")
        self._interp = PchipInterpolator(x_samples, v_samples, extrapolate=True)
        self._deriv = self._interp.derivative()
        self.x_samples = x_samples
        self.v_samples = v_samples

    def value(self, x):
        return self._interp(np.asarray(x, dtype=float))

    def grad(self, x):
        return self._deriv(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ModelSpec:
    """A fully specified model: family, parameters and potentials.

    Instances are immutable and safe to share across sweep workers.
    """

    family: str
    params: PhysicalParams
    coeffs: Coefficients | None
    potentials: tuple

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def epsilon(self) -> float:
        return 0.0 if self.family == "reference" else self.params.epsilon

    @property
    def diffusivity(self) -> tuple:
        return self.params.diffusivity


def build_model(family: str, params: PhysicalParams, potentials) -> ModelSpec:
    """Assemble a ModelSpec, deriving interaction coefficients when m = 2."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}, expected one of {FAMILIES}")
    potentials = tuple(potentials)
    if len(potentials) != params.m:
        raise ValueError("need one potential per species")
    if family != "reference" and params.m != 2:
        raise ValueError(f"family {family!r} is defined for two species only")
    coeffs = derive_coefficients(params) if params.m == 2 else None
    return ModelSpec(family=family, params=params, coeffs=coeffs, potentials=potentials)


def _as_points(x, u):
    """Broadcast (x, u) to x: (N,), u: (m, N); report whether input was a point."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    uu = u[:, None] if single else u
    xx = np.broadcast_to(np.asarray(x, dtype=float), (uu.shape[1],))
    return xx, uu, single


def eval_matrices(model: ModelSpec, x, u):
    """Diffusion and drift matrices D, F at position(s) x and density u.

    Accepts a single point (u of shape (m,), scalar x) or a batch
    (u of shape (m, N), x scalar or (N,)); returns arrays of shape
    (m, m) or (m, m, N).  Negative densities are evaluated as-is.
    """
    xx, uu, single = _as_points(x, u)
    m = model.m
    n_pts = uu.shape[1]
    D = np.zeros((m, m, n_pts))
    F = np.zeros((m, m, n_pts))
    dv = model.diffusivity
    vp = [p.grad(xx) for p in model.potentials]
    for i in range(m):
        D[i, i] = dv[i]
        F[i, i] = -vp[i]
    eps = model.epsilon
    if model.family != "reference" and eps != 0.0:
        u1, u2 = uu
        if model.family == "lattice":
            n1, n2 = model.params.n_frac
            D1, D2 = dv
            D[0, 0] = D1 * (1.0 - eps * n2 * u2)
            D[0, 1] = eps * D1 * n2 * u1
            D[1, 0] = eps * D2 * n1 * u2
            D[1, 1] = D2 * (1.0 - eps * n1 * u1)
            F[0, 0] = -vp[0] * (1.0 - eps * n1 * u1)
            F[0, 1] = eps * n2 * u1 * vp[0]
            F[1, 0] = eps * n1 * u2 * vp[1]
            F[1, 1] = -vp[1] * (1.0 - eps * n2 * u2)
        else:  # hardsphere and gradflow share the hard-sphere structure
            cf = model.coeffs
            a1, a2 = cf.a
            b1, b2 = cf.b
            c1, c2 = cf.c
            D1, D2 = dv
            D[0, 0] = D1 * (1.0 + eps * a1 * u1 - eps * c1 * u2)
            D[0, 1] = eps * D1 * b1 * u1
            D[1, 0] = eps * D2 * b2 * u2
            D[1, 1] = D2 * (1.0 + eps * a2 * u2 - eps * c2 * u1)
            F[0, 1] = eps * c1 * (vp[0] - vp[1]) * u1
            F[1, 0] = eps * c2 * (vp[1] - vp[0]) * u2
            if model.family == "gradflow":
                w = eps * eps * u1 * u2
                D[0, 0] += -D1 * cf.theta1 * w
                D[0, 1] += D1 * cf.theta2 * w
                D[1, 0] += D2 * cf.theta1 * w
                D[1, 1] += -D2 * cf.theta2 * w
    if single:
        return D[:, :, 0], F[:, :, 0]
    return D, F


def eval_matrix_jacobians(model: ModelSpec, x, u):
    """Derivatives dD[i,j,k] = d D_ij / d u_k and likewise dF, per point."""
    xx, uu, single = _as_points(x, u)
    m = model.m
    n_pts = uu.shape[1]
    dD = np.zeros((m, m, m, n_pts))
    dF = np.zeros((m, m, m, n_pts))
    eps = model.epsilon
    if model.family != "reference" and eps != 0.0:
        dv = model.diffusivity
        vp = [p.grad(xx) for p in model.potentials]
        D1, D2 = dv
        if model.family == "lattice":
            n1, n2 = model.params.n_frac
            dD[0, 0, 1] = -eps * D1 * n2
            dD[0, 1, 0] = eps * D1 * n2
            dD[1, 0, 1] = eps * D2 * n1
            dD[1, 1, 0] = -eps * D2 * n1
            dF[0, 0, 0] = eps * n1 * vp[0]
            dF[0, 1, 0] = eps * n2 * vp[0]
            dF[1, 0, 1] = eps * n1 * vp[1]
            dF[1, 1, 1] = eps * n2 * vp[1]
        else:
            cf = model.coeffs
            dD[0, 0, 0] = eps * D1 * cf.a[0]
            dD[0, 0, 1] = -eps * D1 * cf.c[0]
            dD[0, 1, 0] = eps * D1 * cf.b[0]
            dD[1, 0, 1] = eps * D2 * cf.b[1]
            dD[1, 1, 1] = eps * D2 * cf.a[1]
            dD[1, 1, 0] = -eps * D2 * cf.c[1]
            dF[0, 1, 0] = eps * cf.c[0] * (vp[0] - vp[1])
            dF[1, 0, 1] = eps * cf.c[1] * (vp[1] - vp[0])
            if model.family == "gradflow":
                u1, u2 = uu
                e2 = eps * eps
                T = np.array([[-D1 * cf.theta1, D1 * cf.theta2],
                              [D2 * cf.theta1, -D2 * cf.theta2]])
                for i in range(2):
                    for j in range(2):
                        dD[i, j, 0] += e2 * T[i, j] * u2
                        dD[i, j, 1] += e2 * T[i, j] * u1
    if single:
        return dD[..., 0], dF[..., 0]
    return dD, dF


def model_difference(model_a: ModelSpec, model_b: ModelSpec, x, u):
    """Entrywise matrix gap (D_b - D_a, F_b - F_a) at (x, u)."""
    if model_a.m != model_b.m:
        raise ValueError("models have mismatched species counts")
    Da, Fa = eval_matrices(model_a, x, u)
    Db, Fb = eval_matrices(model_b, x, u)
    return Db - Da, Fb - Fa


def mobility_matrix(model: ModelSpec, x, u):
    """Mobility matrix of the gradient-flow formulation (diagnostic only).

    Shares the call contract of eval_matrices; the solver never uses it.
    """
    if model.m != 2:
        raise ValueError("mobility matrix is defined for two species")
    _, uu, single = _as_points(x, u)
    u1, u2 = uu
    eps = model.epsilon
    c1, c2 = model.coeffs.c
    D1, D2 = model.diffusivity
    M = np.empty((2, 2, uu.shape[1]))
    M[0, 0] = D1 * u1 * (1.0 - eps * c1 * u2)
    M[0, 1] = D1 * c2 * eps * u1 * u2
    M[1, 0] = D2 * c1 * eps * u1 * u2
    M[1, 1] = D2 * u2 * (1.0 - c2 * eps * u1)
    return M[:, :, 0] if single else M


def entropy(model: ModelSpec, state) -> float:
    """Mixture entropy of a state by midpoint quadrature.

    Integrand: sum_i u_i log u_i + u_i V_i / D_i, plus the interaction
    term (eps/2)(a_1 u_1^2 + 2 a12 u_1 u_2 + a_2 u_2^2) for two species.
    Requires strictly positive densities.
    """
    u = state.values
    if np.any(u <= 0.0):
        i, n = np.argwhere(u <= 0.0)[0]
        raise ValueError(
            f"entropy needs positive densities: u_{i + 1} = {u[i, n]:.3e} "
            f"at cell {n} (x = {state.grid.midpoints[n]:.4f})"
        )
    xm = state.grid.midpoints
    total = np.zeros_like(u[0])
    for i in range(model.m):
        total += u[i] * np.log(u[i])
        total += u[i] * model.potentials[i].value(xm) / model.diffusivity[i]
    eps = model.epsilon
    if eps != 0.0:
        if model.m != 2:
            raise ValueError("interaction entropy term is defined for two species")
        cf = model.coeffs
        u1, u2 = u
        total += 0.5 * eps * (cf.a[0] * u1 ** 2 + 2.0 * cf.a12 * u1 * u2 + cf.a[1] * u2 ** 2)
    return float(state.grid.dx * total.sum())
