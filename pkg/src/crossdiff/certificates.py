"""A priori constants ledger: envelopes, K-functions and stability prefactors.

Everything here is exact arithmetic on user-supplied analytic bounds;
embedding constants default to 1 because the ledger's value is structural
(monotonicity, horizon-independence under time-independent coefficients,
admissible-epsilon reporting), not sharp numerics.

Convention for the perturbation envelopes: each matrix entry of a catalog
model is split as (x-amplitude) * epsilon * (polynomial in u with the
tabulated interaction coefficients), e.g. the first diagonal diffusion
entry of the hard-sphere family contributes amplitude D_1 and the
u-coefficient vector (a_1, -c_1).  The envelopes bound the u-polynomials
over the ball |u| <= R; kappa1 bounds their first derivatives, so
kappa1 = kappa0 and kappa2 = 0 for entries linear in u.  The gradflow
family reuses the hard-sphere envelope: its additional order-epsilon^2
diffusion correction is a model-difference term, not part of the
first-order perturbation this envelope describes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .models import ModelSpec


@dataclass(frozen=True)
class LipschitzEnvelope:
    """Envelopes L0(R) = kappa0 R, L1(R) = kappa1, L2(R) = kappa2."""

    kappa0: float
    kappa1: float
    kappa2: float

    def __post_init__(self):
        if min(self.kappa0, self.kappa1, self.kappa2) < 0:
            raise ValueError("envelope coefficients must be nonnegative")

    def L0(self, R: float) -> float:
        return self.kappa0 * R

    def L1(self, R: float) -> float:
        return self.kappa1

    def L2(self, R: float) -> float:
        return self.kappa2


def _entry_norms(model: ModelSpec):
    """Euclidean norms of the u-coefficient vectors of every matrix entry."""
    if model.family == "reference":
        return [0.0]
    n1, n2 = model.params.n_frac
    if model.family == "lattice":
        # diffusion entries carry N-fractions; drift u-polynomials likewise
        return [n2, n2, n1, n1, n1, n2, n1, n2]
    cf = model.coeffs
    a1, a2 = cf.a
    b1, b2 = cf.b
    c1, c2 = cf.c
    diff = [math.hypot(a1, c1), b1, b2, math.hypot(a2, c2)]
    drift = [1.0, 1.0]  # off-diagonal drift polynomials are u_1 and u_2
    return diff + drift


def coefficient_amplitude(model: ModelSpec) -> float:
    """Largest amplitude multiplying a u-dependent diffusion perturbation."""
    if model.family == "reference":
        return 0.0
    return max(model.diffusivity)


def lipschitz_envelopes(model: ModelSpec) -> LipschitzEnvelope:
    """Analytic envelope of a catalog model's u-dependent perturbation.

    kappa0 = kappa1 is the largest coefficient-vector norm over all
    diffusion and drift entries; kappa2 = 0 since the entries are linear.
    """
    if model.family not in ("reference", "lattice", "hardsphere", "gradflow"):
        raise ValueError(
            f"no analytic envelope for family {model.family!r}; supply one explicitly"
        )
    kappa = max(_entry_norms(model))
    return LipschitzEnvelope(kappa0=kappa, kappa1=kappa, kappa2=0.0)


@dataclass(frozen=True)
class ConstantsInput:
    """User-supplied analytic bounds feeding the ledger.

    M bounds the space-time regularity of the perturbation amplitudes,
    lam is the ellipticity constant of the unperturbed diffusion, the
    C_S* fields are Sobolev embedding constants (all default 1), C_P the
    Poincare-Wirtinger constant, M_omega/M_A/M_B/M_T the weight and
    coefficient bounds of the parabolic estimate, M_V* the potential
    bounds entering the horizon-free route, and elliptic_reg_C the
    elliptic regularity constant.  hypothesis_h selects the
    time-independent route, which requires M_B = M_T = 0; only then may
    T be infinite.
    """

    M: float = 1.0
    lam: float = 1.0
    C_S_inf: float = 1.0
    C_S_1: float = 1.0
    C_S_2: float = 1.0
    C_S: float = 1.0
    C_P: float = 1.0
    M_omega: float = 1.0
    M_A: float = 1.0
    M_B: float = 0.0
    M_T: float = 0.0
    M_V: float = 0.0
    M_V1: float = 0.0
    M_V2: float = 0.0
    elliptic_reg_C: float = 1.0
    domain_measure: float = 1.0
    T: float = 1.0
    hypothesis_h: bool = False

    def __post_init__(self):
        positives = {
            "M": self.M,
            "lam": self.lam,
            "C_S_inf": self.C_S_inf,
            "C_S_1": self.C_S_1,
            "C_S_2": self.C_S_2,
            "C_S": self.C_S,
            "C_P": self.C_P,
            "M_omega": self.M_omega,
            "M_A": self.M_A,
            "elliptic_reg_C": self.elliptic_reg_C,
            "domain_measure": self.domain_measure,
        }
        for name, val in positives.items():
            if val <= 0:
                raise ValueError(f"{name} must be positive")
        for name, val in (("M_B", self.M_B), ("M_T", self.M_T), ("M_V", self.M_V),
                          ("M_V1", self.M_V1), ("M_V2", self.M_V2)):
            if val < 0:
                raise ValueError(f"{name} must be nonnegative")
        if math.isinf(self.T) and not self.hypothesis_h:
            raise ValueError("an infinite horizon requires the time-independent route")
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class ParabolicConstants:
    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    C_T_or_inf: float
    horizon_free: bool


def parabolic_constants(inputs: ConstantsInput) -> ParabolicConstants:
    """Constants of the linear parabolic estimate.

    C1 = sqrt(T)/sqrt(|Omega|) + (C_P + 1) sqrt(M_omega / (2 lam))
    C2 = 1 + sqrt(M_omega) + M_B C1
    C3 = 2 M_T M_A (1 + 2 M_T M_A) + 2 M_B^2 M_omega
    C4 = (2 C3 + 1) C2^2 + M_B^2 C1^2
    C5 = M_omega (M_A + M_B) + sqrt(M_omega) max(M_T C1, 1) exp(sqrt(2) M_omega M_B T)
    C_T = 2 ( C_reg (C5 + M_B C1) + sqrt(M_omega/lam)(M_A + M_B)
              + sqrt(2/lam) max(M_T C1, 1) )

    With time-independent coefficients and potential-derived drift the
    weight change of unknown gives M_B = M_T = 0, the same formulas
    collapse to a horizon-free constant, and the result is multiplied by
    the weight-map factor ((1 + M_V')^2 + M_V'') exp(M_V).  On that route
    T is never read, so the constant is literally independent of it.
    """
    mo = inputs.M_omega
    lam = inputs.lam
    if inputs.hypothesis_h:
        if inputs.M_B != 0.0 or inputs.M_T != 0.0:
            raise ValueError(
                "the time-independent route requires M_B = 0 and M_T = 0"
            )
        C1 = math.nan  # finite-horizon constant; unused on this route
        C2 = 1.0 + math.sqrt(mo)
        C3 = 0.0
        C4 = C2**2
        C5 = mo * inputs.M_A + math.sqrt(mo)
        base = 2.0 * (
            inputs.elliptic_reg_C * C5
            + math.sqrt(mo / lam) * inputs.M_A
            + math.sqrt(2.0 / lam)
        )
        weight = ((1.0 + inputs.M_V1) ** 2 + inputs.M_V2) * math.exp(inputs.M_V)
        return ParabolicConstants(C1, C2, C3, C4, C5, base * weight, True)
    T = inputs.T
    mb, mt, ma = inputs.M_B, inputs.M_T, inputs.M_A
    C1 = math.sqrt(T) / math.sqrt(inputs.domain_measure) + (inputs.C_P + 1.0) * math.sqrt(mo / (2.0 * lam))
    C2 = 1.0 + math.sqrt(mo) + mb * C1
    C3 = 2.0 * mt * ma * (1.0 + 2.0 * mt * ma) + 2.0 * mb**2 * mo
    C4 = (2.0 * C3 + 1.0) * C2**2 + mb**2 * C1**2
    grow = math.exp(math.sqrt(2.0) * mo * mb * T) if mb > 0 else 1.0
    mtc = max(mt * C1, 1.0) if mt > 0 else 1.0
    C5 = mo * (ma + mb) + math.sqrt(mo) * mtc * grow
    CT = 2.0 * (
        inputs.elliptic_reg_C * (C5 + mb * C1)
        + math.sqrt(mo / lam) * (ma + mb)
        + math.sqrt(2.0 / lam) * mtc
    )
    return ParabolicConstants(C1, C2, C3, C4, C5, CT, False)


@dataclass(frozen=True)
class KFunctions:
    """Perturbation growth functions and the admissible-epsilon bound."""

    env: LipschitzEnvelope
    M: float
    C_S_inf: float
    C_S_2: float
    C_S: float
    C_T_or_inf: float

    def K0(self, R: float) -> float:
        r = self.C_S_inf * R
        return self.M * (5.0 * self.env.L0(r) + 2.0 * self.C_S_2 * self.env.L1(r) * R)

    def K1(self, R: float) -> float:
        return self.C_S * self.M * (self.env.L1(R) * R + self.env.L2(R) * R**2)

    def K2(self, R: float) -> float:
        return (
            6.0
            * R
            * self.C_T_or_inf
            * self.C_S
            * max(self.env.L0(R) + self.env.L1(R) * R, self.M * (1.0 + R))
        )

    def epsilon0(self, R: float) -> float:
        return min(1.0 / (2.0 + 2.0 * self.K0(R)), 1.0 / (1.0 + self.K1(R)))


def k_and_epsilon0(
    env: LipschitzEnvelope, inputs: ConstantsInput, c_t_or_inf: float
) -> KFunctions:
    """Bundle the K-functions for an envelope and a parabolic constant."""
    if c_t_or_inf <= 0:
        raise ValueError("the parabolic constant must be positive")
    return KFunctions(
        env=env,
        M=inputs.M,
        C_S_inf=inputs.C_S_inf,
        C_S_2=inputs.C_S_2,
        C_S=inputs.C_S,
        C_T_or_inf=c_t_or_inf,
    )


@dataclass(frozen=True)
class ConstantsLedger:
    """Everything derived from one envelope + one set of analytic inputs."""

    env: LipschitzEnvelope
    inputs: ConstantsInput
    parabolic: ParabolicConstants
    kfun: KFunctions
    Y0: float | None = None
    Y1: float | None = None
    Gamma1: float | None = None
    Gamma2: float | None = None

    # convenience passthroughs
    def K0(self, R):
        return self.kfun.K0(R)

    def K1(self, R):
        return self.kfun.K1(R)

    def K2(self, R):
        return self.kfun.K2(R)

    def epsilon0(self, R):
        return self.kfun.epsilon0(R)


def make_ledger(env: LipschitzEnvelope, inputs: ConstantsInput) -> ConstantsLedger:
    pc = parabolic_constants(inputs)
    kf = k_and_epsilon0(env, inputs, pc.C_T_or_inf)
    return ConstantsLedger(env=env, inputs=inputs, parabolic=pc, kfun=kf)


def stability_gammas(
    ledger: ConstantsLedger, norm_u0: float, norm_u0_tilde: float
) -> ConstantsLedger:
    """Fill Y0, Y1 and the stability prefactors Gamma1, Gamma2.

    Y0 = C * |u0|_{H2}, Y1 = C * max of the two initial norms,
    Gamma1 = (1 + K1(Y1)) C, Gamma2 = (1 + K1(Y1)) K2(Y1), with C the
    horizon constant of the ledger.
    """
    if norm_u0 < 0 or norm_u0_tilde < 0:
        raise ValueError("initial-data norms must be nonnegative")
    C = ledger.parabolic.C_T_or_inf
    Y0 = C * norm_u0
    Y1 = C * max(norm_u0, norm_u0_tilde)
    k1 = ledger.kfun.K1(Y1)
    return replace(
        ledger,
        Y0=Y0,
        Y1=Y1,
        Gamma1=(1.0 + k1) * C,
        Gamma2=(1.0 + k1) * ledger.kfun.K2(Y1),
    )


def ledger_rows(ledger: ConstantsLedger, R_values=(0.5, 1.0, 2.0)):
    """Two-column (name, value) rows for table and CSV output."""
    env = ledger.env
    pc = ledger.parabolic
    rows = [
        ("kappa0", env.kappa0),
        ("kappa1", env.kappa1),
        ("kappa2", env.kappa2),
        ("C1", pc.C1),
        ("C2", pc.C2),
        ("C3", pc.C3),
        ("C4", pc.C4),
        ("C5", pc.C5),
        ("C_inf" if pc.horizon_free else "C_T", pc.C_T_or_inf),
    ]
    for R in R_values:
        rows.append((f"K0({R:g})", ledger.K0(R)))
        rows.append((f"K1({R:g})", ledger.K1(R)))
        rows.append((f"K2({R:g})", ledger.K2(R)))
        rows.append((f"epsilon0({R:g})", ledger.epsilon0(R)))
    for name in ("Y0", "Y1", "Gamma1", "Gamma2"):
        val = getattr(ledger, name)
        if val is not None:
            rows.append((name, val))
    return rows
