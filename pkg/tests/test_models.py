import math

import numpy as np
import pytest

from crossdiff.models import (
    GaussianWell,
    PhysicalParams,
    TabulatedPotential,
    ZeroPotential,
    build_model,
    derive_coefficients,
    entropy,
    eval_matrices,
    eval_matrix_jacobians,
    mobility_matrix,
    model_difference,
)
from crossdiff.discretization import Grid, StateField

from helpers import make_single_species, make_two_species, two_species_params, well_potentials

PI = math.pi


class TestPhysicalParams:
    def test_rejects_bad_dim(self):
        with pytest.raises(ValueError, match="dim"):
            PhysicalParams(dim=4, n_frac=(0.5, 0.5), size_frac=(1, 1), diffusivity=(1, 1))

    def test_rejects_nonpositive_diffusivity(self):
        with pytest.raises(ValueError, match="positive"):
            PhysicalParams(dim=2, n_frac=(0.5, 0.5), size_frac=(1, 1), diffusivity=(1, 0))

    def test_rejects_unnormalized_fractions(self):
        with pytest.raises(ValueError, match="sum to 1"):
            PhysicalParams(dim=2, n_frac=(0.6, 0.6), size_frac=(1, 1), diffusivity=(1, 1))
        with pytest.raises(ValueError, match="sum to 2"):
            PhysicalParams(dim=2, n_frac=(0.5, 0.5), size_frac=(1.2, 1.2), diffusivity=(1, 1))

    def test_rejects_negative_epsilon(self):
        with pytest.raises(ValueError, match="epsilon"):
            PhysicalParams(dim=2, n_frac=(0.5, 0.5), size_frac=(1, 1), diffusivity=(1, 1), epsilon=-0.1)


class TestDeriveCoefficients:
    def test_symmetric_values(self):
        c = derive_coefficients(two_species_params())
        assert c.a == pytest.approx((PI / 2, PI / 2), abs=1e-15)
        assert c.b == pytest.approx((3 * PI / 4, 3 * PI / 4), abs=1e-15)
        assert c.c == pytest.approx((PI / 4, PI / 4), abs=1e-15)
        assert c.a12 == pytest.approx(PI / 2, abs=1e-15)
        assert c.theta1 == pytest.approx(0.0, abs=1e-15)
        assert c.theta2 == pytest.approx(0.0, abs=1e-15)

    def test_unequal_diffusivities(self):
        c = derive_coefficients(two_species_params(diffusivity=(1.5, 1.0)))
        assert c.a == pytest.approx((PI / 2, PI / 2))
        assert c.b == pytest.approx((0.7 * PI, 0.8 * PI))
        assert c.c == pytest.approx((0.3 * PI, 0.2 * PI))
        assert c.a12 == pytest.approx(0.5 * PI)
        assert c.theta1 == pytest.approx(0.05 * PI**2)
        assert c.theta2 == pytest.approx(-0.05 * PI**2)

    def test_cross_coupling_identity(self):
        for dv in ((1.0, 1.0), (2.0, 0.5), (1.5, 1.0)):
            for dim in (2, 3):
                p = PhysicalParams(dim=dim, n_frac=(0.3, 0.7), size_frac=(0.8, 1.2),
                                   diffusivity=dv)
                c = derive_coefficients(p)
                assert c.a12 == pytest.approx((dim - 1) * (c.c[0] + c.c[1]), rel=1e-14)

    def test_single_population_degeneracy(self):
        c = derive_coefficients(two_species_params(n_frac=(1.0, 0.0)))
        assert c.c[0] == 0.0
        assert c.a[1] == 0.0
        assert math.isfinite(c.b[1])


class TestPotentials:
    def test_gaussian_well_gradient_matches_finite_difference(self):
        well = GaussianWell(amplitude=1.0, sharpness=120.0, center=0.1)
        x = np.linspace(-0.5, 0.5, 23)
        h = 1e-6
        fd = (well.value(x + h) - well.value(x - h)) / (2 * h)
        assert np.allclose(well.grad(x), fd, atol=1e-5)

    def test_tabulated_matches_samples_and_is_c1(self):
        xs = np.linspace(-0.5, 0.5, 101)
        well = GaussianWell()
        tab = TabulatedPotential(xs, well.value(xs))
        assert np.allclose(tab.value(xs), well.value(xs), atol=1e-14)
        # monotone cubic between knots: third-order accurate values, first
        # derivative continuous but only first-order sharp near the well
        dense = np.linspace(-0.5, 0.5, 1001)
        assert np.allclose(tab.value(dense), well.value(dense), atol=2e-3)
        assert np.allclose(tab.grad(dense), well.grad(dense), atol=1.0)
        # derivative is continuous across interior knots
        knots = xs[1:-1]
        delta = 1e-9
        assert np.allclose(tab.grad(knots - delta), tab.grad(knots + delta), atol=1e-5)

    def test_zero_potential(self):
        z = ZeroPotential()
        x = np.linspace(-0.5, 0.5, 7)
        assert np.all(z.value(x) == 0.0)
        assert np.all(z.grad(x) == 0.0)


class TestEvalMatrices:
    @pytest.mark.parametrize("family", ["reference", "lattice", "hardsphere", "gradflow"])
    def test_unperturbed_is_diagonal_and_u_independent(self, family):
        model = make_two_species(family, epsilon=0.0, diffusivity=(1.5, 1.0),
                                 potentials=well_potentials())
        rng = np.random.default_rng(3)
        for x in (-0.3, 0.0, 0.4):
            base = None
            for _ in range(4):
                u = rng.uniform(-1.0, 2.0, size=2)
                D, F = eval_matrices(model, x, u)
                v1p = model.potentials[0].grad(x)
                assert np.allclose(D, np.diag([1.5, 1.0]))
                assert np.allclose(F, np.diag([-v1p, 0.0]))
                if base is None:
                    base = (D, F)
                assert np.array_equal(D, base[0]) and np.array_equal(F, base[1])

    def test_hardsphere_entries_at_unit_density(self):
        model = make_two_species("hardsphere", epsilon=0.25)
        D, F = eval_matrices(model, 0.0, np.array([1.0, 1.0]))
        assert D[0, 1] == pytest.approx(0.25 * 3 * PI / 4, rel=1e-14)
        assert D[1, 0] == pytest.approx(0.25 * 3 * PI / 4, rel=1e-14)
        assert D[0, 0] == pytest.approx(1 + 0.25 * PI / 4, rel=1e-14)
        assert D[1, 1] == pytest.approx(1 + 0.25 * PI / 4, rel=1e-14)

    def test_gradflow_equals_hardsphere_for_symmetric_parameters(self):
        hs = make_two_species("hardsphere", epsilon=0.25, potentials=well_potentials())
        gf = make_two_species("gradflow", epsilon=0.25, potentials=well_potentials())
        dD, dF = model_difference(hs, gf, 0.1, np.array([1.0, 1.0]))
        assert np.allclose(dD, 0.0, atol=1e-15)
        assert np.allclose(dF, 0.0, atol=1e-15)

    def test_lattice_entries_at_random_point(self):
        model = make_two_species("lattice", epsilon=0.2, diffusivity=(1.5, 1.0),
                                 potentials=well_potentials())
        u = np.array([0.7, 1.3])
        x = 0.05
        D, F = eval_matrices(model, x, u)
        v1p = model.potentials[0].grad(x)
        assert D[0, 0] == pytest.approx(1.5 * (1 - 0.2 * 0.5 * 1.3))
        assert D[0, 1] == pytest.approx(0.2 * 1.5 * 0.5 * 0.7)
        assert D[1, 0] == pytest.approx(0.2 * 1.0 * 0.5 * 1.3)
        assert D[1, 1] == pytest.approx(1.0 * (1 - 0.2 * 0.5 * 0.7))
        assert F[0, 0] == pytest.approx(-v1p * (1 - 0.2 * 0.5 * 0.7))
        assert F[0, 1] == pytest.approx(0.2 * 0.5 * 0.7 * v1p)
        assert F[1, 0] == pytest.approx(0.0)
        assert F[1, 1] == pytest.approx(0.0)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(11)
        x = np.linspace(-0.4, 0.4, 9)
        u = rng.uniform(0.0, 2.0, size=(2, 9))
        for family in ("lattice", "hardsphere", "gradflow"):
            model = make_two_species(family, epsilon=0.15, diffusivity=(1.5, 1.0),
                                     potentials=well_potentials())
            D, F = eval_matrices(model, x, u)
            for k in range(9):
                Dk, Fk = eval_matrices(model, float(x[k]), u[:, k])
                assert np.allclose(D[:, :, k], Dk, rtol=1e-15, atol=1e-15)
                assert np.allclose(F[:, :, k], Fk, rtol=1e-15, atol=1e-15)

    def test_matrix_jacobians_match_finite_differences(self):
        rng = np.random.default_rng(5)
        for family in ("lattice", "hardsphere", "gradflow"):
            model = make_two_species(family, epsilon=0.2, diffusivity=(1.5, 1.0),
                                     potentials=well_potentials())
            u = rng.uniform(0.3, 1.5, size=2)
            x = 0.12
            dD, dF = eval_matrix_jacobians(model, x, u)
            h = 1e-7
            for k in range(2):
                up, um = u.copy(), u.copy()
                up[k] += h
                um[k] -= h
                Dp, Fp = eval_matrices(model, x, up)
                Dm, Fm = eval_matrices(model, x, um)
                assert np.allclose(dD[:, :, k], (Dp - Dm) / (2 * h), atol=1e-7)
                assert np.allclose(dF[:, :, k], (Fp - Fm) / (2 * h), atol=1e-7)


class TestModelDifference:
    def test_families_coincide_unperturbed(self):
        lat = make_two_species("lattice", epsilon=0.0, potentials=well_potentials())
        hs = make_two_species("hardsphere", epsilon=0.0, potentials=well_potentials())
        dD, dF = model_difference(lat, hs, 0.2, np.array([0.8, 1.1]))
        assert np.all(dD == 0.0) and np.all(dF == 0.0)

    def test_gradflow_shares_hardsphere_drift(self):
        hs = make_two_species("hardsphere", epsilon=0.3, diffusivity=(1.5, 1.0),
                              potentials=well_potentials())
        gf = make_two_species("gradflow", epsilon=0.3, diffusivity=(1.5, 1.0),
                              potentials=well_potentials())
        rng = np.random.default_rng(7)
        for _ in range(5):
            u = rng.uniform(0.0, 2.0, size=2)
            _, dF = model_difference(hs, gf, rng.uniform(-0.5, 0.5), u)
            assert np.all(dF == 0.0)

    def test_lattice_hardsphere_gap_entry(self):
        # symmetric parameters, V_2 = 0, u = (1, 1): first diagonal entry of
        # the diffusion gap is eps (pi/2 + 1/2 - pi/4)
        eps = 0.2
        lat = make_two_species("lattice", epsilon=eps, potentials=well_potentials())
        hs = make_two_species("hardsphere", epsilon=eps, potentials=well_potentials())
        dD, _ = model_difference(lat, hs, 0.3, np.array([1.0, 1.0]))
        assert dD[0, 0] == pytest.approx(eps * (PI / 2 + 0.5 - PI / 4), rel=1e-13)

    def test_lattice_hardsphere_gap_full_matrix(self):
        # entrywise against the closed-form gap of the two families
        eps = 0.15
        dv = (1.5, 1.0)
        lat = make_two_species("lattice", epsilon=eps, diffusivity=dv,
                               potentials=well_potentials())
        hs = make_two_species("hardsphere", epsilon=eps, diffusivity=dv,
                              potentials=well_potentials())
        c = hs.coeffs
        n1, n2 = 0.5, 0.5
        rng = np.random.default_rng(19)
        for _ in range(4):
            u1, u2 = rng.uniform(0.1, 1.8, size=2)
            x = rng.uniform(-0.45, 0.45)
            v1p = float(hs.potentials[0].grad(x))
            v2p = 0.0
            dD, dF = model_difference(lat, hs, x, np.array([u1, u2]))
            expD = eps * np.array(
                [
                    [dv[0] * (c.a[0] * u1 + u2 * (n2 - c.c[0])), dv[0] * u1 * (c.b[0] - n2)],
                    [dv[1] * u2 * (c.b[1] - n1), dv[1] * (c.a[1] * u2 + u1 * (n1 - c.c[1]))],
                ]
            )
            expF = eps * np.array(
                [
                    [-u1 * v1p * n1, u1 * ((c.c[0] - n2) * v1p - c.c[0] * v2p)],
                    [u2 * ((c.c[1] - n1) * v2p - c.c[1] * v1p), -u2 * v2p * n2],
                ]
            )
            assert np.allclose(dD, expD, rtol=1e-12, atol=1e-14)
            assert np.allclose(dF, expF, rtol=1e-12, atol=1e-14)

    def test_gap_is_linear_in_epsilon(self):
        rng = np.random.default_rng(23)
        u = rng.uniform(0.1, 1.5, size=2)
        for eps in (0.3, 0.12):
            lat = make_two_species("lattice", epsilon=eps, potentials=well_potentials())
            hs = make_two_species("hardsphere", epsilon=eps, potentials=well_potentials())
            lat2 = make_two_species("lattice", epsilon=eps / 2, potentials=well_potentials())
            hs2 = make_two_species("hardsphere", epsilon=eps / 2, potentials=well_potentials())
            dD, dF = model_difference(lat, hs, 0.2, u)
            dD2, dF2 = model_difference(lat2, hs2, 0.2, u)
            assert np.allclose(dD2, dD / 2, rtol=1e-12, atol=1e-15)
            assert np.allclose(dF2, dF / 2, rtol=1e-12, atol=1e-15)

    def test_gradflow_gap_is_quadratic_remainder(self):
        eps = 0.2
        dv = (1.5, 1.0)
        hs = make_two_species("hardsphere", epsilon=eps, diffusivity=dv)
        gf = make_two_species("gradflow", epsilon=eps, diffusivity=dv)
        c = hs.coeffs
        rng = np.random.default_rng(29)
        for _ in range(4):
            u1, u2 = rng.uniform(0.1, 1.5, size=2)
            dD, dF = model_difference(hs, gf, 0.0, np.array([u1, u2]))
            w = eps**2 * u1 * u2
            expected = w * np.array(
                [[-dv[0] * c.theta1, dv[0] * c.theta2], [dv[1] * c.theta1, -dv[1] * c.theta2]]
            )
            assert np.allclose(dD, expected, rtol=1e-13, atol=1e-16)
            assert np.all(dF == 0.0)

    def test_mismatched_species_counts(self):
        one = make_single_species()
        two = make_two_species("hardsphere", epsilon=0.1)
        with pytest.raises(ValueError, match="species"):
            model_difference(one, two, 0.0, np.array([1.0]))


class TestMobility:
    def test_entries(self):
        eps = 0.25
        model = make_two_species("gradflow", epsilon=eps, diffusivity=(1.5, 1.0))
        c = model.coeffs
        u1, u2 = 0.8, 1.2
        M = mobility_matrix(model, 0.0, np.array([u1, u2]))
        assert M[0, 0] == pytest.approx(1.5 * u1 * (1 - eps * c.c[0] * u2))
        assert M[0, 1] == pytest.approx(1.5 * c.c[1] * eps * u1 * u2)
        assert M[1, 0] == pytest.approx(1.0 * c.c[0] * eps * u1 * u2)
        assert M[1, 1] == pytest.approx(1.0 * u2 * (1 - c.c[1] * eps * u1))


class TestEntropy:
    def test_uniform_unperturbed_is_zero(self):
        model = make_two_species("hardsphere", epsilon=0.0)
        state = StateField(Grid(64), np.ones((2, 64)))
        assert entropy(model, state) == pytest.approx(0.0, abs=1e-15)

    def test_uniform_interaction_term(self):
        eps = 0.25
        model = make_two_species("hardsphere", epsilon=eps)
        state = StateField(Grid(64), np.ones((2, 64)))
        assert entropy(model, state) == pytest.approx(eps * PI, rel=1e-13)

    def test_nonpositive_density_names_cell(self):
        model = make_two_species("hardsphere", epsilon=0.1)
        vals = np.ones((2, 16))
        vals[1, 5] = -1e-12
        with pytest.raises(ValueError, match="cell 5"):
            entropy(model, StateField(Grid(16), vals))


def test_build_model_rejects_unknown_family():
    with pytest.raises(ValueError, match="family"):
        build_model("bogus", two_species_params(), well_potentials())
