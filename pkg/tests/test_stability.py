import numpy as np
import pytest

from igp_delay.model import EquilibriumKind, ModelParams, equilibria, equilibrium, quantities
from igp_delay.stability import (
    OUTSIDE_SUFFICIENT,
    QuasiPolynomial,
    char_poly,
    e4_coefficients,
    hopf_factor,
    linearize,
    static_roots,
    tau0_stability,
)
from igp_delay.utils.exceptions import InvalidInputError, NotApplicableError, UndefinedEquilibriumError

SAMPLE_POINTS = (0.3 + 0.7j, -0.4 + 1.9j, 1.1 - 0.2j)


def assert_matches_determinant(params, eq, tau=0.8):
    lin = linearize(params, eq)
    qp = char_poly(params, eq).with_tau(tau)
    for lam in SAMPLE_POINTS:
        assert complex(qp.value(lam)) == pytest.approx(lin.determinant(lam, tau), rel=1e-9, abs=1e-12)


class TestQuasiPolynomial:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            QuasiPolynomial((1.0, 2.0), (1.0,))
        with pytest.raises(InvalidInputError):
            QuasiPolynomial((np.inf,), (1.0,))

    def test_hutchinson_factor_root(self):
        qp = QuasiPolynomial((0.0,), (1.0,), tau=np.pi / 2)
        assert abs(complex(qp.value(1j))) < 1e-12

    def test_derivative_matches_finite_difference(self):
        qp = QuasiPolynomial((0.3, 0.2, 0.1), (0.5, 0.0, 0.05), tau=1.3)
        lam, h = 0.2 + 0.9j, 1e-6
        numeric = (qp.value(lam + h) - qp.value(lam - h)) / (2 * h)
        assert complex(qp.derivative(lam)) == pytest.approx(complex(numeric), rel=1e-6)

    def test_delay_free(self):
        qp = QuasiPolynomial((0.0, 1.0, 2.0), (3.0, 0.0, 4.0))
        np.testing.assert_allclose(qp.delay_free(), [1.0, 3.0, 1.0, 6.0])
        assert qp.has_delay
        assert not QuasiPolynomial((1.0,), (0.0,)).has_delay


class TestCharacteristicFunction:
    def test_matches_determinant_for_examples(self, example1, example2, example3):
        assert_matches_determinant(example1, equilibrium(example1, EquilibriumKind.E0))
        assert_matches_determinant(example1, equilibrium(example1, EquilibriumKind.E1))
        assert_matches_determinant(example2, equilibrium(example2, EquilibriumKind.E2))
        assert_matches_determinant(example3, equilibrium(example3, EquilibriumKind.E3))
        assert_matches_determinant(example3, equilibrium(example3, EquilibriumKind.E4))

    def test_matches_determinant_for_random_interior(self, interior_draw):
        for _ in range(200):
            params = interior_draw()
            assert_matches_determinant(params, equilibrium(params, EquilibriumKind.E4))

    def test_matches_determinant_at_random_points(self, rng, param_draw):
        kinds = set()
        for _ in range(300):
            params = param_draw()
            tau = float(rng.uniform(0.0, 3.0))
            for eq in equilibria(params):
                if not eq.exists:
                    continue
                kinds.add(eq.kind)
                lin = linearize(params, eq)
                qp = char_poly(params, eq).with_tau(tau)
                lams = rng.uniform(-1.0, 2.0, 20) + 1j * rng.uniform(-3.0, 3.0, 20)
                for lam in lams:
                    assert complex(qp.value(lam)) == pytest.approx(lin.determinant(lam, tau), rel=1e-9, abs=1e-9)
        assert {EquilibriumKind.E1, EquilibriumKind.E2, EquilibriumKind.E3} <= kinds

    def test_factorization_at_boundary(self, example1):
        eq = equilibrium(example1, EquilibriumKind.E1)
        assert static_roots(example1, eq) == pytest.approx([-0.25, -0.2])
        factor = hopf_factor(example1, eq)
        assert factor.p == (0.0,)
        assert factor.q == (example1.a0,)

    def test_example3_coefficients(self, example3):
        co = e4_coefficients(example3)
        assert co['b'] == pytest.approx(-7.4897e-4, rel=1e-3)
        assert co['c'] == pytest.approx(0.5 * 0.035 / 0.045)

    def test_b_plus_d_identity(self, interior_draw):
        for _ in range(1000):
            params = interior_draw()
            qs = quantities(params)
            if abs(qs['S']) < 1e-6:
                continue
            co = e4_coefficients(params)
            expected = qs['P'] * qs['Q'] * qs['R'] / qs['S'] ** 2
            assert co['b'] + co['d'] == pytest.approx(expected, rel=1e-8, abs=1e-14)

    def test_undefined_interior(self):
        params = ModelParams(a0=1.0, a1=0.5, a2=1.0, a3=1.0, b0=0.75, b1=0.25, b3=0.5, c0=0.5, c1=0.25, c2=0.25)
        with pytest.raises(UndefinedEquilibriumError):
            char_poly(params, equilibrium(params, EquilibriumKind.E4))

    def test_missing_equilibrium_not_linearizable(self, example1):
        with pytest.raises(NotApplicableError):
            char_poly(example1, equilibrium(example1, EquilibriumKind.E2))


class TestTau0Stability:
    def test_trivial_is_unstable(self, example1):
        verdict = tau0_stability(example1, equilibrium(example1, EquilibriumKind.E0))
        assert not verdict.stable_at_tau0
        assert max(z.real for z in verdict.eigenvalues) == pytest.approx(example1.a0)

    def test_examples(self, example1, example2, example3):
        assert tau0_stability(example1, equilibrium(example1, EquilibriumKind.E1)).stable_at_tau0
        assert tau0_stability(example2, equilibrium(example2, EquilibriumKind.E2)).stable_at_tau0
        verdict = tau0_stability(example3, equilibrium(example3, EquilibriumKind.E4))
        assert verdict.stable_at_tau0
        assert {c.name for c in verdict.criteria} >= {'S > 0', 'b < 0', 'ac-(b+d) > 0'}
        assert max(z.real for z in verdict.eigenvalues) < 0

    def test_missing_equilibrium(self, example1):
        with pytest.raises(NotApplicableError):
            tau0_stability(example1, equilibrium(example1, EquilibriumKind.E4))

    def test_marginal_prey_only(self, example1):
        # A = b0/b1 = K = 2
        params = ModelParams(**dict(example1.to_dict(), b0=0.5))
        verdict = tau0_stability(params, equilibrium(params, EquilibriumKind.E1))
        assert not verdict.stable_at_tau0
        assert verdict.note == 'marginal, not classified'

    def test_verdict_agrees_with_eigenvalues(self, param_draw, interior_draw):
        checked = 0
        for i in range(1000):
            params = interior_draw() if i % 2 else param_draw()
            for eq in equilibria(params)[1:]:
                if not eq.exists:
                    continue
                verdict = tau0_stability(params, eq)
                lin = linearize(params, eq)
                rightmost = max(np.linalg.eigvals(lin.m0 + lin.m1).real)
                if abs(rightmost) < 1e-9:
                    continue
                if verdict.note == OUTSIDE_SUFFICIENT or verdict.note is None:
                    assert verdict.stable_at_tau0 == (rightmost < 0), (params, eq.kind)
                checked += 1
        assert checked > 1000
