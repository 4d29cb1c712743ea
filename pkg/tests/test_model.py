import math

import pytest

from igp_delay.model import (
    EquilibriumKind,
    ModelParams,
    StateTriple,
    community_module,
    equilibria,
    equilibrium,
    hutchinson_threshold,
    quantities,
    residual,
    rhs,
)
from igp_delay.utils.exceptions import InvalidInputError, InvalidParameterError

BASE = dict(a0=1.0, a1=0.5, a2=1.0, a3=0.6, b0=0.75, b1=0.25, b3=0.5, c0=0.5, c1=0.15, c2=0.3)


class TestModelParams:
    def test_rejects_non_positive_rate(self):
        with pytest.raises(InvalidParameterError):
            ModelParams(**dict(BASE, a2=0.0))
        with pytest.raises(InvalidParameterError):
            ModelParams(**dict(BASE, c0=-0.1))

    def test_rejects_negative_delay_and_nan(self):
        with pytest.raises(InvalidParameterError):
            ModelParams(**BASE, tau=-1.0)
        with pytest.raises(InvalidParameterError):
            ModelParams(**dict(BASE, b3=math.nan))

    def test_allow_zero_relaxes_only_zero(self):
        params = ModelParams(**dict(BASE, a2=0.0, a3=0.0), allow_zero=True)
        assert params.a2 == 0.0
        with pytest.raises(InvalidParameterError):
            ModelParams(**dict(BASE, a2=-1.0), allow_zero=True)

    def test_from_dict(self):
        params = ModelParams.from_dict(dict(BASE, tau=1.5))
        assert params.tau == 1.5
        assert params.to_dict()['c2'] == 0.3
        with pytest.raises(InvalidParameterError, match='Unknown'):
            ModelParams.from_dict(dict(BASE, a4=1.0))
        with pytest.raises(InvalidParameterError, match='Missing'):
            ModelParams.from_dict({k: v for k, v in BASE.items() if k != 'b0'})
        with pytest.raises(InvalidParameterError):
            ModelParams.from_dict(dict(BASE, a0='fast'))

    def test_with_tau_keeps_rates(self, example1):
        shifted = example1.with_tau(2.0)
        assert shifted.tau == 2.0
        assert shifted.rates() == example1.rates()


class TestRhs:
    def test_vanishes_at_equilibria(self, example3):
        for eq in equilibria(example3):
            if eq.defined:
                assert residual(example3, eq) < 1e-10

    def test_delay_enters_only_the_resource_equation(self, example1):
        now = StateTriple(1.0, 0.5, 0.2)
        a = rhs(example1, now, 1.0)
        b = rhs(example1, now, 1.5)
        assert a.x - b.x == pytest.approx(example1.a1 * 0.5 * 1.0)
        assert a.y == b.y
        assert a.z == b.z

    def test_rejects_bad_state(self, example1):
        with pytest.raises(InvalidInputError):
            rhs(example1, StateTriple(math.inf, 0.0, 0.0), 1.0)
        with pytest.raises(InvalidInputError):
            rhs(example1, StateTriple(1.0, 0.0, 0.0), -0.5)


class TestEquilibria:
    def test_example1(self, example1):
        e0, e1, e2, e3, e4 = equilibria(example1)
        assert e0.coords == (0.0, 0.0, 0.0) and e0.exists
        assert e1.coords == pytest.approx((2.0, 0.0, 0.0))
        assert e1.exists
        assert not e2.exists
        assert not e3.exists
        assert not e4.exists

    def test_example2_boundary_equilibrium(self, example2):
        e2 = equilibrium(example2, EquilibriumKind.E2)
        assert e2.exists
        assert e2.coords == pytest.approx((1.5, 0.25, 0.0))
        assert e2.derived['R'] == pytest.approx(-0.1)

    def test_example3_interior_equilibrium(self, example3):
        e4 = equilibrium(example3, EquilibriumKind.E4)
        assert e4.exists
        assert e4.coords == pytest.approx((0.7778, 0.5778, 0.0556), abs=5e-4)
        qs = quantities(example3)
        assert qs['P'] == pytest.approx(0.035)
        assert qs['Q'] == pytest.approx(0.026)
        assert qs['R'] == pytest.approx(0.0025)
        assert qs['S'] == pytest.approx(0.045)

    def test_interior_undefined_when_s_vanishes(self):
        # a1 b3 c2 - a2 b3 c1 + a3 b1 c2 = 0.0625 - 0.125 + 0.0625, exact in binary
        params = ModelParams(**dict(BASE, a1=0.5, a2=1.0, a3=1.0, b1=0.25, b3=0.5, c1=0.25, c2=0.25))
        assert quantities(params)['S'] == 0.0
        e4 = equilibrium(params, EquilibriumKind.E4)
        assert not e4.defined
        assert not e4.exists
        assert e4.to_dict()['coords'] is None

    def test_existence_matches_positive_coordinates(self, param_draw):
        for _ in range(1000):
            params = param_draw()
            for eq in equilibria(params)[1:]:
                if eq.defined:
                    needed = [c for c in eq.coords if c != 0.0]
                    assert eq.exists == all(c > 0 for c in needed)

    def test_boundary_existence_against_carrying_capacity(self, param_draw):
        for _ in range(1000):
            params = param_draw()
            q = quantities(params)
            assert (q['B'] > 0) == (q['A'] < q['K'])
            assert (q['D'] > 0) == (q['C'] < q['K'])

    def test_interior_sign_coherence(self, param_draw):
        seen = set()
        for _ in range(5000):
            params = param_draw()
            if not equilibrium(params, EquilibriumKind.E4).exists:
                continue
            q = quantities(params)
            signs = {math.copysign(1.0, q[k]) for k in ('P', 'Q', 'R', 'S')}
            assert len(signs) == 1, q
            seen |= signs
        assert seen


class TestCommunityModules:
    def test_names(self):
        def relaxed(**zeros):
            return ModelParams(**dict(BASE, **zeros), allow_zero=True)

        assert community_module(relaxed(a2=0.0, a3=0.0)) == 'hutchinson'
        assert community_module(relaxed(a3=0.0, c1=0.0)) == 'food-chain'
        assert community_module(relaxed(b3=0.0, c2=0.0)) == 'exploitative-competition'
        assert community_module(relaxed(a2=0.0, b1=0.0)) == 'apparent-competition'
        assert community_module(ModelParams(**BASE)) == 'intraguild-predation'

    def test_hutchinson_threshold(self):
        assert hutchinson_threshold(1.0) == pytest.approx(math.pi / 2)
        assert hutchinson_threshold(2.0) == pytest.approx(math.pi / 4)
        with pytest.raises(InvalidParameterError):
            hutchinson_threshold(0.0)
