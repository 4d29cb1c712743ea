"""Linearization, characteristic quasi-polynomials and tau = 0 verdicts.

Around an equilibrium (x*, y*, z*) the model linearizes to
``X'(t) = M0 X(t) + M1 X(t - tau)`` where only the (1,1) entry of M1,
``-a1 x*``, is nonzero. The characteristic function is
``det(lambda I - M0 - M1 exp(-lambda tau))``.
"""
import math
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .model import Equilibrium, EquilibriumKind, ModelParams, quantities
from .utils.exceptions import InvalidInputError, NotApplicableError, UndefinedEquilibriumError

logger = logging.getLogger(__name__)

# Label for E4 results when S > 0 but b >= 0.
OUTSIDE_SUFFICIENT = 'outside sufficient condition S>0, b<0'


@dataclass(frozen=True)
class Criterion:
    """A named inequality together with the value it tests and its outcome."""
    name: str
    value: float
    holds: bool

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'value': self.value, 'holds': self.holds}


@dataclass(frozen=True)
class Linearization:
    m0: np.ndarray
    m1: np.ndarray

    def determinant(self, lam: complex, tau: float) -> complex:
        """det(lambda I - M0 - M1 exp(-lambda tau)) evaluated directly."""
        mat = lam * np.eye(3) - self.m0 - self.m1 * np.exp(-lam * tau)
        return complex(np.linalg.det(mat))


@dataclass(frozen=True)
class QuasiPolynomial:
    """
    Single-delay characteristic function

        lambda^n + p[0] lambda^(n-1) + ... + p[n-1]
            + (q[0] lambda^(n-1) + ... + q[n-1]) exp(-lambda tau)

    ``p`` and ``q`` hold the coefficients highest degree first; both have
    length n. The characteristic functions of the model are cubic (n = 3);
    lower degrees appear for the delay-carrying factors at E1, E2 and E3.
    """
    p: Tuple[float, ...]
    q: Tuple[float, ...]
    tau: float = 0.0

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        q = tuple(float(v) for v in self.q)
        if not p or len(p) != len(q):
            raise InvalidInputError(f"p and q must be non-empty and of equal length, got {len(p)} and {len(q)}")
        if not all(math.isfinite(v) for v in p + q + (float(self.tau),)):
            raise InvalidInputError("Quasi-polynomial coefficients must be finite")
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'tau', float(self.tau))

    @property
    def degree(self) -> int:
        return len(self.p)

    @property
    def monic(self) -> np.ndarray:
        return np.concatenate(([1.0], self.p))

    @property
    def delayed(self) -> np.ndarray:
        return np.asarray(self.q)

    @property
    def has_delay(self) -> bool:
        return any(v != 0 for v in self.q)

    def with_tau(self, tau: float) -> 'QuasiPolynomial':
        return replace(self, tau=tau)

    def value(self, lam):
        """Evaluate the characteristic function; vectorised over ``lam``."""
        lam = np.asarray(lam, dtype=complex)
        return np.polyval(self.monic, lam) + np.polyval(self.delayed, lam) * np.exp(-lam * self.tau)

    def derivative(self, lam):
        """d/dlambda of the characteristic function, including the -tau q(lambda) term."""
        lam = np.asarray(lam, dtype=complex)
        q_val = np.polyval(self.delayed, lam)
        dq_val = np.polyval(np.polyder(self.delayed), lam) if self.degree > 1 else 0.0
        return np.polyval(np.polyder(self.monic), lam) + (dq_val - self.tau * q_val) * np.exp(-lam * self.tau)

    def delay_free(self) -> np.ndarray:
        """Coefficients of the tau = 0 polynomial, highest degree first."""
        return self.monic + np.concatenate(([0.0], self.q))

    def coefficient_scale(self) -> float:
        return float(sum(abs(v) for v in self.p + self.q))

    def to_dict(self) -> Dict[str, Any]:
        return {'p': list(self.p), 'q': list(self.q), 'tau': self.tau}


@dataclass(frozen=True)
class Tau0Verdict:
    stable_at_tau0: bool
    criteria: List[Criterion]
    eigenvalues: Tuple[complex, ...] = ()
    note: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'stable_at_tau0': self.stable_at_tau0,
            'criteria': [c.to_dict() for c in self.criteria],
            'eigenvalues': [[z.real, z.imag] for z in self.eigenvalues],
            'note': self.note,
        }


def _require_linearizable(eq: Equilibrium) -> None:
    if not eq.defined:
        raise UndefinedEquilibriumError(f"{eq.kind.value} is undefined for these parameters")
    if not (eq.exists or eq.kind in (EquilibriumKind.E0, EquilibriumKind.E1)):
        raise NotApplicableError(f"{eq.kind.value} does not exist for these parameters", failing='exists')


def linearize(params: ModelParams, eq: Equilibrium) -> Linearization:
    """
    Build the non-delayed and delayed Jacobian blocks at an equilibrium.

    Args:
        params: Model parameters
        eq: Equilibrium to linearize about

    Returns:
        Linearization with 3x3 matrices m0 and m1
    """
    _require_linearizable(eq)
    a0, a1, a2, a3, b0, b1, b3, c0, c1, c2 = params.rates()
    x, y, z = eq.coords
    m0 = np.array([
        [a0 - a1 * x - a2 * y - a3 * z, -a2 * x, -a3 * x],
        [b1 * y, -b0 + b1 * x - b3 * z, -b3 * y],
        [c1 * z, c2 * z, -c0 + c1 * x + c2 * y],
    ])
    m1 = np.zeros((3, 3))
    m1[0, 0] = -a1 * x
    return Linearization(m0, m1)


def e4_coefficients(params: ModelParams) -> Dict[str, float]:
    """
    The coefficients a, b, c, d of the characteristic function at E4,
    lambda^3 + a lambda + b + (c lambda^2 + d) exp(-lambda tau).
    """
    a0, a1, a2, a3, b0, b1, b3, c0, c1, c2 = params.rates()
    qs = quantities(params)
    P, Q, R, S = qs['P'], qs['Q'], qs['R'], qs['S']
    if S == 0:
        raise UndefinedEquilibriumError("E4 is undefined: S = 0")
    return {
        'a': (P * Q * a2 * b1 + P * R * a3 * c1 + Q * R * b3 * c2) / S ** 2,
        'b': P * Q * R * (a3 * b1 * c2 - a2 * b3 * c1) / S ** 3,
        'c': a1 * P / S,
        'd': P * Q * R * a1 * b3 * c2 / S ** 3,
    }


def boundary_coefficients(params: ModelParams, kind: EquilibriumKind) -> Dict[str, float]:
    """
    Quadratic-factor data at E2 (bbar, cbar) or E3 (btilde, ctilde), returned
    under the common names 'b' and 'c', plus the delay-free root 'r' of the
    split-off linear factor.
    """
    a0, a1, a2, a3, b0, b1, b3, c0, c1, c2 = params.rates()
    qs = quantities(params)
    if kind == EquilibriumKind.E2:
        return {'b': a1 * qs['A'], 'c': a2 * b0 * qs['B'], 'r': qs['R'] / (a2 * b1)}
    if kind == EquilibriumKind.E3:
        return {'b': a1 * qs['C'], 'c': a3 * c0 * qs['D'], 'r': qs['Q'] / (a3 * c1)}
    raise InvalidInputError(f"No quadratic factor for {kind}")


def static_roots(params: ModelParams, eq: Equilibrium) -> List[float]:
    """Roots of the delay-free linear factors that split off the characteristic function."""
    _require_linearizable(eq)
    a0, a1, a2, a3, b0, b1, b3, c0, c1, c2 = params.rates()
    qs = quantities(params)
    if eq.kind == EquilibriumKind.E0:
        return [a0, -b0, -c0]
    if eq.kind == EquilibriumKind.E1:
        return [b1 * a2 * qs['B'] / a1, c1 * a3 * qs['D'] / a1]
    if eq.kind in (EquilibriumKind.E2, EquilibriumKind.E3):
        return [boundary_coefficients(params, eq.kind)['r']]
    return []


def hopf_factor(params: ModelParams, eq: Equilibrium) -> QuasiPolynomial:
    """
    The factor of the characteristic function that carries the delay.

    E1: lambda + a0 exp(-lambda tau); E2/E3: lambda^2 + b lambda exp(-lambda tau) + c;
    E0 and E4: the full characteristic function.
    """
    _require_linearizable(eq)
    if eq.kind == EquilibriumKind.E1:
        return QuasiPolynomial((0.0,), (params.a0,), params.tau)
    if eq.kind in (EquilibriumKind.E2, EquilibriumKind.E3):
        coeffs = boundary_coefficients(params, eq.kind)
        return QuasiPolynomial((0.0, coeffs['c']), (coeffs['b'], 0.0), params.tau)
    return char_poly(params, eq)


def char_poly(params: ModelParams, eq: Equilibrium) -> QuasiPolynomial:
    """
    Assemble the cubic characteristic quasi-polynomial at an equilibrium.

    The product forms are expanded exactly: the delay-carrying factor of
    ``hopf_factor`` times the linear factors of ``static_roots``.

    Args:
        params: Model parameters
        eq: Equilibrium

    Returns:
        QuasiPolynomial with p = (p2, p1, p0), q = (q2, q1, q0) and tau = params.tau
    """
    _require_linearizable(eq)
    tau = params.tau
    if eq.kind == EquilibriumKind.E4:
        co = e4_coefficients(params)
        return QuasiPolynomial((0.0, co['a'], co['b']), (co['c'], 0.0, co['d']), tau)
    if eq.kind == EquilibriumKind.E0:
        p = np.poly(static_roots(params, eq))[1:]
        return QuasiPolynomial(tuple(p), (0.0, 0.0, 0.0), tau)

    factor = hopf_factor(params, eq)
    cofactor = np.poly(static_roots(params, eq))
    p = np.polymul(factor.monic, cofactor)[1:]
    q = np.polymul(factor.delayed, cofactor)
    q = np.concatenate((np.zeros(3 - len(q)), q))
    return QuasiPolynomial(tuple(p), tuple(q), tau)


def _routh_hurwitz_cubic(co: Dict[str, float]) -> List[Criterion]:
    a, b, c, d = co['a'], co['b'], co['c'], co['d']
    return [
        Criterion('a > 0', a, a > 0),
        Criterion('c > 0', c, c > 0),
        Criterion('b+d > 0', b + d, b + d > 0),
        Criterion('ac-(b+d) > 0', a * c - (b + d), a * c - (b + d) > 0),
    ]


def tau0_stability(params: ModelParams, eq: Equilibrium) -> Tau0Verdict:
    """
    Local stability of an equilibrium in the delay-free system.

    Args:
        params: Model parameters
        eq: An existing equilibrium

    Returns:
        Tau0Verdict listing every inequality that decides the verdict
    """
    if not eq.exists:
        raise NotApplicableError(f"{eq.kind.value} does not exist; no stability verdict", failing='exists')
    qs = quantities(params)
    note = None

    if eq.kind == EquilibriumKind.E0:
        criteria = [Criterion('a0 < 0', params.a0, False)]
    elif eq.kind == EquilibriumKind.E1:
        K, A, C = qs['K'], qs['A'], qs['C']
        criteria = [Criterion('A > K', A - K, A > K), Criterion('C > K', C - K, C > K)]
        if A == K or C == K:
            note = 'marginal, not classified'
    elif eq.kind == EquilibriumKind.E2:
        co = boundary_coefficients(params, eq.kind)
        criteria = [
            Criterion('R < 0', qs['R'], qs['R'] < 0),
            Criterion('bbar > 0', co['b'], co['b'] > 0),
            Criterion('cbar > 0', co['c'], co['c'] > 0),
        ]
    elif eq.kind == EquilibriumKind.E3:
        co = boundary_coefficients(params, eq.kind)
        criteria = [
            Criterion('Q < 0', qs['Q'], qs['Q'] < 0),
            Criterion('btilde > 0', co['b'], co['b'] > 0),
            Criterion('ctilde > 0', co['c'], co['c'] > 0),
        ]
    else:
        S = qs['S']
        co = e4_coefficients(params)
        if S < 0:
            criteria = [Criterion('S > 0', S, False)]
        elif co['b'] < 0:
            criteria = [Criterion('S > 0', S, True), Criterion('b < 0', co['b'], True)]
            criteria += _routh_hurwitz_cubic(co)
        else:
            criteria = [Criterion('S > 0', S, True)] + _routh_hurwitz_cubic(co)
            note = OUTSIDE_SUFFICIENT

    stable = all(c.holds for c in criteria)
    eigenvalues = tuple(complex(z) for z in np.roots(char_poly(params, eq).delay_free()))
    logger.debug("tau=0 verdict for %s: stable=%s", eq.kind.value, stable)
    return Tau0Verdict(stable, criteria, eigenvalues, note)
