"""Analytical Hopf thresholds for the equilibria E1..E4.

Each ``hopf_*`` function checks the hypotheses under which the equilibrium is
stable at tau = 0 and loses stability through a pair of imaginary roots, then
returns the first crossing delay, its frequency and the crossing direction.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .model import EquilibriumKind, ModelParams, equilibrium, quantities
from .stability import (
    OUTSIDE_SUFFICIENT,
    Criterion,
    QuasiPolynomial,
    boundary_coefficients,
    char_poly,
    e4_coefficients,
    hopf_factor,
    tau0_stability,
)
from .utils.cubic import cubic_slope, cubic_value, real_cubic_roots
from .utils.exceptions import IGPDelayError, InvalidCrossingError, NotApplicableError

logger = logging.getLogger(__name__)

K_MAX = 5
CROSSING_RESIDUAL_TOL = 1e-8
TIE_TOL = 1e-9
# |h'(u)| below this (relative to the coefficient scale) marks a repeated root
DOUBLE_ROOT_TOL = 1e-9

STATUS_THEOREM = 'theorem'
STATUS_ABSOLUTE = 'absolutely-stable'
STATUS_UNKNOWN = 'unknown'


@dataclass(frozen=True)
class HopfReport:
    """Crossing data for one equilibrium.

    ``tau_critical`` and ``omega`` are None when no crossing exists
    (status 'absolutely-stable') or could not be established ('unknown').
    """
    eq_kind: EquilibriumKind
    tau_critical: Optional[float]
    omega: Optional[float]
    tau_sequence: Tuple[float, ...]
    transversality_sign: Optional[int]
    hypotheses: List[Criterion]
    status: str = STATUS_THEOREM
    flags: Tuple[str, ...] = ()
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def stable_interval(self) -> Tuple[float, float]:
        if self.tau_critical is None:
            return (0.0, math.inf)
        return (0.0, self.tau_critical)

    @property
    def absolutely_stable(self) -> bool:
        return self.status == STATUS_ABSOLUTE

    def to_dict(self) -> Dict[str, Any]:
        lo, hi = self.stable_interval
        return {
            'eq_kind': self.eq_kind.value,
            'tau_critical': STATUS_ABSOLUTE if self.absolutely_stable else self.tau_critical,
            'omega': self.omega,
            'tau_sequence': list(self.tau_sequence),
            'transversality_sign': self.transversality_sign,
            'stable_interval': [lo, None if math.isinf(hi) else hi],
            'hypotheses': [h.to_dict() for h in self.hypotheses],
            'status': self.status,
            'flags': list(self.flags),
            'details': self.details,
        }


def _sign(value: float) -> int:
    return (value > 0) - (value < 0)


def _check(hypotheses: List[Criterion], kind: EquilibriumKind) -> None:
    for h in hypotheses:
        if not h.holds:
            raise NotApplicableError(
                f"{kind.value}: hypothesis '{h.name}' fails (value {h.value:.6g})",
                hypotheses=hypotheses, failing=h.name,
            )


def crossing_direction(qp: QuasiPolynomial, omega: float, tau: float) -> int:
    """
    Sign of d(Re lambda)/d tau where lambda = i*omega is a root at delay tau.

    Args:
        qp: Characteristic function (its own tau is ignored)
        omega: Crossing frequency
        tau: Crossing delay

    Returns:
        +1 when the root moves into the right half-plane, -1 when it moves out
    """
    at = qp.with_tau(tau)
    lam = 1j * omega
    res = abs(complex(at.value(lam)))
    if not res < CROSSING_RESIDUAL_TOL:
        raise InvalidCrossingError(f"(i*{omega:.10g}, tau={tau:.10g}) is not a root: residual {res:.3g}")

    if at.degree == 3 and at.p[0] == 0 and at.q[1] == 0:
        a, c, d = at.p[1], at.q[0], at.q[2]
        alpha, beta = -2.0 * a - c * c, a * a + 2.0 * c * d
        w2 = omega * omega
        return _sign(3.0 * w2 * w2 + 2.0 * alpha * w2 + beta)
    if at.degree == 2 and at.p[0] == 0 and at.q[1] == 0:
        b, c = at.q[0], at.p[1]
        return _sign(2.0 * omega * omega - b * b - 2.0 * c)

    # implicit differentiation: d(lambda)/d(tau) = lambda q(lambda) e^{-lambda tau} / chi'(lambda)
    delayed = complex(np.polyval(at.delayed, lam) * np.exp(-lam * tau))
    slope = lam * delayed / complex(at.derivative(lam))
    return _sign(slope.real)


def hopf_E1(params: ModelParams, k_max: int = K_MAX) -> HopfReport:
    """
    Hopf threshold at E1 = (K, 0, 0).

    Requires A > K and C > K. The delayed factor lambda + a0 exp(-lambda tau)
    crosses at omega = a0 when a0 tau = pi/2 + 2 pi k.
    """
    qs = quantities(params)
    hypotheses = [
        Criterion('A > K', qs['A'] - qs['K'], qs['A'] > qs['K']),
        Criterion('C > K', qs['C'] - qs['K'], qs['C'] > qs['K']),
    ]
    _check(hypotheses, EquilibriumKind.E1)

    omega = params.a0
    tau_c = math.pi / (2.0 * params.a0)
    sequence = tuple((math.pi / 2.0 + 2.0 * math.pi * k) / omega for k in range(k_max))
    qp = hopf_factor(params, equilibrium(params, EquilibriumKind.E1))
    sign = crossing_direction(qp, omega, tau_c)
    return HopfReport(
        EquilibriumKind.E1, tau_c, omega, sequence, sign, hypotheses,
        details={'a0': params.a0},
    )


def _hopf_quadratic(params: ModelParams, kind: EquilibriumKind, k_max: int) -> HopfReport:
    eq = equilibrium(params, kind)
    qs = quantities(params)
    if kind == EquilibriumKind.E2:
        hypotheses = [
            Criterion('B > 0', qs['B'], eq.exists),
            Criterion('R < 0', qs['R'], qs['R'] < 0),
        ]
    else:
        hypotheses = [
            Criterion('D > 0', qs['D'], eq.exists),
            Criterion('Q < 0', qs['Q'], qs['Q'] < 0),
        ]
    _check(hypotheses, kind)

    co = boundary_coefficients(params, kind)
    b, c = co['b'], co['c']
    s = b * b + 2.0 * c
    discriminant = s * s - 4.0 * c * c
    root = math.sqrt(discriminant)
    mu_plus = math.sqrt(0.5 * (s + root))
    mu_minus = math.sqrt(0.5 * (s - root))

    tau_c = math.pi / (2.0 * mu_plus)
    # cot(mu tau) = 0 candidates; the sine equation keeps every other one
    sequence = tuple((2 * k + 1) * math.pi / (2.0 * mu_plus) for k in range(k_max))
    plus_crossings = [(math.pi / 2.0 + 2.0 * math.pi * k) / mu_plus for k in range(k_max)]
    minus_crossings = [(3.0 * math.pi / 2.0 + 2.0 * math.pi * k) / mu_minus for k in range(k_max)]

    qp = hopf_factor(params, eq)
    sign = crossing_direction(qp, mu_plus, tau_c)
    return HopfReport(
        kind, tau_c, mu_plus, sequence, sign, hypotheses,
        details={
            'b': b,
            'c': c,
            'discriminant': discriminant,
            'mu_plus': mu_plus,
            'mu_minus': mu_minus,
            'tau_mu_plus': tau_c,
            'tau_mu_minus': math.pi / (2.0 * mu_minus),
            'crossings_plus': plus_crossings,
            'crossings_minus': minus_crossings,
        },
    )


def hopf_E2(params: ModelParams, k_max: int = K_MAX) -> HopfReport:
    """Hopf threshold at E2 = (A, B, 0); requires E2 to exist and R < 0."""
    return _hopf_quadratic(params, EquilibriumKind.E2, k_max)


def hopf_E3(params: ModelParams, k_max: int = K_MAX) -> HopfReport:
    """Hopf threshold at E3 = (C, 0, D); requires E3 to exist and Q < 0."""
    return _hopf_quadratic(params, EquilibriumKind.E3, k_max)


def crossing_angle(co: Dict[str, float], omega: float) -> Optional[float]:
    """
    The angle omega*tau in [0, 2 pi) solving both real and imaginary parts of
    the E4 characteristic equation at lambda = i*omega, or None when the
    delayed coefficient c omega^2 - d vanishes.
    """
    a, b, c, d = co['a'], co['b'], co['c'], co['d']
    den = c * omega * omega - d
    if den == 0:
        return None
    # cos(theta) = b/den and sin(theta) = (omega^3 - a omega)/den
    theta = math.atan2((omega ** 3 - a * omega) / den, b / den)
    return theta % (2.0 * math.pi)


def hopf_E4(params: ModelParams, k_max: int = K_MAX) -> HopfReport:
    """
    Hopf threshold at the positive equilibrium E4.

    Requires E4 to exist with S > 0 and b < 0. Squaring the real and
    imaginary parts at lambda = i*omega gives h(u) = u^3 + alpha u^2 + beta u + gamma
    with u = omega^2; every positive root of h yields a sequence of crossing
    delays and the smallest first delay is the threshold.

    When S > 0 but b >= 0 the same computation runs if E4 is stable at
    tau = 0, and the report is labelled as outside the sufficient condition.

    Args:
        params: Model parameters
        k_max: Number of crossing delays reported in the sequence

    Returns:
        HopfReport for E4
    """
    eq = equilibrium(params, EquilibriumKind.E4)
    qs = quantities(params)
    hypotheses = [
        Criterion('E4 exists', min(eq.coords) if eq.defined else 0.0, eq.exists),
        Criterion('S > 0', qs['S'], qs['S'] > 0),
    ]
    _check(hypotheses, EquilibriumKind.E4)

    co = e4_coefficients(params)
    a, b, c, d = co['a'], co['b'], co['c'], co['d']
    hypotheses.append(Criterion('b < 0', b, b < 0))
    status = STATUS_THEOREM
    if b >= 0:
        verdict = tau0_stability(params, eq)
        if not verdict.stable_at_tau0:
            raise NotApplicableError(
                "E4: hypothesis 'b < 0' fails and E4 is unstable at tau = 0",
                hypotheses=hypotheses + verdict.criteria, failing='b < 0',
            )
        status = OUTSIDE_SUFFICIENT

    alpha = -2.0 * a - c * c
    beta = a * a + 2.0 * c * d
    gamma = b * b - d * d
    details: Dict[str, Any] = dict(co, alpha=alpha, beta=beta, gamma=gamma)
    crit = alpha * alpha - 3.0 * beta
    if crit >= 0:
        details['u_minus'] = (-alpha - math.sqrt(crit)) / 3.0
        details['u_plus'] = (-alpha + math.sqrt(crit)) / 3.0

    scale = 1.0 + abs(alpha) + abs(beta) + abs(gamma)
    positive = []
    for u in real_cubic_roots(alpha, beta, gamma):
        if u > 0 and not (positive and abs(u - positive[-1]) <= DOUBLE_ROOT_TOL * scale):
            positive.append(u)
    candidates = []
    for u in positive:
        omega = math.sqrt(u)
        theta = crossing_angle(co, omega)
        if theta is None:
            continue
        candidates.append({
            'u': u,
            'omega': omega,
            'tau0': theta / omega,
            'h': cubic_value(u, alpha, beta, gamma),
            'h_prime': cubic_slope(u, alpha, beta),
        })
    details['roots'] = candidates

    if not positive and status == STATUS_THEOREM:
        raise IGPDelayError("internal: h(u) has no positive root although gamma < 0")
    if not candidates:
        # absolutely stable only when h has no positive root
        return HopfReport(
            EquilibriumKind.E4, None, None, (), None, hypotheses,
            status=STATUS_UNKNOWN if positive else STATUS_ABSOLUTE, details=details,
        )

    flags = []
    best = min(candidates, key=lambda r: r['tau0'])
    ties = [r for r in candidates if abs(r['tau0'] - best['tau0']) <= TIE_TOL]
    if len(ties) > 1:
        best = max(ties, key=lambda r: r['omega'])
        flags.append('near-degenerate')
        logger.warning("E4: %d roots of h give the same first delay %.12g", len(ties), best['tau0'])

    omega0, tau0 = best['omega'], best['tau0']
    sequence = tuple(tau0 + 2.0 * math.pi * k / omega0 for k in range(k_max))
    if abs(best['h_prime']) <= DOUBLE_ROOT_TOL * scale:
        flags.append('non-simple crossing')
        sign = None
    else:
        sign = crossing_direction(char_poly(params, eq), omega0, tau0)
    details['u0'] = best['u']

    return HopfReport(
        EquilibriumKind.E4, tau0, omega0, sequence, sign, hypotheses,
        status=status, flags=tuple(flags), details=details,
    )


HOPF_BY_KIND = {
    EquilibriumKind.E1: hopf_E1,
    EquilibriumKind.E2: hopf_E2,
    EquilibriumKind.E3: hopf_E3,
    EquilibriumKind.E4: hopf_E4,
}


def hopf_report(params: ModelParams, kind: EquilibriumKind, k_max: int = K_MAX) -> HopfReport:
    """Dispatch to the threshold computation for ``kind`` (E1..E4)."""
    kind = EquilibriumKind(kind)
    if kind not in HOPF_BY_KIND:
        raise NotApplicableError(f"{kind.value} is unstable for every delay; no threshold", failing='a0 < 0')
    return HOPF_BY_KIND[kind](params, k_max)


def hopf_reports(params: ModelParams, k_max: int = K_MAX) -> Dict[str, Any]:
    """All applicable reports keyed by equilibrium kind; failures become not-applicable entries."""
    result: Dict[str, Any] = {}
    for kind in HOPF_BY_KIND:
        try:
            result[kind.value] = hopf_report(params, kind, k_max).to_dict()
        except NotApplicableError as e:
            result[kind.value] = {
                'status': 'not-applicable',
                'reason': str(e),
                'failing': e.failing,
                'hypotheses': [h.to_dict() for h in e.hypotheses],
            }
    return result
