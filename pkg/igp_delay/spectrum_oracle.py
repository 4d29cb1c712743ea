"""Brute-force characteristic-root finder used to cross-check the closed forms.

Roots are found by Newton iteration from a rectangular grid of seeds in the
upper half-plane, so the search is a numerical heuristic: it does not count
roots and can in principle miss one outside the seeded box.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .stability import QuasiPolynomial
from .utils.exceptions import InvalidInputError, NoCrossingError

logger = logging.getLogger(__name__)

GRID_SIZE = 40
MAX_NEWTON_ITER = 60
STEP_TOL = 1e-12
ACCEPT_TOL = 1e-10
DEDUP_RADIUS = 1e-6
TAU_XTOL = 1e-10

QPBuilder = Union[QuasiPolynomial, Callable[[float], QuasiPolynomial]]


@dataclass(frozen=True)
class RootEstimate:
    """A characteristic root with its absolute residual at delay ``tau``."""
    lam: complex
    residual: float
    tau: float


def eval_char(qp: QuasiPolynomial, lam: complex) -> complex:
    """
    Evaluate p(lambda) + q(lambda) e^{-lambda tau}, e.g. for the interior
    equilibrium lambda^3 + a lambda^2 + b lambda + (c lambda^2 + d) e^{-lambda tau}.

    Args:
        qp: Quasi-polynomial (carries its own tau)
        lam: Point in the complex plane

    Returns:
        Value of the characteristic function
    """
    return complex(qp.value(lam))


def seed_grid(qp: QuasiPolynomial, size: int = GRID_SIZE) -> np.ndarray:
    """Newton seeds on Re in [-L, L], Im in [0, 4L] with L = 1 + sum of |coefficients|."""
    bound = 1.0 + qp.coefficient_scale()
    re = np.linspace(-bound, bound, size)
    im = np.linspace(0.0, 4.0 * bound, size)
    grid = re[:, None] + 1j * im[None, :]
    return grid.ravel()


def _newton(qp: QuasiPolynomial, z: np.ndarray) -> np.ndarray:
    active = np.ones(z.shape, dtype=bool)
    with np.errstate(all='ignore'):
        for _ in range(MAX_NEWTON_ITER):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            zi = z[idx]
            step = qp.value(zi) / qp.derivative(zi)
            z[idx] = zi - step
            done = ~np.isfinite(step) | (np.abs(step) < STEP_TOL)
            active[idx[done]] = False
    return z


def _dedupe(candidates: np.ndarray) -> List[complex]:
    kept: List[complex] = []
    for lam in candidates:
        if all(abs(lam - other) > DEDUP_RADIUS for other in kept):
            kept.append(complex(lam))
    return kept


def rightmost_roots(qp: QuasiPolynomial, n: int = 1) -> List[RootEstimate]:
    """
    Locate the n characteristic roots with the largest real part.

    Only roots with Im >= 0 are returned; conjugates are implied.

    Args:
        qp: Quasi-polynomial
        n: Number of roots to return

    Returns:
        Up to n RootEstimates sorted by decreasing real part (empty if no seed converged)
    """
    if n < 1:
        raise InvalidInputError(f"n must be at least 1, got {n}")

    z = _newton(qp, seed_grid(qp))
    with np.errstate(all='ignore'):
        residual = np.abs(qp.value(z))
        # residual relative to the size of the polynomial and delayed terms
        magnitude = np.maximum(1.0, np.maximum(
            np.abs(z) ** qp.degree,
            np.abs(np.polyval(qp.delayed, z) * np.exp(-z * qp.tau)),
        ))
        ok = np.isfinite(z) & np.isfinite(residual) & (residual < ACCEPT_TOL * magnitude)
    roots = z[ok].real + 1j * np.abs(z[ok].imag)
    if roots.size == 0:
        logger.warning("No Newton seed converged for %s", qp.to_dict())
        return []

    # deterministic order regardless of seed order: by real part, then imaginary part, descending
    order = np.lexsort((-roots.imag, -roots.real))
    unique = _dedupe(roots[order])
    logger.debug("tau=%.6g: %d distinct roots from %d converged seeds", qp.tau, len(unique), roots.size)
    return [
        RootEstimate(lam, float(abs(qp.value(lam))), qp.tau)
        for lam in unique[:n]
    ]


def _builder(qp_builder: QPBuilder) -> Callable[[float], QuasiPolynomial]:
    if isinstance(qp_builder, QuasiPolynomial):
        return qp_builder.with_tau
    return qp_builder


def rightmost_real_part(qp: QuasiPolynomial) -> float:
    roots = rightmost_roots(qp, 1)
    if not roots:
        raise NoCrossingError(f"No characteristic root found at tau={qp.tau}")
    return roots[0].lam.real


def find_crossing(qp_builder: QPBuilder, tau_lo: float, tau_hi: float) -> Tuple[float, float]:
    """
    Bracket the delay at which the rightmost root crosses the imaginary axis.

    Args:
        qp_builder: Quasi-polynomial, or a callable tau -> QuasiPolynomial
        tau_lo: Lower end of the delay bracket
        tau_hi: Upper end of the delay bracket

    Returns:
        (tau_star, omega_star): crossing delay and the imaginary part of the crossing root
    """
    build = _builder(qp_builder)
    if not 0 <= tau_lo < tau_hi:
        raise InvalidInputError(f"Need 0 <= tau_lo < tau_hi, got [{tau_lo}, {tau_hi}]")

    def rightmost(tau: float) -> float:
        return rightmost_real_part(build(tau))

    lo_val, hi_val = rightmost(tau_lo), rightmost(tau_hi)
    if lo_val * hi_val > 0:
        raise NoCrossingError(
            f"Rightmost real part has the same sign at tau={tau_lo} ({lo_val:.3g}) and tau={tau_hi} ({hi_val:.3g})"
        )
    tau_star = brentq(rightmost, tau_lo, tau_hi, xtol=TAU_XTOL)
    omega_star = abs(rightmost_roots(build(tau_star), 1)[0].lam.imag)
    logger.debug("Crossing at tau=%.12g, omega=%.12g", tau_star, omega_star)
    return tau_star, omega_star


def track(qp_builder: QPBuilder, taus: Iterable[float], n: int = 1) -> List[RootEstimate]:
    """Rightmost roots at every delay of a grid, in grid order."""
    build = _builder(qp_builder)
    rows: List[RootEstimate] = []
    for tau in taus:
        rows.extend(rightmost_roots(build(float(tau)), n))
    return rows
