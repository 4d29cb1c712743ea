import math
from typing import List

import numpy as np

THIRD = 1.0 / 3.0


def _polish(u: float, a2: float, a1: float, a0: float) -> float:
    """One Newton step on u^3 + a2 u^2 + a1 u + a0."""
    h = cubic_value(u, a2, a1, a0)
    dh = cubic_slope(u, a2, a1)
    if dh == 0:
        return u
    polished = u - h / dh
    # near a double root the step can overshoot
    return polished if abs(cubic_value(polished, a2, a1, a0)) <= abs(h) else u


def real_cubic_roots(a2: float, a1: float, a0: float) -> List[float]:
    """
    Real roots of the monic cubic u^3 + a2 u^2 + a1 u + a0, in closed form.

    Uses the trigonometric form when all three roots are real and Cardano's
    formula otherwise; every root gets one Newton polishing step.

    Args:
        a2, a1, a0: Coefficients below the leading one

    Returns:
        Real roots sorted ascending (repeated roots appear repeatedly)
    """
    a13 = a2 * THIRD
    f = THIRD * a1 - a13 * a13
    g = a13 * (2.0 * a13 * a13 - a1) + a0
    h = 0.25 * g * g + f * f * f

    if f == 0 and g == 0:
        roots = [-a13] * 3
    elif h <= 0:
        j = math.sqrt(-f)
        k = math.acos(min(1.0, max(-1.0, -0.5 * g / (j * j * j))))
        roots = [2.0 * j * math.cos((k + 2.0 * math.pi * m) * THIRD) - a13 for m in range(3)]
    else:
        sqrt_h = math.sqrt(h)
        s = float(np.cbrt(-0.5 * g + sqrt_h))
        v = float(np.cbrt(-0.5 * g - sqrt_h))
        roots = [s + v - a13]

    return sorted(_polish(u, a2, a1, a0) for u in roots)


def cubic_value(u: float, a2: float, a1: float, a0: float) -> float:
    return ((u + a2) * u + a1) * u + a0


def cubic_slope(u: float, a2: float, a1: float) -> float:
    return (3.0 * u + 2.0 * a2) * u + a1
