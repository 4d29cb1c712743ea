"""Method-of-steps integration of the delayed model from a constant history.

The step is dt = tau/m, so every delayed lookup x(t - tau) needed by a
classical RK4 step falls either on a stored node or on the midpoint of a
stored step; the midpoint comes from the cubic Hermite interpolant of that
step.
"""
import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, NamedTuple, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.signal import find_peaks

from .model import Equilibrium, ModelParams, vector_field
from .utils.exceptions import DivergenceError, InvalidInputError, InvalidStepError

logger = logging.getLogger(__name__)

MIN_STEPS_PER_DELAY = 20
DEFAULT_STEPS_PER_DELAY = 40
DEFAULT_DT_NO_DELAY = 0.01
BLOWUP = 1e12
UNDERSHOOT_TOL = 1e-12

TOL_CONV = 1e-3
TOL_OSC = 0.05
TRANSIENT_FRACTION = 0.8
PERIOD_VARIATION = 0.05


class History(NamedTuple):
    """Constant initial function (x0, y0, z0) on [-tau, 0]."""
    x0: float
    y0: float
    z0: float

    def validated(self) -> 'History':
        values = tuple(float(v) for v in self)
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise InvalidInputError(f"History must be finite and non-negative, got {tuple(self)}")
        return History(*values)


class EndState(str, Enum):
    CONVERGED = 'converged'
    OSCILLATING = 'oscillating'
    DIVERGED = 'diverged'
    UNDECIDED = 'undecided'


@dataclass(frozen=True)
class Trajectory:
    """Solution on the uniform grid t_i = i*dt.

    ``derivs`` holds the vector field at every node, which together with
    ``states`` defines the piecewise cubic Hermite dense output.
    """
    t: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    tau: float
    dt: float
    clamped: int = 0
    diverged: bool = False

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def dense(self) -> CubicHermiteSpline:
        """Dense output over the whole run."""
        return CubicHermiteSpline(self.t, self.states, self.derivs, axis=0)

    def window(self, transient_fraction: float) -> Tuple[np.ndarray, np.ndarray]:
        """Grid times and states after the leading ``transient_fraction`` of the run."""
        start = int(math.floor(transient_fraction * (len(self.t) - 1)))
        return self.t[start:], self.states[start:]

    def to_rows(self, stride: int = 1) -> Iterator[Tuple[float, float, float, float]]:
        if stride < 1:
            raise InvalidInputError(f"stride must be at least 1, got {stride}")
        for i in range(0, len(self.t), stride):
            x, y, z = self.states[i]
            yield float(self.t[i]), float(x), float(y), float(z)


def resolve_step(tau: float, dt: Optional[float] = None) -> Tuple[float, int]:
    """
    Validate the step size against the delay.

    Args:
        tau: Delay
        dt: Requested step, or None for the default

    Returns:
        (dt, m) where dt = tau/m exactly; m = 0 when tau = 0
    """
    if tau == 0:
        dt = DEFAULT_DT_NO_DELAY if dt is None else float(dt)
        if not dt > 0:
            raise InvalidStepError(f"dt must be positive, got {dt}")
        return dt, 0
    if dt is None:
        return tau / DEFAULT_STEPS_PER_DELAY, DEFAULT_STEPS_PER_DELAY
    if not dt > 0:
        raise InvalidStepError(f"dt must be positive, got {dt}")
    m = int(round(tau / dt))
    if m < 1 or abs(m * dt - tau) > 1e-9 * tau:
        raise InvalidStepError(f"dt={dt} does not divide tau={tau} into equal steps")
    if m < MIN_STEPS_PER_DELAY:
        raise InvalidStepError(f"dt={dt} gives {m} steps per delay; need at least {MIN_STEPS_PER_DELAY}")
    return tau / m, m


def integrate(
    params: ModelParams,
    history: History,
    t_end: float,
    dt: Optional[float] = None,
    raise_on_divergence: bool = True,
) -> Trajectory:
    """
    Integrate the model forward with fixed-step RK4.

    Args:
        params: Model parameters (params.tau is the delay)
        history: Constant history on [-tau, 0]
        t_end: Final time
        dt: Step size; must be tau/m with integer m >= 20 when tau > 0
        raise_on_divergence: Raise DivergenceError on blow-up instead of
            returning the truncated trajectory flagged ``diverged``

    Returns:
        Trajectory on the grid 0, dt, ..., n*dt <= t_end
    """
    history = History(*history).validated()
    if not (math.isfinite(t_end) and t_end > 0):
        raise InvalidInputError(f"t_end must be positive, got {t_end}")
    tau = params.tau
    dt, m = resolve_step(tau, dt)
    n = int(math.floor(t_end / dt + 1e-9))
    if n < 1:
        raise InvalidInputError(f"t_end={t_end} is shorter than one step dt={dt}")

    rates = params.rates()
    h = dt
    half = 0.5 * h
    x_hist = history.x0

    x, y, z = history
    xs, ys, zs = [x], [y], [z]
    fx, fy, fz = [], [], []
    clamped = 0
    diverged = False

    for i in range(n):
        if m == 0:
            k1 = vector_field(rates, x, y, z, x)
            x2, y2, z2 = x + half * k1[0], y + half * k1[1], z + half * k1[2]
            k2 = vector_field(rates, x2, y2, z2, x2)
            x3, y3, z3 = x + half * k2[0], y + half * k2[1], z + half * k2[2]
            k3 = vector_field(rates, x3, y3, z3, x3)
            x4, y4, z4 = x + h * k3[0], y + h * k3[1], z + h * k3[2]
            k4 = vector_field(rates, x4, y4, z4, x4)
        else:
            j = i - m
            if j < 0:
                # the lagged step lies inside the constant history
                xd0 = xd_mid = xd1 = x_hist
            else:
                xd0, xd1 = xs[j], xs[j + 1]
                xd_mid = 0.5 * (xd0 + xd1) + 0.125 * h * (fx[j] - fx[j + 1])
            k1 = vector_field(rates, x, y, z, xd0)
            k2 = vector_field(rates, x + half * k1[0], y + half * k1[1], z + half * k1[2], xd_mid)
            k3 = vector_field(rates, x + half * k2[0], y + half * k2[1], z + half * k2[2], xd_mid)
            k4 = vector_field(rates, x + h * k3[0], y + h * k3[1], z + h * k3[2], xd1)

        fx.append(k1[0])
        fy.append(k1[1])
        fz.append(k1[2])
        x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        z += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])

        if x < 0 or y < 0 or z < 0:
            clamped += sum(v < -UNDERSHOOT_TOL for v in (x, y, z))
            x, y, z = max(x, 0.0), max(y, 0.0), max(z, 0.0)
        if not (abs(x) < BLOWUP and abs(y) < BLOWUP and abs(z) < BLOWUP):
            if raise_on_divergence:
                raise DivergenceError(f"State exceeded {BLOWUP:g} at t={(i + 1) * h:.6g}")
            logger.warning("Divergence at t=%.6g (tau=%.6g); trajectory truncated", (i + 1) * h, tau)
            diverged = True
            break

        xs.append(x)
        ys.append(y)
        zs.append(z)

    # derivative at the last stored node
    last = len(xs) - 1
    if m == 0:
        xd_last = xs[last]
    else:
        j = last - m
        xd_last = x_hist if j < 0 else xs[j]
    f_last = vector_field(rates, xs[last], ys[last], zs[last], xd_last)
    fx, fy, fz = fx[:last], fy[:last], fz[:last]
    fx.append(f_last[0])
    fy.append(f_last[1])
    fz.append(f_last[2])

    if clamped:
        logger.warning("Clamped %d negative undershoots below %g (tau=%.6g)", clamped, -UNDERSHOOT_TOL, tau)

    return Trajectory(
        t=np.arange(last + 1) * h,
        states=np.column_stack((xs, ys, zs)),
        derivs=np.column_stack((fx, fy, fz)),
        tau=tau,
        dt=h,
        clamped=clamped,
        diverged=diverged,
    )


@dataclass(frozen=True)
class Oscillation:
    """Per-component oscillation measures over a trailing window."""
    peak_to_peak: Tuple[float, float, float]
    maximum: Tuple[float, float, float]
    periods: Tuple[Optional[float], Optional[float], Optional[float]]
    period_variation: Tuple[Optional[float], Optional[float], Optional[float]]

    def to_dict(self) -> Dict[str, object]:
        return {
            'peak_to_peak': list(self.peak_to_peak),
            'maximum': list(self.maximum),
            'periods': list(self.periods),
            'period_variation': list(self.period_variation),
        }


def _period(t: np.ndarray, series: np.ndarray) -> Tuple[Optional[float], Optional[float]]:
    spread = float(np.ptp(series))
    if spread <= 0:
        return None, None
    peaks, _ = find_peaks(series, prominence=0.1 * spread)
    if len(peaks) < 3:
        return None, None
    gaps = np.diff(t[peaks])
    mean = float(np.mean(gaps))
    return mean, float((gaps.max() - gaps.min()) / mean)


def measure_oscillation(traj: Trajectory, transient_fraction: float = TRANSIENT_FRACTION) -> Oscillation:
    """
    Amplitude and period of each component after the transient.

    The period is the mean spacing of successive maxima in the window.
    """
    if not 0 < transient_fraction < 1:
        raise InvalidInputError(f"transient_fraction must lie in (0, 1), got {transient_fraction}")
    t, states = traj.window(transient_fraction)
    ptp = tuple(float(v) for v in np.ptp(states, axis=0))
    maximum = tuple(float(v) for v in np.max(states, axis=0))
    measured = [_period(t, states[:, k]) for k in range(3)]
    return Oscillation(
        peak_to_peak=ptp,
        maximum=maximum,
        periods=tuple(p for p, _ in measured),
        period_variation=tuple(v for _, v in measured),
    )


def classify_endstate(
    traj: Trajectory,
    eq: Equilibrium,
    transient_fraction: float = TRANSIENT_FRACTION,
    tol_conv: float = TOL_CONV,
    tol_osc: float = TOL_OSC,
) -> EndState:
    """
    Classify the long-time behaviour of a trajectory relative to an equilibrium.

    Args:
        traj: Completed trajectory
        eq: Reference equilibrium
        transient_fraction: Leading share of the run ignored
        tol_conv: Max-norm deviation accepted as convergence
        tol_osc: Peak-to-peak amplitude required for oscillation

    Returns:
        converged, oscillating, diverged or undecided
    """
    if traj.diverged:
        return EndState.DIVERGED
    if not 0 < transient_fraction < 1:
        raise InvalidInputError(f"transient_fraction must lie in (0, 1), got {transient_fraction}")

    _, states = traj.window(transient_fraction)
    deviation = float(np.max(np.abs(states - np.asarray(eq.coords))))
    if deviation < tol_conv:
        return EndState.CONVERGED

    osc = measure_oscillation(traj, transient_fraction)
    k = int(np.argmax(osc.peak_to_peak))
    variation = osc.period_variation[k]
    if osc.peak_to_peak[k] > tol_osc and variation is not None and variation < PERIOD_VARIATION:
        return EndState.OSCILLATING

    logger.warning("Undecided end state (tau=%.6g): deviation %.3g, amplitude %.3g",
                   traj.tau, deviation, osc.peak_to_peak[k])
    return EndState.UNDECIDED
