"""Bifurcation diagram over the delay.

For every delay on a grid the equilibrium's stability comes from the
analytical threshold, and the periodic orbit born at the Hopf point is
measured by a long simulation started next to the equilibrium.
"""
import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .critical_delay import hopf_report
from .dde_sim import (
    DEFAULT_STEPS_PER_DELAY,
    TOL_CONV,
    TOL_OSC,
    TRANSIENT_FRACTION,
    EndState,
    History,
    classify_endstate,
    integrate,
    measure_oscillation,
)
from .model import Equilibrium, EquilibriumKind, ModelParams, equilibrium
from .utils.exceptions import InvalidInputError, NotApplicableError

logger = logging.getLogger(__name__)

GROWTH_POINTS = 5
GROWTH_NOISE = 0.10
COMMON_PERIOD_TOL = 0.05


@dataclass(frozen=True)
class SimulationSettings:
    """Per-point simulation settings for a sweep."""
    t_end: float = 1500.0
    t_end_near: float = 3000.0
    # delays within this relative distance of the threshold use t_end_near
    near_band: float = 0.05
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY
    seed_offset: float = 0.01
    transient_fraction: float = TRANSIENT_FRACTION
    tol_conv: float = TOL_CONV
    tol_osc: float = TOL_OSC
    workers: int = 1

    def horizon(self, tau: float, tau_critical: Optional[float]) -> float:
        if tau_critical is not None and abs(tau - tau_critical) <= self.near_band * tau_critical:
            return self.t_end_near
        return self.t_end


@dataclass(frozen=True)
class BranchPoint:
    tau: float
    eq_stable: bool
    classification: EndState
    amplitude: Tuple[float, float, float]
    maximum: Tuple[float, float, float]
    period: Optional[float] = None
    periods: Tuple[Optional[float], ...] = (None, None, None)

    def common_period(self, tol: float = COMMON_PERIOD_TOL) -> bool:
        """True when all three components report periods agreeing pairwise within ``tol``."""
        if any(p is None for p in self.periods):
            return False
        lo, hi = min(self.periods), max(self.periods)
        return (hi - lo) / lo <= tol


@dataclass(frozen=True)
class BranchDiagram:
    eq_kind: EquilibriumKind
    points: List[BranchPoint]
    hopf_tau: Optional[float]
    hopf_source: str = ''

    @property
    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.points])

    def to_rows(self) -> List[Tuple[Any, ...]]:
        return [
            (p.tau, int(p.eq_stable), p.classification.value, *p.amplitude,
             '' if p.period is None else p.period)
            for p in self.points
        ]


@dataclass(frozen=True)
class GrowthCheck:
    passed: bool
    offending_tau: Optional[float] = None
    message: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return {'passed': self.passed, 'offending_tau': self.offending_tau, 'message': self.message}


def _simulate_point(job: Tuple[ModelParams, Equilibrium, float, Optional[float], SimulationSettings]) -> BranchPoint:
    params, eq, tau, tau_critical, cfg = job
    history = History(*(c * (1.0 + cfg.seed_offset) for c in eq.coords))
    dt = tau / cfg.steps_per_delay if tau > 0 else None
    traj = integrate(params.with_tau(tau), history, cfg.horizon(tau, tau_critical), dt, raise_on_divergence=False)
    state = classify_endstate(traj, eq, cfg.transient_fraction, cfg.tol_conv, cfg.tol_osc)
    eq_stable = tau_critical is None or tau < tau_critical

    if state in (EndState.CONVERGED, EndState.DIVERGED):
        logger.info("tau=%.4f: %s", tau, state.value)
        return BranchPoint(tau, eq_stable, state, (0.0, 0.0, 0.0), tuple(float(c) for c in eq.coords))

    osc = measure_oscillation(traj, cfg.transient_fraction)
    logger.info("tau=%.4f: %s, amplitude x=%.4g", tau, state.value, osc.peak_to_peak[0])
    return BranchPoint(
        tau, eq_stable, state, osc.peak_to_peak, osc.maximum,
        period=osc.periods[0], periods=osc.periods,
    )


def sweep(
    params: ModelParams,
    eq_kind: EquilibriumKind,
    tau_grid: Sequence[float],
    sim_cfg: Optional[SimulationSettings] = None,
) -> BranchDiagram:
    """
    Sweep the delay across a grid and record stability and oscillation amplitude.

    Args:
        params: Model parameters (tau is ignored)
        eq_kind: Equilibrium to follow (E1..E4)
        tau_grid: Strictly increasing non-negative delays
        sim_cfg: Simulation settings

    Returns:
        BranchDiagram with one point per grid delay, in grid order
    """
    cfg = sim_cfg or SimulationSettings()
    grid = [float(t) for t in tau_grid]
    if not grid or grid[0] < 0 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInputError("tau grid must be non-empty, non-negative and strictly increasing")

    eq = equilibrium(params, eq_kind)
    if not eq.exists:
        raise NotApplicableError(f"{eq.kind.value} does not exist for these parameters", failing='exists')
    report = hopf_report(params, eq.kind)
    tau_critical = report.tau_critical

    jobs = [(params, eq, tau, tau_critical, cfg) for tau in grid]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            points = list(pool.map(_simulate_point, jobs))
    else:
        points = [_simulate_point(job) for job in jobs]

    return BranchDiagram(eq.kind, points, tau_critical, hopf_source=f'analytical {eq.kind.value} threshold')


def amplitude_growth_check(
    diagram: BranchDiagram,
    tol_osc: float = TOL_OSC,
    n_above: int = GROWTH_POINTS,
    noise: float = GROWTH_NOISE,
) -> GrowthCheck:
    """
    Check a sweep around the Hopf delay: no diverged point anywhere, no
    oscillation below the delay, and a positive, locally nondecreasing x
    amplitude just above it.

    Args:
        diagram: Sweep result spanning the Hopf delay
        tol_osc: Amplitude treated as zero below the threshold
        n_above: Number of grid points above the threshold examined
        noise: Relative decrease tolerated between consecutive points

    Returns:
        GrowthCheck with the first offending delay on failure
    """
    hopf = diagram.hopf_tau
    taus = diagram.taus
    if hopf is None or not (taus[0] < hopf < taus[-1]):
        raise InvalidInputError(f"tau grid [{taus[0]}, {taus[-1]}] does not span the Hopf delay {hopf}")

    for p in diagram.points:
        if p.classification == EndState.DIVERGED:
            return GrowthCheck(False, p.tau, "simulation diverged")
        if p.tau < hopf and max(p.amplitude) > tol_osc:
            return GrowthCheck(False, p.tau, f"amplitude {max(p.amplitude):.4g} below the Hopf delay")

    above = [p for p in diagram.points if p.tau > hopf][:n_above]
    previous = None
    for p in above:
        amp = p.amplitude[0]
        if not amp > 0:
            return GrowthCheck(False, p.tau, "zero amplitude above the Hopf delay")
        if previous is not None and amp < (1.0 - noise) * previous:
            return GrowthCheck(False, p.tau, f"amplitude dropped from {previous:.4g} to {amp:.4g}")
        previous = amp
    return GrowthCheck(True, message=f"{len(above)} points above the Hopf delay grow")


def summarize(diagram: BranchDiagram, check: Optional[GrowthCheck] = None) -> Dict[str, Any]:
    """JSON summary of a sweep: threshold, first unstable delay, growth check and amplitudes."""
    unstable = [p.tau for p in diagram.points if not p.eq_stable]
    above = [p for p in diagram.points if diagram.hopf_tau is not None and p.tau > diagram.hopf_tau]
    return {
        'eq_kind': diagram.eq_kind.value,
        'hopf_tau': diagram.hopf_tau,
        'hopf_source': diagram.hopf_source,
        'first_unstable_tau': unstable[0] if unstable else None,
        'growth_check': check.to_dict() if check is not None else None,
        'common_period': {
            repr(p.tau): p.common_period() for p in above if p.classification == EndState.OSCILLATING
        },
        'points': [
            {
                'tau': p.tau,
                'class': p.classification.value,
                'peak_to_peak': list(p.amplitude),
                'maximum': list(p.maximum),
                'period': None if p.period is None or math.isnan(p.period) else p.period,
            }
            for p in diagram.points
        ],
    }
