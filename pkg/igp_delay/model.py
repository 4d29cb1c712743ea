"""Delayed Lotka-Volterra intraguild-predation model.

The basal resource x grows by the delayed logistic law, the IG prey y eats x and
the IG predator z eats both::

    x' = [a0 - a1*x(t-tau) - a2*y - a3*z] * x
    y' = [-b0 + b1*x - b3*z] * y
    z' = [-c0 + c1*x + c2*y] * z
"""
import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Mapping, NamedTuple, Tuple

from .utils.exceptions import InvalidInputError, InvalidParameterError

logger = logging.getLogger(__name__)

RATE_NAMES = ('a0', 'a1', 'a2', 'a3', 'b0', 'b1', 'b3', 'c0', 'c1', 'c2')
PARAM_KEYS = RATE_NAMES + ('tau',)

# Max-norm of the vector field accepted at an existing equilibrium.
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """The ten rate constants of the model plus the delay tau.

    All rate constants must be strictly positive. ``allow_zero`` relaxes this to
    non-negative so that community-module limits (food chain, Hutchinson, ...)
    can be built; negative values are always rejected.
    """
    a0: float
    a1: float
    a2: float
    a3: float
    b0: float
    b1: float
    b3: float
    c0: float
    c1: float
    c2: float
    tau: float = 0.0
    allow_zero: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        for name in PARAM_KEYS:
            raw = getattr(self, name)
            try:
                value = float(raw)
            except (TypeError, ValueError) as e:
                raise InvalidParameterError(f"Parameter {name} is not a number: {raw!r}") from e
            if not math.isfinite(value):
                raise InvalidParameterError(f"Parameter {name} must be finite, got {value}")
            object.__setattr__(self, name, value)

        for name in RATE_NAMES:
            value = getattr(self, name)
            if value < 0 or (value == 0 and not self.allow_zero):
                raise InvalidParameterError(
                    f"Rate constant {name} must be {'non-negative' if self.allow_zero else 'positive'}, got {value}"
                )
        if self.tau < 0:
            raise InvalidParameterError(f"Delay tau must be non-negative, got {self.tau}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], allow_zero: bool = False) -> 'ModelParams':
        """
        Build parameters from the flat JSON object used as CLI config.

        Args:
            data: Mapping with the keys a0..c2 and optionally tau
            allow_zero: Permit zero rate constants

        Returns:
            Validated ModelParams
        """
        unknown = set(data) - set(PARAM_KEYS)
        if unknown:
            raise InvalidParameterError(f"Unknown parameter keys: {', '.join(sorted(unknown))}")
        missing = [name for name in RATE_NAMES if name not in data]
        if missing:
            raise InvalidParameterError(f"Missing parameter keys: {', '.join(missing)}")
        values = {name: data[name] for name in RATE_NAMES}
        values['tau'] = data.get('tau', 0.0)
        return cls(**values, allow_zero=allow_zero)

    def to_dict(self) -> Dict[str, float]:
        """Flat JSON-ready mapping with the keys a0..c2 and tau."""
        return {name: getattr(self, name) for name in PARAM_KEYS}

    def with_tau(self, tau: float) -> 'ModelParams':
        return replace(self, tau=tau)

    def rates(self) -> Tuple[float, ...]:
        """The ten rate constants in a0..c2 order."""
        return tuple(getattr(self, name) for name in RATE_NAMES)


class StateTriple(NamedTuple):
    """Densities of basal resource, IG prey and IG predator."""
    x: float
    y: float
    z: float


class EquilibriumKind(str, Enum):
    E0 = 'E0'
    E1 = 'E1'
    E2 = 'E2'
    E3 = 'E3'
    E4 = 'E4'


@dataclass(frozen=True)
class Equilibrium:
    """A labelled non-negative steady state.

    ``exists`` follows the existence theorem: every component the kind requires
    is strictly positive. ``defined`` is False when the closed form has a zero
    denominator (S = 0 for E4, or a zero rate constant in relaxed parameter sets).
    """
    kind: EquilibriumKind
    coords: Tuple[float, float, float]
    exists: bool
    defined: bool = True
    derived: Mapping[str, float] = field(default_factory=dict)

    @property
    def state(self) -> StateTriple:
        return StateTriple(*self.coords)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'coords': list(self.coords) if self.defined else None,
            'exists': self.exists,
            'defined': self.defined,
            'derived': dict(self.derived),
        }


def vector_field(rates: Tuple[float, ...], x: float, y: float, z: float, xd: float) -> Tuple[float, float, float]:
    """Right-hand side on plain floats; ``rates`` is ``ModelParams.rates()``."""
    a0, a1, a2, a3, b0, b1, b3, c0, c1, c2 = rates
    return (
        (a0 - a1 * xd - a2 * y - a3 * z) * x,
        (-b0 + b1 * x - b3 * z) * y,
        (-c0 + c1 * x + c2 * y) * z,
    )


def rhs(params: ModelParams, current: StateTriple, delayed_x: float) -> StateTriple:
    """
    Evaluate the model's vector field.

    Args:
        params: Model parameters
        current: State (x, y, z) at time t
        delayed_x: Resource density x(t - tau)

    Returns:
        Time derivatives (x', y', z')
    """
    values = tuple(current) + (delayed_x,)
    if len(values) != 4 or not all(math.isfinite(v) for v in values):
        raise InvalidInputError(f"State and delayed value must be finite, got {current!r}, {delayed_x!r}")
    if delayed_x < 0:
        raise InvalidInputError(f"Delayed resource density must be non-negative, got {delayed_x}")
    return StateTriple(*vector_field(params.rates(), *current, delayed_x))


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else math.nan


def quantities(params: ModelParams) -> Dict[str, float]:
    """
    Closed-form equilibrium quantities K, A, B, C, D, P, Q, R, S.

    Entries whose denominator vanishes (possible only with ``allow_zero``)
    are NaN.
    """
    a0, a1, a2, a3, b0, b1, b3, c0, c1, c2 = params.rates()
    return {
        'K': _ratio(a0, a1),
        'A': _ratio(b0, b1),
        'B': _ratio(a0 * b1 - a1 * b0, a2 * b1),
        'C': _ratio(c0, c1),
        'D': _ratio(a0 * c1 - a1 * c0, a3 * c1),
        'P': a0 * b3 * c2 - a2 * b3 * c0 + a3 * b0 * c2,
        'Q': -a0 * b3 * c1 + a1 * b3 * c0 - a3 * b0 * c1 + a3 * b1 * c0,
        'R': a0 * b1 * c2 - a1 * b0 * c2 + a2 * b0 * c1 - a2 * b1 * c0,
        'S': a1 * b3 * c2 - a2 * b3 * c1 + a3 * b1 * c2,
    }


def _defined(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def equilibria(params: ModelParams) -> List[Equilibrium]:
    """
    Compute all five non-negative equilibria with existence flags.

    Args:
        params: Model parameters

    Returns:
        Records for E0, E1, E2, E3, E4 in that order
    """
    q = quantities(params)
    K, A, B, C, D = q['K'], q['A'], q['B'], q['C'], q['D']
    P, Q, R, S = q['P'], q['Q'], q['R'], q['S']

    result = [Equilibrium(EquilibriumKind.E0, (0.0, 0.0, 0.0), exists=True)]

    k_ok = _defined(K)
    result.append(Equilibrium(
        EquilibriumKind.E1, (K, 0.0, 0.0), exists=k_ok, defined=k_ok, derived={'K': K},
    ))

    e2_ok = _defined(A, B)
    result.append(Equilibrium(
        EquilibriumKind.E2, (A, B, 0.0),
        exists=e2_ok and A > 0 and B > 0, defined=e2_ok,
        derived={'K': K, 'A': A, 'B': B, 'R': R},
    ))

    e3_ok = _defined(C, D)
    result.append(Equilibrium(
        EquilibriumKind.E3, (C, 0.0, D),
        exists=e3_ok and C > 0 and D > 0, defined=e3_ok,
        derived={'K': K, 'C': C, 'D': D, 'Q': Q},
    ))

    if S == 0:
        logger.debug("S = 0: positive equilibrium undefined")
        result.append(Equilibrium(
            EquilibriumKind.E4, (math.nan, math.nan, math.nan), exists=False, defined=False,
            derived={'P': P, 'Q': Q, 'R': R, 'S': S},
        ))
    else:
        coords = (P / S, Q / S, R / S)
        result.append(Equilibrium(
            EquilibriumKind.E4, coords, exists=all(c > 0 for c in coords),
            derived={'P': P, 'Q': Q, 'R': R, 'S': S},
        ))
    return result


def equilibrium(params: ModelParams, kind: EquilibriumKind) -> Equilibrium:
    """Return the single equilibrium record of the given kind."""
    kind = EquilibriumKind(kind)
    return equilibria(params)[list(EquilibriumKind).index(kind)]


def residual(params: ModelParams, eq: Equilibrium) -> float:
    """Max-norm of the vector field at an equilibrium (delayed x equal to x*)."""
    if not eq.defined:
        return math.nan
    x, y, z = eq.coords
    return max(abs(v) for v in vector_field(params.rates(), x, y, z, x))


def community_module(params: ModelParams) -> str:
    """
    Name the community module a (possibly relaxed) parameter set reduces to.

    Returns:
        One of 'hutchinson', 'food-chain', 'exploitative-competition',
        'apparent-competition' or 'intraguild-predation'
    """
    if params.a2 == 0 and params.a3 == 0:
        return 'hutchinson'
    if params.a3 == 0 and params.c1 == 0:
        return 'food-chain'
    if params.b3 == 0 and params.c2 == 0:
        return 'exploitative-competition'
    if params.a2 == 0 and params.b1 == 0:
        return 'apparent-competition'
    return 'intraguild-predation'


def hutchinson_threshold(a0: float) -> float:
    """Delay pi/(2*a0) past which the delayed logistic equation oscillates."""
    if not a0 > 0:
        raise InvalidParameterError(f"a0 must be positive, got {a0}")
    return math.pi / (2.0 * a0)
