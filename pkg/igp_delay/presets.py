"""Built-in parameter sets and resolution of run configuration.

A run starts from a preset or a JSON parameter file; command-line flags then
override individual values.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

from .dde_sim import History
from .model import EquilibriumKind, ModelParams
from .utils.exceptions import InvalidInputError, InvalidParameterError

logger = logging.getLogger(__name__)

_BASE = dict(a0=1.0, a1=0.5, a2=1.0, a3=0.6, b0=0.75, b1=0.25, b3=0.5, c0=0.5, c1=0.15, c2=0.3)


@dataclass(frozen=True)
class Preset:
    params: ModelParams
    history: History
    eq_kind: EquilibriumKind
    description: str = ''


PRESETS: Dict[str, Preset] = {
    'example1': Preset(
        ModelParams(**_BASE),
        History(2.0, 1.0, 1.0),
        EquilibriumKind.E1,
        'Prey-only equilibrium (2, 0, 0); threshold pi/2',
    ),
    'example2': Preset(
        ModelParams(**dict(_BASE, b1=0.5)),
        History(2.0, 1.0, 1.0),
        EquilibriumKind.E2,
        'Predator-free equilibrium (1.5, 0.25, 0); threshold near 1.6573',
    ),
    'example3': Preset(
        ModelParams(**dict(_BASE, b1=1.0, c1=0.42)),
        History(0.78, 0.58, 0.06),
        EquilibriumKind.E4,
        'Coexistence equilibrium near (0.7778, 0.5778, 0.0556); threshold near 1.7438',
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidInputError(f"Unknown preset '{name}'; choose from {', '.join(sorted(PRESETS))}") from None


def load_params_file(path: str, allow_zero: bool = False) -> Dict[str, Any]:
    """
    Read a parameter file.

    The file is the flat ModelParams object, optionally with ``history``
    ([x0, y0, z0]) and ``eq`` (E1..E4) entries.

    Args:
        path: Path to the JSON file
        allow_zero: Permit zero rate constants

    Returns:
        Dict with 'params', 'history' and 'eq_kind' (the latter two may be None)
    """
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise InvalidInputError(f"Cannot read parameter file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidParameterError(f"Malformed parameter file {path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidParameterError(f"Parameter file {path} must hold a JSON object")

    history = data.pop('history', None)
    eq = data.pop('eq', None)
    if history is not None:
        if not isinstance(history, list) or len(history) != 3:
            raise InvalidParameterError("'history' must be a list [x0, y0, z0]")
        history = History(*history).validated()
    try:
        eq_kind = EquilibriumKind(eq) if eq is not None else None
    except ValueError as e:
        raise InvalidParameterError(f"Unknown equilibrium '{eq}'") from e
    return {
        'params': ModelParams.from_dict(data, allow_zero=allow_zero),
        'history': history,
        'eq_kind': eq_kind,
    }


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one command."""
    command: str
    source: str
    params: ModelParams
    history: History
    eq_kind: EquilibriumKind
    settings: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'source': self.source,
            'params': self.params.to_dict(),
            'allow_zero': self.params.allow_zero,
            'history': list(self.history),
            'eq': self.eq_kind.value,
            'settings': dict(self.settings),
        }


def resolve_config(
    command: str,
    preset: Optional[str] = None,
    params_path: Optional[str] = None,
    tau: Optional[float] = None,
    history: Optional[Sequence[float]] = None,
    eq: Optional[str] = None,
    allow_zero: bool = False,
    settings: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Build a RunConfig from a preset or parameter file plus flag overrides.

    Args:
        command: Subcommand name
        preset: Preset name (exclusive with params_path)
        params_path: JSON parameter file
        tau: Delay override
        history: Initial history override
        eq: Equilibrium override (E0..E4)
        allow_zero: Permit zero rate constants in a parameter file
        settings: Command-specific settings echoed into the sidecar

    Returns:
        Resolved RunConfig
    """
    if (preset is None) == (params_path is None):
        raise InvalidInputError("Give exactly one of a preset or a parameter file")

    if preset is not None:
        base = get_preset(preset)
        source, params, hist, kind = f'preset:{preset}', base.params, base.history, base.eq_kind
    else:
        loaded = load_params_file(params_path, allow_zero=allow_zero)
        source, params = params_path, loaded['params']
        hist = loaded['history']
        kind = loaded['eq_kind'] or EquilibriumKind.E4
        if hist is None:
            hist = History(1.0, 1.0, 1.0)

    if tau is not None:
        params = params.with_tau(tau)
    if history is not None:
        hist = History(*history).validated()
    if eq is not None:
        try:
            kind = EquilibriumKind(eq)
        except ValueError as e:
            raise InvalidInputError(f"Unknown equilibrium '{eq}'") from e

    config = RunConfig(command, source, params, hist, kind, dict(settings or {}))
    logger.debug("Resolved config: %s", config.to_dict())
    return config
