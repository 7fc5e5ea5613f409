"""
Run Configuration

A run is described by one JSON document. This module:
1. load_config - reads a document from a path or "-" (stdin) over the
   shipped defaults in data/default_config.json
2. apply_overrides - dotted-path overrides such as hot.prep.p_e=0.25
3. parse_config - validates every field and builds a RunConfig

Every validation failure raises ConfigError with the dotted path of the
offending field, e.g. "hot.prep.c1.re: expected a number".

Atom preparations are either explicit
    {"p_e": 0.1, "c1": {"re": .., "im": ..}, "c2": {..}, "xi": {..}}
or generated from the isotherm's temperature and frequency
    {"thermal": true}
    {"thermal": true, "coherence": 1e-5, "phase": 3.14159, "xi": 1.0}

With "units": "Hz" at the document root, nu, nu1, nu2, the isotherm
frequencies and lamb are multiplied by 2 pi at load.
"""

import copy
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from atoms import AtomPrep, coherent_thermal, dephase, thermal_atoms
from carnot import FREQUENCY_LABELINGS, CycleSpec, IsothermSpec
from constants import TAIL_TOL
from errors import ConfigError, StateError
from micromaser import EngineParams

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent / "data" / "default_config.json"

UNITS = ("rad/s", "Hz")
OUTPUT_FORMATS = ("json", "csv", "text")
SWEEP_PARAMS = ("q_factor", "xi", "phase", "t_ratio")


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-9
    rel_tol: float = 1e-8
    tail_tol: float = TAIL_TOL
    t_final: Optional[float] = None
    points_per_stroke: int = 50


@dataclass(frozen=True)
class OutputSettings:
    path: Optional[str] = None
    format: Optional[str] = None
    csv_path: Optional[str] = None
    dump_state: Optional[str] = None


@dataclass(frozen=True)
class SweepSettings:
    param: Optional[str] = None
    grid: Tuple[float, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    """
    Validated run description.

    Attributes:
        engine: cavity and injection parameters
        hot, cold: the two isotherms
        nu1, nu2: corner frequencies of the hot isotherm (rad/s)
        frequency_labeling: "hot-cold" or "as-printed"
        solver, output, sweep: command settings
        document: the merged JSON document the config was built from
    """

    engine: EngineParams
    hot: IsothermSpec
    cold: IsothermSpec
    nu1: float
    nu2: float
    frequency_labeling: str
    solver: SolverSettings
    output: OutputSettings
    sweep: SweepSettings
    document: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def cycle_spec(self) -> CycleSpec:
        return CycleSpec(self.hot, self.cold, self.nu1, self.nu2, self.engine, self.frequency_labeling)


def _read_json(text: str, origin: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(origin, f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(origin, "top level must be a JSON object")
    return data


def default_document() -> Dict[str, Any]:
    """The shipped defaults, or an empty document if the file is missing."""
    if not DEFAULT_CONFIG_PATH.exists():
        logger.warning("default config missing: path=%s", DEFAULT_CONFIG_PATH)
        return {}
    with open(DEFAULT_CONFIG_PATH, "r", encoding="utf-8") as f:
        return _read_json(f.read(), str(DEFAULT_CONFIG_PATH))


def merge_documents(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; update wins, nested objects merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key != "prep":
            merged[key] = merge_documents(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(source: Optional[str] = None, use_defaults: bool = True) -> Dict[str, Any]:
    """
    Read a configuration document.

    Args:
        source: path to a JSON file, "-" for stdin, or None for defaults only
        use_defaults: merge the document over data/default_config.json

    Returns:
        the merged JSON document (not yet validated)
    """
    base = default_document() if use_defaults else {}
    if source is None:
        return base
    if source == "-":
        doc = _read_json(sys.stdin.read(), "<stdin>")
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(str(source), "config file not found")
        with open(path, "r", encoding="utf-8") as f:
            doc = _read_json(f.read(), str(source))
    logger.debug("loaded config from %s", source)
    return merge_documents(base, doc)


def parse_value(text: str) -> Any:
    """JSON value if the text parses as one, otherwise the text itself."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: Dict[str, Any], overrides: List[str]) -> Dict[str, Any]:
    """
    Apply "dotted.path=value" overrides; values are parsed as JSON when
    possible and kept as strings otherwise.
    """
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must have the form key.path=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(key, "empty path component")
        node = doc
        for depth, part in enumerate(parts[:-1]):
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            elif not isinstance(child, dict):
                raise ConfigError(".".join(parts[:depth + 1]), "is not an object, cannot set a field inside it")
            node = child
        node[parts[-1]] = parse_value(raw.strip())
    return doc


# Field readers


def _section(doc: Dict[str, Any], key: str, path: str) -> Dict[str, Any]:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(_join(path, key), "expected an object")
    return value


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _coerce_number(value: Any, where: str, allow_inf: bool = False,
                   positive: bool = False, non_negative: bool = False) -> float:
    if value is None:
        raise ConfigError(where, "required field missing")
    if isinstance(value, str) and allow_inf and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(where, f"expected a finite number, got {value}")
    if positive and not value > 0.0:
        raise ConfigError(where, f"must be positive, got {value}")
    if non_negative and value < 0.0:
        raise ConfigError(where, f"must be non-negative, got {value}")
    return value


def _number(doc: Dict[str, Any], key: str, path: str, default: Any = None, **kwargs) -> float:
    return _coerce_number(doc.get(key, default), _join(path, key), **kwargs)


def _optional_number(doc: Dict[str, Any], key: str, path: str, **kwargs) -> Optional[float]:
    if doc.get(key) is None:
        return None
    return _number(doc, key, path, **kwargs)


def _integer(doc: Dict[str, Any], key: str, path: str, default: int, minimum: int) -> int:
    where = _join(path, key)
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return int(value)


def _choice(doc: Dict[str, Any], key: str, path: str, default: str, options: Tuple[str, ...]) -> str:
    value = doc.get(key, default)
    if value not in options:
        raise ConfigError(_join(path, key), f"expected one of {list(options)}, got {value!r}")
    return value


def _optional_str(doc: Dict[str, Any], key: str, path: str) -> Optional[str]:
    value = doc.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ConfigError(_join(path, key), f"expected a string, got {value!r}")
    return value


def _complex(doc: Dict[str, Any], key: str, path: str, default: Any = None) -> complex:
    where = _join(path, key)
    value = doc.get(key, default)
    if value is None:
        raise ConfigError(where, "required field missing")
    if isinstance(value, dict):
        unknown = set(value) - {"re", "im"}
        if unknown:
            raise ConfigError(where, f"unknown keys {sorted(unknown)}")
        return complex(_number(value, "re", where, default=0.0), _number(value, "im", where, default=0.0))
    return complex(_number(doc, key, path, default=default))


# Sections


def _frequency_scale(doc: Dict[str, Any]) -> float:
    units = _choice(doc, "units", "", "rad/s", UNITS)
    return 2.0 * math.pi if units == "Hz" else 1.0


def _parse_engine(doc: Dict[str, Any], scale: float, tail_tol: float) -> EngineParams:
    path = "engine"
    section = _section(doc, "engine", "")
    known = {"nu", "q_factor", "lamb", "tau", "rate", "n_max"}
    _reject_unknown(section, known, path)
    values = dict(
        nu=scale * _number(section, "nu", path, positive=True),
        q_factor=_number(section, "q_factor", path, default="inf", allow_inf=True, positive=True),
        lamb=scale * _number(section, "lamb", path, non_negative=True),
        tau=_number(section, "tau", path, non_negative=True),
        rate=_number(section, "rate", path, non_negative=True),
        n_max=_integer(section, "n_max", path, default=60, minimum=1),
    )
    try:
        return EngineParams(tail_tol=tail_tol, **values)
    except StateError as exc:
        raise ConfigError(path, str(exc)) from exc


def _reject_unknown(section: Dict[str, Any], known: set, path: str):
    unknown = set(section) - known
    if unknown:
        raise ConfigError(path, f"unknown keys {sorted(unknown)}")


def _parse_prep(section: Dict[str, Any], path: str, T: float, nu: float) -> AtomPrep:
    if section.get("thermal"):
        _reject_unknown(section, {"thermal", "coherence", "phase", "xi"}, path)
        try:
            if "coherence" in section:
                return coherent_thermal(
                    T, nu,
                    coherence=_number(section, "coherence", path, non_negative=True),
                    phase=_number(section, "phase", path, default=math.pi),
                    xi=_complex(section, "xi", path, default=1.0),
                )
            prep = thermal_atoms(T, nu)
            if "xi" in section:
                prep = dephase(prep, _complex(section, "xi", path))
            return prep
        except StateError as exc:
            raise ConfigError(path, str(exc)) from exc

    _reject_unknown(section, {"thermal", "p_e", "c1", "c2", "xi", "label"}, path)
    p_e = _number(section, "p_e", path, non_negative=True)
    c1 = _complex(section, "c1", path)
    c2 = _complex(section, "c2", path)
    xi = _complex(section, "xi", path, default=1.0)
    try:
        return AtomPrep(p_e, c1, c2, xi, label=str(section.get("label", "phaseonium")),
                        temperature=T, nu=nu)
    except StateError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_isotherm(doc: Dict[str, Any], key: str, scale: float) -> IsothermSpec:
    section = _section(doc, key, "")
    _reject_unknown(section, {"T", "nu", "prep"}, key)
    T = _number(section, "T", key, positive=True)
    nu = scale * _number(section, "nu", key, positive=True)
    prep = _parse_prep(_section(section, "prep", key), _join(key, "prep"), T, nu)
    return IsothermSpec(T, prep, nu)


def _parse_solver(doc: Dict[str, Any]) -> SolverSettings:
    path = "solver"
    section = _section(doc, "solver", "")
    _reject_unknown(section, {"tol", "rel_tol", "tail_tol", "t_final", "points_per_stroke"}, path)
    defaults = SolverSettings()
    return SolverSettings(
        tol=_number(section, "tol", path, default=defaults.tol, positive=True),
        rel_tol=_number(section, "rel_tol", path, default=defaults.rel_tol, positive=True),
        tail_tol=_number(section, "tail_tol", path, default=defaults.tail_tol, positive=True),
        t_final=_optional_number(section, "t_final", path, non_negative=True),
        points_per_stroke=_integer(section, "points_per_stroke", path, default=defaults.points_per_stroke, minimum=2),
    )


def _parse_output(doc: Dict[str, Any]) -> OutputSettings:
    path = "output"
    section = _section(doc, "output", "")
    _reject_unknown(section, {"path", "format", "csv_path", "dump_state"}, path)
    return OutputSettings(
        path=_optional_str(section, "path", path),
        format=None if section.get("format") is None else _choice(section, "format", path, "json", OUTPUT_FORMATS),
        csv_path=_optional_str(section, "csv_path", path),
        dump_state=_optional_str(section, "dump_state", path),
    )


def _parse_sweep(doc: Dict[str, Any]) -> SweepSettings:
    path = "sweep"
    section = _section(doc, "sweep", "")
    _reject_unknown(section, {"param", "grid"}, path)
    param = section.get("param")
    if param is not None and param not in SWEEP_PARAMS:
        raise ConfigError(_join(path, "param"), f"expected one of {list(SWEEP_PARAMS)}, got {param!r}")
    raw_grid = section.get("grid", [])
    if not isinstance(raw_grid, list):
        raise ConfigError(_join(path, "grid"), "expected a list of numbers")
    grid = tuple(_coerce_number(v, f"{path}.grid[{i}]", allow_inf=True) for i, v in enumerate(raw_grid))
    return SweepSettings(param=param, grid=grid)


def parse_config(doc: Dict[str, Any]) -> RunConfig:
    """
    Validate a merged document and build the RunConfig.

    Raises:
        ConfigError: with the dotted path of the first invalid field
    """
    _reject_unknown(doc, {"units", "engine", "hot", "cold", "nu1", "nu2", "frequency_labeling",
                          "solver", "output", "sweep"}, "<root>")
    scale = _frequency_scale(doc)
    solver = _parse_solver(doc)
    engine = _parse_engine(doc, scale, solver.tail_tol)
    hot = _parse_isotherm(doc, "hot", scale)
    cold = _parse_isotherm(doc, "cold", scale)
    nu1 = scale * _number(doc, "nu1", "", positive=True)
    nu2 = scale * _number(doc, "nu2", "", positive=True)
    if not nu1 > nu2:
        raise ConfigError("nu1", f"must exceed nu2 (nu1={nu1}, nu2={nu2})")
    labeling = _choice(doc, "frequency_labeling", "", FREQUENCY_LABELINGS[0], FREQUENCY_LABELINGS)
    return RunConfig(
        engine=engine,
        hot=hot,
        cold=cold,
        nu1=nu1,
        nu2=nu2,
        frequency_labeling=labeling,
        solver=solver,
        output=_parse_output(doc),
        sweep=_parse_sweep(doc),
        document=copy.deepcopy(doc),
    )
