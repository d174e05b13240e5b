"""
Scenario documents.

A scenario is a flat YAML mapping, one `key: value` per line, values carrying
SI suffixes where they have units. Parsing is strict: unknown, duplicate or
nested keys are errors that name the offending line.
"""
import math
import pathlib
import yaml
import logManager
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, List, Optional, Tuple
from configManager import units
from functions.errors import ScenarioError

logging = logManager.logger.get_logger(__name__)

PRESET_DIR = pathlib.Path(__file__).resolve().parent / "presets"
PRESET_SUFFIX = ".scenario"

KINDS = ("focused_image", "z2_sweep", "hbt")
METHODS = ("montecarlo", "analytic", "both")
PROFILES = ("uniform", "gaussian")
MASKS = ("double_slit", "pinhole_pair", "single_slit", "single_point", "uniform", "opaque")
NULL_SPELLINGS = ("", "~", "null", "none")
MAX_SEED = 2 ** 64 - 1

# key -> value type; the order here is the order of the normalized dump
KEYS: Dict[str, Any] = {
    "kind": KINDS,
    "method": METHODS,
    "seed": "int",
    "output": "str",
    "wavelength": "length",
    "source_profile": PROFILES,
    "source_half_width": "length",
    "coherence_time": "time",
    "z1": "length",
    "z2": "length",
    "z2_min": "length",
    "z2_max": "length",
    "z2_steps": "int",
    "mask": MASKS,
    "slit_width": "length",
    "slit_separation": "length",
    "pinhole_d1": "length",
    "pinhole_d2": "length",
    "pinhole_separation": "length",
    "feature_center": "length",
    "n_realizations": "int",
    "n_batches": "int",
    "threads": "int",
    "detector_aperture": "length",
    "scan_step": "length",
    "detector_points": "int",
    "x2_half_window": "length",
    "duration": "time",
    "dt": "time",
    "bin_width": "time",
    "tac_window": "time",
    "start_rate": "rate",
    "stop_rate": "rate",
    "jitter_start": "time",
    "jitter_stop": "time",
    "dead_time": "time",
    "tac_delay": "time",
    "independent_stop": "bool",
}

REQUIRED = {
    "focused_image": ("wavelength", "source_half_width", "z1", "mask"),
    "z2_sweep": ("wavelength", "source_half_width", "z1", "z2_min", "z2_max", "z2_steps", "mask"),
    "hbt": ("duration", "bin_width", "tac_window", "start_rate", "stop_rate"),
}

MASK_PARAMETERS = {
    "double_slit": ("slit_width", "slit_separation"),
    "pinhole_pair": ("pinhole_d1", "pinhole_d2", "pinhole_separation"),
    "single_slit": ("slit_width",),
    "single_point": (),
    "uniform": (),
    "opaque": (),
}

POSITIVE = ("wavelength", "source_half_width", "coherence_time", "z1", "z2", "z2_min", "z2_max", "slit_width",
            "slit_separation", "pinhole_d1", "pinhole_d2", "pinhole_separation", "scan_step", "x2_half_window",
            "duration", "dt", "bin_width", "tac_window", "start_rate", "stop_rate")
NON_NEGATIVE = ("detector_aperture", "jitter_start", "jitter_stop", "dead_time", "tac_delay")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    method: str = "montecarlo"
    seed: int = 0
    output: str = "results"
    wavelength: Optional[float] = None
    source_profile: str = "uniform"
    source_half_width: Optional[float] = None
    coherence_time: float = 1e-10
    z1: Optional[float] = None
    z2: Optional[float] = None
    z2_min: Optional[float] = None
    z2_max: Optional[float] = None
    z2_steps: Optional[int] = None
    mask: Optional[str] = None
    slit_width: Optional[float] = None
    slit_separation: Optional[float] = None
    pinhole_d1: Optional[float] = None
    pinhole_d2: Optional[float] = None
    pinhole_separation: Optional[float] = None
    feature_center: float = 0.0
    n_realizations: int = 4096
    n_batches: int = 16
    threads: int = 1
    detector_aperture: float = 0.0
    scan_step: Optional[float] = None
    detector_points: Optional[int] = None
    x2_half_window: Optional[float] = None
    duration: Optional[float] = None
    dt: Optional[float] = None
    bin_width: Optional[float] = None
    tac_window: Optional[float] = None
    start_rate: Optional[float] = None
    stop_rate: Optional[float] = None
    jitter_start: float = 0.0
    jitter_stop: float = 0.0
    dead_time: float = 0.0
    tac_delay: float = 0.0
    independent_stop: bool = False

    @property
    def is_imaging(self) -> bool:
        return self.kind in ("focused_image", "z2_sweep")

    @property
    def reference_distance(self) -> float:
        return self.z2 if self.z2 is not None else self.z1

    @property
    def trace_step(self) -> float:
        return self.dt if self.dt is not None else self.coherence_time / 10.0

    def z2_values(self) -> List[float]:
        if self.kind != "z2_sweep":
            return [self.reference_distance]
        step = (self.z2_max - self.z2_min) / (self.z2_steps - 1)
        return [self.z2_min + i * step for i in range(self.z2_steps)]

    def with_overrides(self, **overrides) -> "ScenarioConfig":
        """Copy with some fields replaced (None values are ignored), validated again."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        cfg = replace(self, **changes)
        validate_scenario(cfg)
        return cfg


def _convert(key: str, text: str, line: int) -> Any:
    kind = KEYS[key]
    if text.strip().lower() in NULL_SPELLINGS:
        return None
    text = text.strip()
    try:
        if isinstance(kind, tuple):
            if text not in kind:
                raise ValueError(f"'{text}' is not one of {', '.join(kind)}")
            return text
        if kind == "str":
            return text
        if kind == "bool":
            lowered = text.lower()
            if lowered not in ("true", "false"):
                raise ValueError(f"'{text}' is not true or false")
            return lowered == "true"
        if kind == "int":
            return int(text.replace("_", ""))
        return units.parse_quantity(text, kind)
    except (ValueError, units.UnitError) as err:
        raise ScenarioError(str(err), line=line, field=key)


def _read_mapping(text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise ScenarioError(f"malformed document ({getattr(err, 'problem', err)})",
                            line=mark.line + 1 if mark else None)
    if root is None:
        raise ScenarioError("empty scenario document")
    if not isinstance(root, yaml.MappingNode):
        raise ScenarioError("a scenario must be a flat key: value mapping", line=root.start_mark.line + 1)

    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for key_node, value_node in root.value:
        line = key_node.start_mark.line + 1
        if not isinstance(key_node, yaml.ScalarNode):
            raise ScenarioError("keys must be plain names", line=line)
        key = key_node.value
        if key not in KEYS:
            raise ScenarioError(f"unknown key '{key}'", line=line, field=key)
        if key in values:
            raise ScenarioError(f"duplicate key '{key}' (first given on line {lines[key]})", line=line, field=key)
        if not isinstance(value_node, yaml.ScalarNode):
            raise ScenarioError("nested values are not allowed", line=line, field=key)
        values[key] = _convert(key, value_node.value, line)
        lines[key] = line
    return values, lines


def validate_scenario(cfg: ScenarioConfig, lines: Optional[Dict[str, int]] = None) -> None:
    """Cross-field checks; raises ScenarioError naming the field (and line when known)."""
    lines = lines or {}

    def fail(key: str, message: str):
        raise ScenarioError(message, line=lines.get(key), field=key)

    if cfg.kind not in KINDS:
        fail("kind", f"unknown kind '{cfg.kind}'")
    if cfg.method not in METHODS:
        fail("method", f"unknown method '{cfg.method}'")
    for key in REQUIRED[cfg.kind]:
        if getattr(cfg, key) is None:
            fail(key, f"required for kind {cfg.kind}")
    if cfg.kind == "hbt" and cfg.method == "analytic":
        fail("method", "the hbt kind has no analytic method")
    if cfg.is_imaging:
        if cfg.mask not in MASKS:
            fail("mask", f"unknown mask constructor '{cfg.mask}'")
        for key in MASK_PARAMETERS[cfg.mask]:
            if getattr(cfg, key) is None:
                fail(key, f"required by mask {cfg.mask}")
    for key in POSITIVE:
        value = getattr(cfg, key)
        if value is not None and not value > 0:
            fail(key, f"must be positive, got {value}")
    for key in NON_NEGATIVE:
        if getattr(cfg, key) < 0:
            fail(key, "must not be negative")
    if cfg.kind == "z2_sweep":
        if not cfg.z2_max > cfg.z2_min:
            fail("z2_max", "sweep bounds must be ordered (z2_min < z2_max)")
        if cfg.z2_steps < 2:
            fail("z2_steps", "a sweep needs at least two steps")
    if not 0 <= cfg.seed <= MAX_SEED:
        fail("seed", "must be an unsigned 64-bit integer")
    if cfg.n_realizations < 2:
        fail("n_realizations", "at least two realizations are needed")
    if cfg.n_batches < 2:
        fail("n_batches", "at least two batches are needed")
    if cfg.threads < 1:
        fail("threads", "must be >= 1")
    if cfg.detector_points is not None and cfg.detector_points < 2:
        fail("detector_points", "must be >= 2")
    if cfg.detector_points is not None and cfg.scan_step is not None:
        # the window is widened to a whole number of scan steps, k on each side
        if cfg.x2_half_window is None:
            fail("detector_points", "with scan_step, x2_half_window must be given as well")
        k = math.ceil(cfg.x2_half_window / cfg.scan_step - 1e-9)
        if (cfg.detector_points - 1) % (2 * k):
            fail("detector_points", f"{cfg.detector_points - 1} intervals cannot be split into {2 * k} scan steps; "
                                    f"use {2 * k}*j + 1 points")


def parse_scenario(text: str) -> ScenarioConfig:
    """
    Parse and validate a scenario document.

    Args:
        text (str): the document.

    Returns:
        ScenarioConfig: every field filled, defaults included.
    """
    values, lines = _read_mapping(text)
    if values.get("kind") is None:
        raise ScenarioError("missing required key", field="kind")
    defaults = {f.name: f.default for f in fields(ScenarioConfig) if f.name != "kind"}
    for key, value in list(values.items()):
        # an explicit null on a field with a concrete default keeps the default
        if value is None and key in defaults and defaults[key] is not None:
            values[key] = defaults[key]
    cfg = ScenarioConfig(**values)
    validate_scenario(cfg, lines)
    return cfg


def _format(key: str, value: Any) -> str:
    kind = KEYS[key]
    if value is None:
        return "null"
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("length", "time", "rate"):
        return units.format_quantity(value, kind)
    return str(value)


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Normalized document: every key in fixed order, canonical units; parses back to cfg."""
    return "".join(f"{key}: {_format(key, getattr(cfg, key))}\n" for key in KEYS)


def load_scenario(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            text = fp.read()
    except OSError as err:
        raise ScenarioError(f"cannot read scenario file {path}: {err.strerror}")
    return parse_scenario(text)


def list_presets() -> List[str]:
    return sorted(p.name[:-len(PRESET_SUFFIX)] for p in PRESET_DIR.glob("*" + PRESET_SUFFIX))


def preset_text(name: str) -> str:
    path = PRESET_DIR / (name + PRESET_SUFFIX)
    if not path.is_file():
        raise ScenarioError(f"no preset named '{name}' (available: {', '.join(list_presets())})")
    return path.read_text(encoding="utf-8")


def load_preset(name: str) -> ScenarioConfig:
    return parse_scenario(preset_text(name))
