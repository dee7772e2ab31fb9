"""Run configuration: ``key = value`` documents, defaults and manifests.

A config document holds one ``key = value`` pair per line; ``#`` starts a
comment.  List-valued keys (``omega_ratio``, ``lengths``) take
comma-separated numbers.  Defaults are the reference parameter set:
N = 50, delta_omega = 4e-3, g = 6e-3, epsilon = 1e-5, Omega = 0.5 Omega_TC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from . import __version__
from .experiments import FIXED_BAND, FIXED_N, ExperimentSpec
from .model import INITIAL_KINDS, ParameterError, SystemParams, validate_params

KINDS = ("echo", "return", "omega-sweep", "length-sweep")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; ``lineno`` points into the source document."""

    def __init__(self, message: str, lineno: int | None = None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)
        self.lineno = lineno


@dataclass(frozen=True)
class RunConfig:
    kind: str = "echo"
    omega0: float = 1.0
    omega_ratio: tuple = (0.5,)
    g: float = 6e-3
    delta_omega: float = 4e-3
    n_modes: int = 50
    epsilon: float = 1e-5
    initial: str = "special"
    t_max: float = 400.0
    dt: float = 0.01
    t0: float = 200.0
    m: int = 200
    late_lo: float = 200.0
    late_hi: float = 400.0
    ratio_start: float = 0.1
    ratio_stop: float = 3.0
    ratio_step: float = 0.05
    lengths: tuple = (10.0, 250.0)
    reference_length: float = 250.0
    omega_abs: float = 1e-2
    n_mode_policy: str = FIXED_N
    band_width: float | None = None
    workers: int = 1
    out: str = ""
    format: str = "csv"

    def params(self, ratio: float | None = None) -> SystemParams:
        base = SystemParams(
            omega0=self.omega0,
            Omega=0.0,
            g=self.g,
            delta_omega=self.delta_omega,
            n_modes=self.n_modes,
            epsilon=self.epsilon,
        )
        return base.with_omega_ratio(self.omega_ratio[0] if ratio is None else ratio)

    def experiment(self, ratio: float | None = None) -> ExperimentSpec:
        return ExperimentSpec(
            params=self.params(ratio),
            initial=self.initial,
            t_max=self.t_max,
            dt=self.dt,
            t0=self.t0,
            m=self.m,
            late_window=(self.late_lo, self.late_hi),
            length=self.reference_length,
            label=self.kind,
        )

    def sweep_ratios(self) -> list:
        n = int(math.floor((self.ratio_stop - self.ratio_start) / self.ratio_step + 1e-9))
        return [round(self.ratio_start + k * self.ratio_step, 10) for k in range(n + 1)]

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - _FIELDS.keys()
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        values = {}
        for key, value in data.items():
            values[key] = tuple(value) if isinstance(value, list) else value
        return cls(**values)

    def to_text(self) -> str:
        """Render as a config document that parses back to ``self``."""
        lines = []
        for key, value in self.to_dict().items():
            lines.append(f"{key} = {_render(value)}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(RunConfig)}
_FLOAT_KEYS = {
    "omega0", "g", "delta_omega", "epsilon", "t_max", "dt", "t0", "late_lo",
    "late_hi", "ratio_start", "ratio_stop", "ratio_step", "reference_length",
    "omega_abs",
}
_INT_KEYS = {"n_modes", "m", "workers"}
_LIST_KEYS = {"omega_ratio", "lengths"}
_PARAM_KEY = {"Omega": "omega_ratio"}


def _render(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, list):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _number(key: str, text: str, lineno):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: malformed number {text!r}", lineno) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {text!r}", lineno)
    return value


def _convert(key: str, text: str, lineno=None):
    text = text.strip()
    if key in _FLOAT_KEYS:
        return _number(key, text, lineno)
    if key in _INT_KEYS:
        value = _number(key, text, lineno)
        if value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {text!r}", lineno)
        return int(value)
    if key in _LIST_KEYS:
        items = [item for item in text.split(",") if item.strip()]
        if not items:
            raise ConfigError(f"{key}: expected at least one number", lineno)
        return tuple(_number(key, item.strip(), lineno) for item in items)
    if key == "band_width":
        return None if text.lower() == "auto" else _number(key, text, lineno)
    return text


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Parse a config document, apply ``overrides`` and validate.

    ``overrides`` maps keys to already-typed values or raw strings (as
    they come from the command line) and wins over the document.
    """
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        values[key] = _convert(key, value, lineno)
        lines[key] = lineno

    for key, value in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        if value is None:
            continue
        values[key] = _convert(key, value) if isinstance(value, str) else value
        lines.pop(key, None)

    config = RunConfig(**values)
    validate_config(config, lines)
    return config


def validate_config(config: RunConfig, lines: dict | None = None) -> RunConfig:
    lines = lines or {}

    def fail(key, message):
        raise ConfigError(f"{key}: {message}", lines.get(key))

    if config.kind not in KINDS:
        fail("kind", f"expected one of {KINDS}, got {config.kind!r}")
    if config.initial not in INITIAL_KINDS:
        fail("initial", f"expected one of {INITIAL_KINDS}, got {config.initial!r}")
    if config.format not in FORMATS:
        fail("format", f"expected one of {FORMATS}, got {config.format!r}")
    if config.n_mode_policy not in (FIXED_N, FIXED_BAND):
        fail("n_mode_policy", f"expected {FIXED_N} or {FIXED_BAND}")
    if not config.dt > 0:
        fail("dt", "must be > 0")
    if not config.t_max > 0:
        fail("t_max", "must be > 0")
    steps = config.t_max / config.dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        fail("t_max", f"{config.t_max} is not a whole number of dt={config.dt}")
    if config.workers < 1:
        fail("workers", "must be >= 1")
    if any(r < 0 for r in config.omega_ratio):
        fail("omega_ratio", "ratios must be >= 0")
    if config.late_hi <= config.late_lo:
        fail("late_hi", "late window is empty")

    for ratio in config.omega_ratio:
        try:
            validate_params(config.params(ratio))
        except ParameterError as exc:
            key = _PARAM_KEY.get(exc.field, exc.field)
            raise ConfigError(str(exc), lines.get(key)) from None

    if config.kind == "omega-sweep":
        if not 0 < config.ratio_start < config.ratio_stop <= 10:
            fail("ratio_start", "sweep range must satisfy 0 < start < stop <= 10")
        if not config.ratio_step > 0:
            fail("ratio_step", "must be > 0")
        if config.t_max < config.t0 + config.m:
            fail("t_max", f"must cover the averaging window up to {config.t0 + config.m} T_B")
    if config.kind == "length-sweep":
        if any(length <= 0 for length in config.lengths):
            fail("lengths", "lengths must be > 0")
        if len(set(config.lengths)) != len(config.lengths):
            fail("lengths", "lengths must be distinct")
        if not config.omega_abs > 0:
            fail("omega_abs", "must be > 0")
        if not config.reference_length > 0:
            fail("reference_length", "must be > 0")
    return config


def derived_quantities(config: RunConfig) -> dict:
    p = config.params()
    return {
        "T_B": p.round_trip_time,
        "Omega_TC": p.omega_tc,
        "D": p.dim,
        "omega_ratio": list(config.omega_ratio),
        "Omega": [config.params(r).Omega for r in config.omega_ratio],
        "gamma": [config.params(r).gamma for r in config.omega_ratio],
        "gamma_T_B": [config.params(r).gamma * p.round_trip_time for r in config.omega_ratio],
    }


def build_manifest(config: RunConfig, wall_clock: float, results: dict | None = None) -> dict:
    """Provenance record: resolved config, derived scales, tool version."""
    manifest = {
        "tool": "adtc",
        "version": __version__,
        "config": config.to_dict(),
        "derived": derived_quantities(config),
        "wall_clock_s": wall_clock,
    }
    if results:
        manifest["results"] = results
    return manifest


def config_from_manifest(manifest: dict) -> RunConfig:
    return validate_config(RunConfig.from_dict(manifest["config"]))


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    return validate_config(replace(config, **changes))
