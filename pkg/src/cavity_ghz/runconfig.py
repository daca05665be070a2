"""Effective run configuration: defaults, ``key = value`` files and command-line overrides.

Frequencies in files are plain Hz, durations seconds, rates 1/s. Keys of the
custom parameter set carry a ``params.`` prefix, e.g. ``params.f10_hz = 6.8e9``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from cavity_ghz import config
from cavity_ghz.model import (
    DecoherenceRates,
    PhysicalParams,
    preset_phase_qutrit,
    preset_rydberg_atom,
    rad_per_s,
)
from cavity_ghz.propagate import IntegratorConfig
from cavity_ghz.protocol import SimulationMode

logger = logging.getLogger(__name__)

PRESETS = ("phase_qutrit", "rydberg_atom", "custom")
PARAMS_PREFIX = "params."


class ConfigError(ValueError):
    """Raised for unreadable files, unknown keys, malformed values or an inconsistent configuration."""


@dataclass
class RunConfig:
    preset: str = "phase_qutrit"
    n: int = 2
    b: float = 50.0
    mode: SimulationMode = SimulationMode.LINDBLAD
    fock_cutoff: int | None = None
    g_cross_ratio: float = 0.01
    t_d: float | None = None
    dt_factor: float = config.DEFAULT_DT_FACTOR
    trace_tolerance: float = config.DEFAULT_TRACE_TOLERANCE
    hermiticity_tolerance: float = config.DEFAULT_HERMITICITY_TOLERANCE
    min_steps_per_segment: int = config.DEFAULT_MIN_STEPS_PER_SEGMENT
    output: Path | None = None
    output_format: str = config.DEFAULT_OUTPUT_FORMAT
    n_values: tuple[int, ...] | None = None
    b_values: tuple[float, ...] | None = None
    g_cross_ratios: tuple[float, ...] | None = None
    jobs: int = config.DEFAULT_JOBS
    check_cutoff: bool = True
    params: dict[str, str] = field(default_factory=dict)

    @property
    def effective_fock_cutoff(self) -> int:
        if self.fock_cutoff is not None:
            return self.fock_cutoff
        if self.preset == "rydberg_atom":
            return config.RYDBERG_FOCK_CUTOFF
        return config.DEFAULT_FOCK_CUTOFF


# ---------------------------------------------------------------------------
# Value parsing
# ---------------------------------------------------------------------------

def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected a boolean, got '{text}'")


def _parse_scalar(text: str, kind: Callable[[str], Any]) -> Any:
    try:
        return kind(text.strip())
    except ValueError as e:
        raise ConfigError(f"cannot parse '{text}' as {kind.__name__}") from e


def parse_number_list(text: str, kind: Callable[[str], Any] = float) -> tuple[Any, ...]:
    """Parse ``"a,b,c"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if not text:
        raise ConfigError("empty list")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got '{text}'")
        start, stop, step = (_parse_scalar(p, kind) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"range '{text}' needs step > 0 and stop >= start")
        count = math.floor((stop - start) / step + 1e-9) + 1
        return tuple(kind(start + k * step) for k in range(count))
    return tuple(_parse_scalar(p, kind) for p in text.split(",") if p.strip())


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, SimulationMode):
        return value.value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


_PARSERS: dict[str, Callable[[str], Any]] = {
    "preset": lambda s: s.strip(),
    "n": lambda s: _parse_scalar(s, int),
    "b": lambda s: _parse_scalar(s, float),
    "mode": lambda s: _parse_mode(s),
    "fock_cutoff": lambda s: _parse_scalar(s, int),
    "g_cross_ratio": lambda s: _parse_scalar(s, float),
    "t_d": lambda s: _parse_scalar(s, float),
    "dt_factor": lambda s: _parse_scalar(s, float),
    "trace_tolerance": lambda s: _parse_scalar(s, float),
    "hermiticity_tolerance": lambda s: _parse_scalar(s, float),
    "min_steps_per_segment": lambda s: _parse_scalar(s, int),
    "output": lambda s: Path(s.strip()),
    "output_format": lambda s: s.strip().lower(),
    "n_values": lambda s: parse_number_list(s, int),
    "b_values": lambda s: parse_number_list(s, float),
    "g_cross_ratios": lambda s: parse_number_list(s, float),
    "jobs": lambda s: _parse_scalar(s, int),
    "check_cutoff": parse_bool,
}


def _parse_mode(text: str) -> SimulationMode:
    try:
        return SimulationMode(text.strip().lower())
    except ValueError as e:
        choices = ", ".join(m.value for m in SimulationMode)
        raise ConfigError(f"mode must be one of {choices}, got '{text}'") from e


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def parse_config_text(text: str, source: str = "<string>") -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; the last duplicate wins."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def load_config_file(path: Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    values = parse_config_text(text, str(path))
    logger.debug("Loaded %d config key(s) from %s", len(values), path)
    return values


def build_config(file_values: Mapping[str, str], validate: bool = True) -> RunConfig:
    """Turn parsed file values into a validated RunConfig; unknown keys are rejected."""
    settings: dict[str, Any] = {}
    params: dict[str, str] = {}
    for key, text in file_values.items():
        key = normalize_key(key)
        if key.startswith(PARAMS_PREFIX):
            params[key[len(PARAMS_PREFIX):]] = text
        elif key in _PARSERS:
            settings[key] = _PARSERS[key](text)
        else:
            raise ConfigError(f"unknown config key '{key}'")
    cfg = RunConfig(**settings, params=params)
    if validate:
        validate_config(cfg)
    return cfg


def merge_config(file_values: Mapping[str, str], cli_values: Mapping[str, Any]) -> RunConfig:
    """File values over defaults, command-line values (already typed; None = unset) over both."""
    cfg = build_config(file_values, validate=False)
    overrides = {key: value for key, value in cli_values.items() if value is not None}
    unknown = set(overrides) - set(_PARSERS)
    if unknown:
        raise ConfigError(f"unknown option(s): {', '.join(sorted(unknown))}")
    if "mode" in overrides and not isinstance(overrides["mode"], SimulationMode):
        overrides["mode"] = _parse_mode(str(overrides["mode"]))
    for key in ("n_values", "b_values", "g_cross_ratios"):
        if key in overrides:
            overrides[key] = tuple(overrides[key])
    cfg = dataclasses.replace(cfg, **overrides)
    validate_config(cfg)
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Effective configuration in the file format; unset optional values are omitted."""
    lines = []
    for f in dataclasses.fields(cfg):
        if f.name == "params":
            continue
        value = getattr(cfg, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {_format_value(value)}")
    for key in sorted(cfg.params):
        lines.append(f"{PARAMS_PREFIX}{key} = {cfg.params[key]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation and construction
# ---------------------------------------------------------------------------

def validate_config(cfg: RunConfig) -> None:
    if cfg.preset not in PRESETS:
        raise ConfigError(f"preset must be one of {', '.join(PRESETS)}, got '{cfg.preset}'")
    if cfg.n < 2:
        raise ConfigError(f"n must be >= 2, got {cfg.n}")
    if cfg.preset == "phase_qutrit":
        if cfg.n > config.PHASE_QUTRIT_MAX_CAVITIES:
            raise ConfigError(f"phase_qutrit supports n <= {config.PHASE_QUTRIT_MAX_CAVITIES}, got {cfg.n}")
        if cfg.b <= 0:
            raise ConfigError(f"b must be positive, got {cfg.b}")
    if cfg.preset == "rydberg_atom":
        if cfg.n > config.RYDBERG_MAX_CAVITIES:
            raise ConfigError(f"rydberg_atom supports n <= {config.RYDBERG_MAX_CAVITIES}, got {cfg.n}")
        if cfg.mode is SimulationMode.LINDBLAD and cfg.n > config.RYDBERG_LINDBLAD_MAX_CAVITIES:
            raise ConfigError(f"rydberg_atom Lindblad runs need n <= {config.RYDBERG_LINDBLAD_MAX_CAVITIES}")
    if cfg.preset == "custom" and not cfg.params:
        raise ConfigError("the custom preset needs params.* keys in a config file")
    if cfg.fock_cutoff is not None and cfg.fock_cutoff < 2:
        raise ConfigError(f"fock_cutoff must be >= 2, got {cfg.fock_cutoff}")
    if cfg.g_cross_ratio < 0 or any(r < 0 for r in cfg.g_cross_ratios or ()):
        raise ConfigError("g_cross_ratio values must be nonnegative")
    if any(b <= 0 for b in cfg.b_values or ()):
        raise ConfigError("b_values must be positive")
    if any(n < 2 for n in cfg.n_values or ()):
        raise ConfigError("n_values must be >= 2")
    if cfg.dt_factor < config.MIN_DT_FACTOR:
        raise ConfigError(f"dt_factor must be >= {config.MIN_DT_FACTOR}, got {cfg.dt_factor}")
    if cfg.trace_tolerance <= 0 or cfg.hermiticity_tolerance <= 0:
        raise ConfigError("tolerances must be positive")
    if cfg.min_steps_per_segment < 1:
        raise ConfigError("min_steps_per_segment must be >= 1")
    if cfg.output_format not in config.OUTPUT_FORMATS:
        raise ConfigError(f"output_format must be one of {', '.join(config.OUTPUT_FORMATS)}, got '{cfg.output_format}'")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg.jobs}")


def integrator_config(cfg: RunConfig) -> IntegratorConfig:
    return IntegratorConfig(
        dt_factor=cfg.dt_factor,
        trace_tolerance=cfg.trace_tolerance,
        hermiticity_tolerance=cfg.hermiticity_tolerance,
        min_steps_per_segment=cfg.min_steps_per_segment,
    )


_REQUIRED_PARAMS = (
    "f10_hz", "f21_hz", "f_active_hz", "f_idle_hz", "g_hz", "g_prime_hz", "g_tilde_hz",
    "g_tilde_prime_hz", "rabi_21_hz", "rabi_20_hz", "rabi_10_hz", "delta_mw_hz", "t_d",
)
_OPTIONAL_PARAMS = (
    "g_cross_hz", "kappa", "gamma_phi_21", "gamma_phi_20", "gamma_phi_10", "gamma_21", "gamma_20", "gamma_10",
)


def _per_cavity(mapping: Mapping[str, str], key: str, n: int) -> tuple[float, ...]:
    values = parse_number_list(mapping[key], float)
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise ConfigError(f"params.{key} has {len(values)} entries, expected 1 or {n}")
    return values


def params_from_mapping(mapping: Mapping[str, str], n: int) -> PhysicalParams:
    """Build PhysicalParams from Hz frequencies, seconds and 1/s rates.

    Per-cavity keys take a comma-separated list or one value for every cavity;
    ``g_cross_hz`` is applied to every pair of distinct cavities.
    """
    mapping = {normalize_key(k): v for k, v in mapping.items()}
    missing = [key for key in _REQUIRED_PARAMS if key not in mapping]
    if missing:
        raise ConfigError(f"custom preset is missing params: {', '.join(missing)}")
    unknown = set(mapping) - set(_REQUIRED_PARAMS) - set(_OPTIONAL_PARAMS)
    if unknown:
        raise ConfigError(f"unknown params: {', '.join(sorted(unknown))}")

    def scalar(key: str, default: float | None = None) -> float | None:
        if key not in mapping:
            return default
        return _parse_scalar(mapping[key], float)

    def cavities_rad(key: str) -> tuple[float, ...]:
        return tuple(rad_per_s(v) for v in _per_cavity(mapping, key, n))

    omega_10 = rad_per_s(scalar("f10_hz"))
    omega_21 = rad_per_s(scalar("f21_hz"))
    cross = rad_per_s(scalar("g_cross_hz", 0.0))
    kappa = _per_cavity(mapping, "kappa", n) if "kappa" in mapping else (0.0,) * n
    if any(g <= 0 for g in _per_cavity(mapping, "g_hz", n)):
        raise ConfigError("params.g_hz must be positive for every cavity")
    try:
        return PhysicalParams(
            omega_10=omega_10,
            omega_21=omega_21,
            omega_20=omega_10 + omega_21,
            omega_c_active=cavities_rad("f_active_hz"),
            omega_c_idle=cavities_rad("f_idle_hz"),
            g=cavities_rad("g_hz"),
            g_prime=cavities_rad("g_prime_hz"),
            g_tilde=cavities_rad("g_tilde_hz"),
            g_tilde_prime=cavities_rad("g_tilde_prime_hz"),
            g_cross=tuple(tuple(0.0 if k == l else cross for l in range(n)) for k in range(n)),
            Omega_21=rad_per_s(scalar("rabi_21_hz")),
            Omega_20=rad_per_s(scalar("rabi_20_hz")),
            Omega_10=rad_per_s(scalar("rabi_10_hz")),
            Delta_mu_w=rad_per_s(scalar("delta_mw_hz")),
            t_d=scalar("t_d"),
            rates=DecoherenceRates(
                kappa=kappa,
                gamma_phi_21=scalar("gamma_phi_21", 0.0),
                gamma_phi_20=scalar("gamma_phi_20", 0.0),
                gamma_phi_10=scalar("gamma_phi_10", 0.0),
                gamma_21=scalar("gamma_21", 0.0),
                gamma_20=scalar("gamma_20", 0.0),
                gamma_10=scalar("gamma_10", 0.0),
            ),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"invalid custom parameters: {e}") from e


def build_params(cfg: RunConfig, n: int | None = None, b: float | None = None) -> PhysicalParams:
    n = cfg.n if n is None else n
    b = cfg.b if b is None else b
    try:
        if cfg.preset == "phase_qutrit":
            if cfg.t_d is None:
                return preset_phase_qutrit(n, b, cfg.g_cross_ratio)
            return preset_phase_qutrit(n, b, cfg.g_cross_ratio, t_d=cfg.t_d)
        if cfg.preset == "rydberg_atom":
            if cfg.t_d is None:
                return preset_rydberg_atom(n)
            return preset_rydberg_atom(n, t_d=cfg.t_d)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return params_from_mapping(cfg.params, n)
