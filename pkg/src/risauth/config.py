"""Scenario constants, geometry, unit helpers, flat config files and seeding."""

from __future__ import annotations

import ast
import dataclasses
import zlib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

# Load resistor of the tag's energy detector; only scales V_peak.
LOAD_RESISTANCE_OHM = 1_000.0


class ConfigError(ValueError):
    """Bad configuration value or key. The message names the offending field."""


@dataclass(frozen=True)
class SystemParams:
    source_power_dbm: float = 1.0
    noise_power_reader_dbm: float = -30.0
    noise_power_eve_dbm: float = -20.0
    # carried for completeness, no implemented metric consumes it
    spectral_efficiency_bps_hz: float = 1.0
    pathloss_exp_direct: float = 3.5
    pathloss_exp_ris: float = 2.5
    ris_elements: int = 100
    rc_time_constant_s: float = 1e-3
    rectifier_efficiency: float = 0.5
    # None: comparator_threshold_rel times the stored profile's V_peak
    comparator_threshold_v: Optional[float] = None
    comparator_threshold_rel: float = 0.05
    rss_ratio_threshold: float = 0.9
    temporal_correlation: float = 0.99
    symbol_period_s: float = 10e-3
    profile_length: int = 16
    # phase resolution of the trusted RIS controller, 0 = continuous
    ris_phase_bits: int = 4
    # receiver samples averaged into one RSS estimate
    rss_samples: int = 256
    eve_power_matched: bool = True
    eve_power_dbm: float = 1.0

    def __post_init__(self):
        _check(self.ris_elements >= 0, "ris_elements", "must be >= 0")
        for name in ("pathloss_exp_direct", "pathloss_exp_ris"):
            v = getattr(self, name)
            _check(2.0 <= v <= 6.0, name, f"must lie in [2, 6], got {v}")
        _check(0.0 < self.rectifier_efficiency <= 1.0, "rectifier_efficiency", "must lie in (0, 1]")
        _check(0.0 < self.rss_ratio_threshold <= 1.0, "rss_ratio_threshold", "must lie in (0, 1]")
        _check(0.0 <= self.temporal_correlation <= 1.0, "temporal_correlation", "must lie in [0, 1]")
        _check(self.rc_time_constant_s > 0, "rc_time_constant_s", "must be > 0")
        _check(self.symbol_period_s > 0, "symbol_period_s", "must be > 0")
        _check(self.profile_length >= 1, "profile_length", "must be >= 1")
        _check(self.ris_phase_bits >= 0, "ris_phase_bits", "must be >= 0")
        _check(self.rss_samples >= 1, "rss_samples", "must be >= 1")
        _check(self.comparator_threshold_rel > 0, "comparator_threshold_rel", "must be > 0")
        if self.comparator_threshold_v is not None:
            _check(self.comparator_threshold_v > 0, "comparator_threshold_v", "must be > 0")

    @property
    def source_power_w(self) -> float:
        return dbm_to_watts(self.source_power_dbm)

    @property
    def noise_reader_w(self) -> float:
        return dbm_to_watts(self.noise_power_reader_dbm)

    @property
    def noise_eve_w(self) -> float:
        return dbm_to_watts(self.noise_power_eve_dbm)

    @property
    def eve_power_w(self) -> float:
        return dbm_to_watts(self.eve_power_dbm)


@dataclass(frozen=True)
class ScenarioGeometry:
    """Link distances in meters. Triangle consistency is deliberately not checked."""

    d_reader_ris_m: float = 1.0
    d_tag_ris_m: float = 1.0
    d_tag_eve_m: float = 1.0
    d_reader_eve_m: float = 1.0
    d_eve_ris_m: float = 0.8
    d_tag_reader_m: float = 2.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            _check(v > 0, f.name, f"distance must be > 0, got {v}")


def _check(ok: bool, name: str, msg: str) -> None:
    if not ok:
        raise ConfigError(f"{name}: {msg}")


def default_params() -> SystemParams:
    return SystemParams()


def default_geometry() -> ScenarioGeometry:
    return ScenarioGeometry()


def dbm_to_watts(p_dbm):
    w = np.power(10.0, (np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return float(w) if w.ndim == 0 else w


def watts_to_dbm(p_w):
    return 10.0 * np.log10(p_w) + 30.0


# ---------------------------------------------------------------------------
# flat key = value files
# ---------------------------------------------------------------------------

def parse_flat(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines. ``#`` starts a comment; values are Python
    literals where possible and bare strings otherwise."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"{key}: duplicate key")
        out[key] = _literal(value)
    return out


def _literal(value: str) -> Any:
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        if "," in value:
            return tuple(_literal(v.strip()) for v in value.split(","))
        return value


def _coerce(name: str, annotation: str, value: Any) -> Any:
    optional = annotation.startswith("Optional[")
    base = annotation[len("Optional["):-1] if optional else annotation
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{name}: must not be empty")
    if base == "bool":
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{name}: expected true/false, got {value!r}")
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    return value


def apply_overrides(params: SystemParams, geom: ScenarioGeometry,
                    overrides: Mapping[str, Any]) -> tuple[SystemParams, ScenarioGeometry]:
    """Return copies of ``params``/``geom`` with the given fields replaced.

    Every key must name a field of one of the two types.
    """
    p_fields = {f.name: f.type for f in fields(SystemParams)}
    g_fields = {f.name: f.type for f in fields(ScenarioGeometry)}
    p_kw, g_kw = {}, {}
    for key, value in overrides.items():
        if key in p_fields:
            p_kw[key] = _coerce(key, str(p_fields[key]), value)
        elif key in g_fields:
            g_kw[key] = _coerce(key, str(g_fields[key]), value)
        else:
            raise ConfigError(f"{key}: unknown configuration key")
    return dataclasses.replace(params, **p_kw), dataclasses.replace(geom, **g_kw)


def load_config(path) -> tuple[SystemParams, ScenarioGeometry]:
    """Read a flat config file holding SystemParams/ScenarioGeometry fields."""
    text = Path(path).read_text(encoding="utf-8")
    return apply_overrides(default_params(), default_geometry(), parse_flat(text))


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------

def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    return int(k)


def derive_seed(master: int, *keys) -> int:
    """Deterministic 63-bit seed for the stream identified by ``keys``.

    Used as ``derive_seed(master, "reader-legit", n_ris, trial_index)`` so a
    trial's randomness never depends on which worker runs it.
    """
    ss = np.random.SeedSequence([_key(master)] + [_key(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
