"""Passive tag: RC energy detector, voltage profiles and reader authentication."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .config import LOAD_RESISTANCE_OHM, SystemParams
from .decision import Decision


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PowerProfile:
    """OOK power pattern sent by the reader: one ON/OFF flag per symbol."""

    symbols: np.ndarray
    symbol_period_s: float

    def __post_init__(self):
        bits = np.asarray(self.symbols, dtype=bool).reshape(-1)
        if bits.size < 1:
            raise ValueError("power profile needs at least one symbol")
        if not bits.any():
            raise ValueError("power profile needs at least one ON symbol")
        if self.symbol_period_s <= 0:
            raise ValueError("symbol period must be > 0")
        bits.setflags(write=False)
        object.__setattr__(self, "symbols", bits)

    def __len__(self):
        return self.symbols.size

    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.symbols)

    @classmethod
    def from_bitstring(cls, text: str, symbol_period_s: float) -> "PowerProfile":
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(np.array([c == "1" for c in text]), symbol_period_s)

    def __eq__(self, other):
        if not isinstance(other, PowerProfile):
            return NotImplemented
        return self.symbol_period_s == other.symbol_period_s and np.array_equal(self.symbols, other.symbols)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class VoltageProfile:
    """Energy-detector output sampled at the end of every symbol."""

    samples: np.ndarray
    symbol_period_s: float

    def __post_init__(self):
        v = np.array(self.samples, dtype=float).reshape(-1)
        if np.any(v < 0):
            raise ValueError("voltages must be >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "samples", v)

    def __len__(self):
        return self.samples.size


def default_power_profile(tag_id: str, params: SystemParams) -> PowerProfile:
    """Fixed pseudo-random ON/OFF pattern derived from the tag ID.

    The first symbol is always ON so the detector charges before any decay.
    """
    rng = np.random.default_rng(zlib.crc32(tag_id.encode("utf-8")))
    bits = rng.integers(0, 2, params.profile_length).astype(bool)
    bits[0] = True
    return PowerProfile(bits, params.symbol_period_s)


def peak_voltage(incident_power_w: float, params: SystemParams) -> float:
    """Saturation voltage of the rectifier for a given incident RF power."""
    if incident_power_w < 0:
        raise ValueError("incident power must be >= 0")
    return float(np.sqrt(params.rectifier_efficiency * incident_power_w * LOAD_RESISTANCE_OHM))


def simulate_profile(pp: PowerProfile, incident_power_w: float, params: SystemParams) -> VoltageProfile:
    """Step the RC detector through the OOK pattern, starting discharged.

    ON:  V <- V_peak + (V - V_peak) * exp(-T/tau)
    OFF: V <- V * exp(-T/tau)
    """
    v_peak = peak_voltage(incident_power_w, params)
    decay = np.exp(-pp.symbol_period_s / params.rc_time_constant_s)
    out = np.empty(len(pp))
    v = 0.0
    for k, on in enumerate(pp.symbols):
        v = v_peak + (v - v_peak) * decay if on else v * decay
        out[k] = v
    return VoltageProfile(out, pp.symbol_period_s)


def max_deviation(observed: VoltageProfile, stored: VoltageProfile) -> float:
    if len(observed) != len(stored) or observed.symbol_period_s != stored.symbol_period_s:
        raise ValueError("voltage profiles differ in length or symbol period")
    return float(np.max(np.abs(observed.samples - stored.samples)))


def comparator_threshold(stored: VoltageProfile, params: SystemParams) -> float:
    """Comparator tolerance in volts: the configured value, else a fraction of the stored peak."""
    if params.comparator_threshold_v is not None:
        return params.comparator_threshold_v
    return params.comparator_threshold_rel * float(np.max(stored.samples))


def authenticate_reader(observed: VoltageProfile, stored: VoltageProfile, epsilon_v: float) -> Decision:
    """Accept when no sample strays more than ``epsilon_v`` from the stored profile."""
    return Decision.ACCEPT if max_deviation(observed, stored) <= epsilon_v else Decision.REJECT


@dataclass(frozen=True)
class BackscatterMessage:
    id: str
    payload: Any = None


@dataclass
class Tag:
    """One protocol session on the tag side.

    ``backscatter`` is only allowed after the reader passed
    ``check_reader`` in the current round.
    """

    tag_id: str
    stored: Optional[VoltageProfile] = None
    _accepted: bool = field(default=False, repr=False)

    def register(self, profile: VoltageProfile) -> None:
        self.stored = profile

    def check_reader(self, observed: VoltageProfile, epsilon_v: float) -> Decision:
        if self.stored is None:
            raise ProtocolError(f"tag {self.tag_id} has no stored profile")
        decision = authenticate_reader(observed, self.stored, epsilon_v)
        self._accepted = decision is Decision.ACCEPT
        return decision

    def backscatter(self, payload: Any = None) -> BackscatterMessage:
        if not self._accepted:
            raise ProtocolError(f"tag {self.tag_id}: reader not authenticated in this round")
        self._accepted = False
        return BackscatterMessage(self.tag_id, payload)
