"""Rayleigh channel draws and the received-signal models at tag, reader and Eve.

Stored gains are unit-variance small-scale fading only. Path loss ``d**-chi`` is
applied on amplitudes when a signal is evaluated: the direct exponent for
point-to-point hops, the RIS exponent for each cascade term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .config import ScenarioGeometry, SystemParams

if TYPE_CHECKING:
    from .ris import RisConfig

# four-term expansion vs. product of one-way gains, relative to the term magnitudes
EXPANSION_RTOL = 1e-10


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=complex).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ChannelState:
    """Fading gains of every link for one time slot.

    Reciprocal links keep a single value: ``h_rt`` serves reader->tag and
    tag->reader, ``g_r`` reader<->RIS, ``g_t`` tag<->RIS, ``g_e`` RIS<->Eve.
    """

    h_rt: complex
    g_r: np.ndarray
    g_t: np.ndarray
    h_te: complex
    h_re: complex
    g_e: np.ndarray

    def __post_init__(self):
        for name in ("g_r", "g_t", "g_e"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        for name in ("h_rt", "h_te", "h_re"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if not (len(self.g_r) == len(self.g_t) == len(self.g_e)):
            raise ValueError("cascade vectors must share one length")

    @property
    def n(self) -> int:
        return len(self.g_r)

    def __eq__(self, other):
        if not isinstance(other, ChannelState):
            return NotImplemented
        return (self.h_rt == other.h_rt and self.h_te == other.h_te and self.h_re == other.h_re
                and np.array_equal(self.g_r, other.g_r) and np.array_equal(self.g_t, other.g_t)
                and np.array_equal(self.g_e, other.g_e))

    __hash__ = None


@dataclass(frozen=True)
class SignalSample:
    value: complex
    noise_var_w: float

    def __post_init__(self):
        if self.noise_var_w < 0:
            raise ValueError("noise variance must be >= 0")


def complex_normal(rng: np.random.Generator, size=None):
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) / np.sqrt(2.0)


def draw_from(rng: np.random.Generator, n: int) -> ChannelState:
    # draw order is part of the reproducibility contract
    h_rt = complex_normal(rng)
    g_r = complex_normal(rng, n)
    g_t = complex_normal(rng, n)
    h_te = complex_normal(rng)
    h_re = complex_normal(rng)
    g_e = complex_normal(rng, n)
    return ChannelState(h_rt, g_r, g_t, h_te, h_re, g_e)


def draw_channels(rng_seed: int, params: SystemParams, n: Optional[int] = None) -> ChannelState:
    """Independent Rayleigh draw of every link. ``n`` overrides ``params.ris_elements``."""
    n = params.ris_elements if n is None else n
    return draw_from(np.random.default_rng(rng_seed), n)


def evolve_channels(state: ChannelState, rho: float, rng_seed: int) -> ChannelState:
    """First-order Gauss-Markov step ``h' = rho*h + sqrt(1-rho^2)*e``."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 1.0:
        return state
    fresh = draw_from(np.random.default_rng(rng_seed), state.n)
    s = np.sqrt(1.0 - rho * rho)
    return ChannelState(
        h_rt=rho * state.h_rt + s * fresh.h_rt,
        g_r=rho * state.g_r + s * fresh.g_r,
        g_t=rho * state.g_t + s * fresh.g_t,
        h_te=rho * state.h_te + s * fresh.h_te,
        h_re=rho * state.h_re + s * fresh.h_re,
        g_e=rho * state.g_e + s * fresh.g_e,
    )


# ---------------------------------------------------------------------------
# composite one-way gains
# ---------------------------------------------------------------------------

def phasors(state: ChannelState, config: Optional["RisConfig"]) -> np.ndarray:
    """``e^{j theta_n}`` per element; zeros when the RIS is switched off."""
    if config is None or config.is_off:
        return np.zeros(state.n, dtype=complex)
    if len(config.phases) != state.n:
        raise ValueError(f"RIS config has {len(config.phases)} phases, channel has {state.n} elements")
    return np.exp(1j * config.phases)


def direct_term(state: ChannelState, params: SystemParams, geom: ScenarioGeometry) -> complex:
    """``a = h_RT * d_RT^-chi1``."""
    return state.h_rt * geom.d_tag_reader_m ** -params.pathloss_exp_direct


def cascade_term(state, config, params, geom) -> complex:
    """``b = sum_n g_t e^{j theta} g_r (d_T-RIS * d_R-RIS)^-chi2``."""
    pl = (geom.d_tag_ris_m * geom.d_reader_ris_m) ** -params.pathloss_exp_ris
    return complex(np.sum(state.g_t * phasors(state, config) * state.g_r) * pl)


def tag_reader_gain(state, config, params, geom) -> complex:
    """One-way reader<->tag gain ``a + b``; identical in both directions."""
    return direct_term(state, params, geom) + cascade_term(state, config, params, geom)


def tag_eve_gain(state, config, params, geom) -> complex:
    """One-way tag<->Eve gain through the direct link and the RIS."""
    pl_d = geom.d_tag_eve_m ** -params.pathloss_exp_direct
    pl_c = (geom.d_tag_ris_m * geom.d_eve_ris_m) ** -params.pathloss_exp_ris
    return complex(state.h_te * pl_d + np.sum(state.g_t * phasors(state, config) * state.g_e) * pl_c)


def eve_reader_gain(state, config, params, geom) -> complex:
    """One-way Eve<->reader gain through the direct link and the RIS."""
    pl_d = geom.d_reader_eve_m ** -params.pathloss_exp_direct
    pl_c = (geom.d_reader_ris_m * geom.d_eve_ris_m) ** -params.pathloss_exp_ris
    return complex(state.h_re * pl_d + np.sum(state.g_r * phasors(state, config) * state.g_e) * pl_c)


# ---------------------------------------------------------------------------
# received signals
# ---------------------------------------------------------------------------

def received_tag(state, config, params, geom) -> SignalSample:
    """Noise-free downlink sample at the tag (tag noise is neglected)."""
    u = tag_reader_gain(state, config, params, geom)
    return SignalSample(np.sqrt(params.source_power_w) * u, 0.0)


def backscatter_terms(state, config, params, geom,
                      uplink_config=None) -> tuple[complex, complex, complex, complex]:
    """The four round-trip terms: direct-direct, the two mixed ones, cascade-cascade.

    ``config`` shapes the reader->tag carrier. The tag->reader reply uses
    ``uplink_config`` when the RIS switches configuration between the two
    slots, otherwise the same one.
    """
    a = direct_term(state, params, geom)
    b_down = cascade_term(state, config, params, geom)
    b_up = b_down if uplink_config is None else cascade_term(state, uplink_config, params, geom)
    return a * a, a * b_up, b_down * a, b_down * b_up


def received_reader(state, config, params, geom, include_noise: bool = False,
                    rng_seed: Optional[int] = None, uplink_config=None) -> SignalSample:
    """Backscattered sample at the reader with a unit-power tag symbol.

    The four-term expansion is summed explicitly and checked against
    ``(a+b_down)(a+b_up)``; a mismatch raises ``ArithmeticError``.
    """
    a = direct_term(state, params, geom)
    b_down = cascade_term(state, config, params, geom)
    b_up = b_down if uplink_config is None else cascade_term(state, uplink_config, params, geom)
    total = sum(backscatter_terms(state, config, params, geom, uplink_config))
    scale = (abs(a) + abs(b_down)) * (abs(a) + abs(b_up))
    if abs(total - (a + b_down) * (a + b_up)) > EXPANSION_RTOL * max(scale, np.finfo(float).tiny):
        raise ArithmeticError("round-trip expansion disagrees with the product of one-way gains")
    value = np.sqrt(params.source_power_w) * total
    noise_var = params.noise_reader_w
    if include_noise:
        rng = np.random.default_rng(rng_seed)
        value = value + np.sqrt(noise_var) * complex_normal(rng)
    return SignalSample(complex(value), noise_var)


def received_eve(state, config, params, geom, uplink_config=None) -> SignalSample:
    """Noise-free sample Eve overhears from the tag's backscatter.

    The tag re-radiates what reached it over the reader link, so the tag->Eve
    gain (under the uplink configuration) is scaled by ``sqrt(P_s) * |a+b|``.
    """
    u = tag_reader_gain(state, config, params, geom)
    t = tag_eve_gain(state, config if uplink_config is None else uplink_config, params, geom)
    return SignalSample(complex(np.sqrt(params.source_power_w) * abs(u) * t), params.noise_eve_w)
