"""RIS phase configurations: trusted co-phasing and the compromised strategies."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelState, direct_term, tag_reader_gain
from .config import ScenarioGeometry, SystemParams, default_params

TWO_PI = 2.0 * np.pi


class Strategy(enum.Enum):
    OPTIMAL = "optimal"
    QUANTIZED = "quantized"
    RANDOM = "random"
    DESTRUCTIVE_JAM = "destructive-jam"
    EAVESDROP_OPTIMAL = "eavesdrop-optimal"
    ANTI_JAM = "anti-jam"
    OFF = "off"


def wrap_phase(theta) -> np.ndarray:
    out = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    out[out >= TWO_PI] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class RisConfig:
    phases: np.ndarray
    strategy: Strategy
    bits: Optional[int] = None

    def __post_init__(self):
        ph = wrap_phase(np.atleast_1d(self.phases)) if np.size(self.phases) else np.zeros(0)
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    @property
    def is_off(self) -> bool:
        return self.strategy is Strategy.OFF

    def __len__(self):
        return len(self.phases)


def ris_off(n: int = 0) -> RisConfig:
    return RisConfig(np.zeros(n), Strategy.OFF)


def _require_elements(state: ChannelState) -> None:
    if state.n == 0:
        raise ValueError("strategy needs at least one RIS element")


def optimal_phases(state: ChannelState, geom: Optional[ScenarioGeometry] = None) -> RisConfig:
    """Co-phase every reader-RIS-tag term with the direct reader-tag link.

    Path loss is a positive real factor, so the aligning phases do not depend
    on the geometry.
    """
    _require_elements(state)
    theta = -np.angle(state.g_t * state.g_r) + np.angle(state.h_rt)
    return RisConfig(theta, Strategy.OPTIMAL)


def quantize_phases(config: RisConfig, bits: int) -> RisConfig:
    """Round each phase to the nearest multiple of ``2*pi / 2**bits``."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    levels = 2 ** bits
    step = TWO_PI / levels
    idx = np.mod(np.round(config.phases / step), levels)
    return RisConfig(idx * step, Strategy.QUANTIZED, bits)


def with_resolution(config: RisConfig, bits: int) -> RisConfig:
    """Apply hardware phase resolution; ``bits == 0`` keeps phases continuous.

    The producing strategy is kept so experiments can still report it.
    """
    if bits == 0 or config.is_off or len(config) == 0:
        return config
    q = quantize_phases(config, bits)
    return RisConfig(q.phases, config.strategy, bits)


def eavesdrop_phases(state: ChannelState, geom: Optional[ScenarioGeometry] = None) -> RisConfig:
    """Co-phase the tag-RIS-Eve cascade with the direct tag-Eve link."""
    _require_elements(state)
    theta = -np.angle(state.g_t * state.g_e) + np.angle(state.h_te)
    return RisConfig(theta, Strategy.EAVESDROP_OPTIMAL)


def random_phases(n: int, rng_seed: int) -> RisConfig:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return RisConfig(rng.uniform(0.0, TWO_PI, n), Strategy.RANDOM)


def _closure_angles(target: complex, r: np.ndarray) -> np.ndarray:
    """Angles ``phi`` minimising ``|target - sum r_n e^{j phi_n}|``.

    When the magnitudes can close the polygon the residual is zero: elements
    are placed largest first, each leaving a remainder that the rest can still
    reach (an annulus ``[m, M]`` of attainable sums).
    """
    n = len(r)
    phi = np.zeros(n)
    total = r.sum()
    if total <= abs(target):
        phi[:] = np.angle(target)
        return phi
    order = np.argsort(-r, kind="stable")
    rs = r[order]
    suffix = np.concatenate([np.cumsum(rs[::-1])[::-1], [0.0]])
    rem = complex(target)
    for k in range(n):
        rk = rs[k]
        mag = abs(rem)
        base = np.angle(rem) if mag > 0 else 0.0
        if k == n - 1:
            phi[order[k]] = base
            break
        hi_rest = suffix[k + 1]
        lo_rest = max(0.0, 2.0 * rs[k + 1] - hi_rest)
        lo, hi = abs(mag - rk), mag + rk
        a, b = max(lo, lo_rest), min(hi, hi_rest)
        if a <= b:
            q = 0.5 * (a + b)
        else:
            q = lo_rest if hi < lo_rest else hi_rest
            q = min(max(q, lo), hi)
        if mag == 0.0 or rk == 0.0:
            alpha = 0.0
        else:
            c = (mag * mag + rk * rk - q * q) / (2.0 * mag * rk)
            alpha = float(np.arccos(np.clip(c, -1.0, 1.0)))
        phi[order[k]] = base + alpha
        rem = rem - rk * np.exp(1j * (base + alpha))
    return phi


def destructive_phases(state: ChannelState, geom: ScenarioGeometry,
                       params: Optional[SystemParams] = None, bits: int = 0) -> RisConfig:
    """Phases that cancel the reader-tag gain ``a + b`` as far as possible.

    If the cascade cannot outweigh the direct link the whole cascade is
    anti-phased against it, giving ``|a| - sum|c_n|``. Otherwise the cascade
    terms are arranged into a closed polygon with ``-a`` and the gain is zero.

    With ``bits > 0`` the phases are rounded to the ``2**bits`` grid and then
    refined element by element on that grid, since plain rounding leaves a
    residual far larger than a weak direct link.
    """
    _require_elements(state)
    params = params or default_params()
    a = direct_term(state, params, geom)
    pl = (geom.d_tag_ris_m * geom.d_reader_ris_m) ** -params.pathloss_exp_ris
    c = state.g_t * state.g_r * pl
    theta = _closure_angles(-a, np.abs(c)) - np.angle(c)
    if bits == 0:
        return RisConfig(theta, Strategy.DESTRUCTIVE_JAM)
    levels = 2 ** bits
    grid = np.exp(1j * TWO_PI * np.arange(levels) / levels)
    idx = np.mod(np.round(wrap_phase(theta) / (TWO_PI / levels)).astype(int), levels)
    total = a + np.sum(c * grid[idx])
    for _ in range(4):
        changed = False
        for n in range(state.n):
            cand = np.abs(total - c[n] * grid[idx[n]] + c[n] * grid)
            best = int(np.argmin(cand))
            if cand[best] < cand[idx[n]]:
                total += c[n] * (grid[best] - grid[idx[n]])
                idx[n] = best
                changed = True
        if not changed:
            break
    return RisConfig(idx * (TWO_PI / levels), Strategy.DESTRUCTIVE_JAM, bits)


def anti_jam_phases(state: ChannelState, params: SystemParams, geom: ScenarioGeometry,
                    jammer_power_w: float, levels: int = 16, sweeps: int = 3) -> RisConfig:
    """Coordinate ascent on the reader SINR against a jammer at Eve's position.

    Starts from legitimate co-phasing and updates one element at a time over
    ``levels`` discrete phases. The objective is
    ``|a+b|^4 / (noise + P_j |eve->reader gain|^2)``.
    """
    _require_elements(state)
    grid = np.exp(1j * TWO_PI * np.arange(levels) / levels)
    start = quantize_phases(optimal_phases(state), int(np.log2(levels)))
    theta_idx = np.round(start.phases / (TWO_PI / levels)).astype(int) % levels

    pl_s = (geom.d_tag_ris_m * geom.d_reader_ris_m) ** -params.pathloss_exp_ris
    pl_j = (geom.d_reader_ris_m * geom.d_eve_ris_m) ** -params.pathloss_exp_ris
    c = state.g_t * state.g_r * pl_s
    e = state.g_e * state.g_r * pl_j
    z = grid[theta_idx]
    sig = direct_term(state, params, geom) + np.sum(c * z)
    jam = state.h_re * geom.d_reader_eve_m ** -params.pathloss_exp_direct + np.sum(e * z)
    noise = params.noise_reader_w
    for _ in range(sweeps):
        changed = False
        for n in range(state.n):
            zn = grid[theta_idx[n]]
            s_rest = sig - c[n] * zn
            j_rest = jam - e[n] * zn
            s_c = s_rest + c[n] * grid
            j_c = j_rest + e[n] * grid
            score = np.abs(s_c) ** 4 / (noise + jammer_power_w * np.abs(j_c) ** 2)
            best = int(np.argmax(score))
            if best != theta_idx[n]:
                changed = True
                theta_idx[n] = best
                sig, jam = s_c[best], j_c[best]
        if not changed:
            break
    return RisConfig(theta_idx * (TWO_PI / levels), Strategy.ANTI_JAM, int(np.log2(levels)))


def one_way_gain(state, config, params, geom) -> float:
    """``|a + b|`` under ``config``."""
    return abs(tag_reader_gain(state, config, params, geom))



def quantize_angles(theta, bits: int) -> np.ndarray:
    """Array form of :func:`quantize_phases` without wrapping; ``bits == 0`` is a no-op."""
    theta = np.asarray(theta, dtype=float)
    if bits == 0:
        return theta
    step = TWO_PI / 2 ** bits
    return np.round(theta / step) * step
