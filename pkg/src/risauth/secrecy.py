"""Secrecy rate and Monte Carlo average secrecy capacity (ASC)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import complex_normal, received_eve
from .config import ScenarioGeometry, SystemParams, derive_seed
from .reader import noise_free_rss
from .ris import quantize_angles

ASC_MODES = ("trusted", "malicious", "off")
# trials per independently seeded block; fixes the draw layout
BLOCK = 1024


@dataclass(frozen=True)
class SnrPair:
    gamma_r: float
    gamma_e: float

    def __post_init__(self):
        if self.gamma_r < 0 or self.gamma_e < 0:
            raise ValueError("SNR must be >= 0")

    @property
    def capacity_r(self) -> float:
        return float(np.log2(1.0 + self.gamma_r))

    @property
    def capacity_e(self) -> float:
        return float(np.log2(1.0 + self.gamma_e))


def secrecy_rate(pair: SnrPair) -> float:
    """``max(0, log2(1+gamma_R) - log2(1+gamma_E))`` in bits/s/Hz."""
    if pair.gamma_r <= pair.gamma_e:
        return 0.0
    return pair.capacity_r - pair.capacity_e


def snr_pair(state, config, params: SystemParams, geom: ScenarioGeometry,
             uplink_config=None) -> SnrPair:
    """Reader SNR of the backscatter and Eve's SNR of the overheard reply."""
    g_r = noise_free_rss(state, config, params, geom, uplink_config) / params.noise_reader_w
    g_e = abs(received_eve(state, config, params, geom, uplink_config).value) ** 2 / params.noise_eve_w
    return SnrPair(g_r, g_e)


@dataclass(frozen=True)
class AscCurve:
    gamma_r_bar_db: np.ndarray
    asc_bits: np.ndarray
    n_sim: int

    def __post_init__(self):
        if len(self.gamma_r_bar_db) != len(self.asc_bits):
            raise ValueError("grid and ASC lengths differ")
        if np.any(np.asarray(self.asc_bits) < 0):
            raise ValueError("ASC must be >= 0")

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["gamma_r_bar_db", "asc_bits", "n_sim"])
            for g, c in zip(self.gamma_r_bar_db, self.asc_bits):
                w.writerow([repr(float(g)), repr(float(c)), self.n_sim])


def _signal_levels(mode: str, n: int, count: int, seed: int, params: SystemParams,
                   geom: ScenarioGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free received powers ``S_R = P_s|u_down|^2|u_up|^2`` and
    ``S_E = P_s|u_down|^2|t|^2`` for ``count`` channel draws, vectorised over
    trials. A malicious RIS only re-steers the backscatter slot."""
    rng = np.random.default_rng(seed)
    h_rt, h_te = complex_normal(rng, count), complex_normal(rng, count)
    g_r, g_t, g_e = (complex_normal(rng, (count, n)) for _ in range(3))
    x1, x2 = params.pathloss_exp_direct, params.pathloss_exp_ris
    pl_rt = (geom.d_tag_ris_m * geom.d_reader_ris_m) ** -x2
    pl_te = (geom.d_tag_ris_m * geom.d_eve_ris_m) ** -x2
    a = h_rt * geom.d_tag_reader_m ** -x1
    d = h_te * geom.d_tag_eve_m ** -x1
    if mode == "off" or n == 0:
        u_down = u_up = a
        t = d
    elif mode in ("trusted", "malicious"):
        z = np.exp(1j * quantize_angles(np.angle(h_rt)[:, None] - np.angle(g_t * g_r), params.ris_phase_bits))
        u_down = a + np.sum(g_t * z * g_r, 1) * pl_rt
        if mode == "malicious":
            # co-phased charging slot, reply steered to Eve
            z = np.exp(1j * quantize_angles(np.angle(h_te)[:, None] - np.angle(g_t * g_e), params.ris_phase_bits))
        u_up = a + np.sum(g_t * z * g_r, 1) * pl_rt
        t = d + np.sum(g_t * z * g_e, 1) * pl_te
    else:
        raise ValueError(f"unknown RIS mode {mode!r}")
    p = params.source_power_w
    u2 = np.abs(u_down) ** 2
    return p * u2 * np.abs(u_up) ** 2, p * u2 * np.abs(t) ** 2


def _draw_levels(mode, n, k, n_sim, params, geom, master_seed):
    parts_r, parts_e = [], []
    for b, start in enumerate(range(0, n_sim, BLOCK)):
        # no mode in the key: trusted, malicious and off share channel draws
        seed = derive_seed(master_seed, "asc", n, k, b)
        s_r, s_e = _signal_levels(mode, n, min(BLOCK, n_sim - start), seed, params, geom)
        parts_r.append(s_r)
        parts_e.append(s_e)
    return np.concatenate(parts_r), np.concatenate(parts_e)


def compute_asc(mode: str, n_ris: int, grid_db: Sequence[float], n_sim: int,
                params: SystemParams, geom: ScenarioGeometry, master_seed: int,
                with_eve: bool = True) -> AscCurve:
    """Monte Carlo ASC on a grid of target average reader SNRs.

    At grid point ``k`` both noise powers are multiplied by a common factor
    ``c_k`` chosen so that the trial-average reader SNR equals the target;
    this is the same as sweeping the source power. Per trial the rate is
    ``(log2(1+g_R) - log2(1+g_E)) * (g_R > g_E)`` and the curve value is the
    trial mean.
    """
    grid = np.asarray(grid_db, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("SNR grid is empty")
    if n_sim < 1:
        raise ValueError("n_sim must be >= 1")
    if mode not in ASC_MODES:
        raise ValueError(f"unknown RIS mode {mode!r}")
    out = np.empty(grid.size)
    for k, target_db in enumerate(grid):
        s_r, s_e = _draw_levels(mode, n_ris, k, n_sim, params, geom, master_seed)
        c = np.mean(s_r) / (params.noise_reader_w * 10.0 ** (target_db / 10.0))
        g_r = s_r / (params.noise_reader_w * c)
        g_e = s_e / (params.noise_eve_w * c) if with_eve else np.zeros_like(g_r)
        cs = (np.log2(1.0 + g_r) - np.log2(1.0 + g_e)) * (g_r > g_e)
        out[k] = float(np.mean(cs))
    return AscCurve(grid, out, n_sim)
