"""Attack trial generators.

Every generator shares the legitimate session for the same seed (so the
tag's stored profile and the reader's RSS baseline are the real ones) and
then replaces the legitimate observation at the authentication slot with
what Eve produces from her own position. Eve's links are the ``h_te``,
``h_re`` and ``g_e`` fields of the channel state.

Attacker power
--------------
Eve is assumed to calibrate her transmit power so that the *average* level
she produces matches the legitimate one (otherwise a single RSS or voltage
level test would catch her trivially). The factor ``k`` scaling ``P_s`` is
found once per (kind, N, params, geometry) by Monte Carlo with a fixed seed.
Injection uses ``eve_power_dbm`` and MITM forwards at ``P_s``.

With ``clone=True`` the attacker observes exactly the legitimate channels
(an independent channel evolution from the same registration), which is the
sanity limit where location-based authentication cannot work.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np

from .channel import complex_normal, eve_reader_gain, received_eve, tag_eve_gain
from .config import ScenarioGeometry, SystemParams, derive_seed
from .decision import AttackKind, TrialOutcome
from .protocol import (Session, initialise, malicious_config, observe_reader_side, observe_tag_side,
                       reader_decision, tag_decision, with_elements)
from .reader import estimate_rss, noise_free_rss, ratio_statistic
from .ris import anti_jam_phases, eavesdrop_phases, quantize_angles, random_phases, ris_off, with_resolution
from .secrecy import SnrPair
from .tag import max_deviation, simulate_profile

CALIBRATION_DRAWS = 8192
CALIBRATION_SEED = 20240101

MATCHED_KINDS = (AttackKind.FAKE_READER, AttackKind.IMPERSONATING_TAG, AttackKind.REPLAY,
                 AttackKind.RELAY)


def _calibration_gains(params: SystemParams, geom: ScenarioGeometry, n: int):
    """Vectorised one-way gains (reader-tag, tag-Eve, Eve-reader) under trusted co-phasing."""
    rng = np.random.default_rng(derive_seed(CALIBRATION_SEED, "calibration", n))
    t = CALIBRATION_DRAWS
    h_rt, h_te, h_re = (complex_normal(rng, t) for _ in range(3))
    g_r, g_t, g_e = (complex_normal(rng, (t, n)) for _ in range(3))
    theta = quantize_angles(np.angle(h_rt)[:, None] - np.angle(g_t * g_r), params.ris_phase_bits)
    z = np.exp(1j * theta)
    x1, x2 = params.pathloss_exp_direct, params.pathloss_exp_ris
    u = h_rt * geom.d_tag_reader_m ** -x1 + np.sum(g_t * z * g_r, 1) * (geom.d_tag_ris_m * geom.d_reader_ris_m) ** -x2
    te = h_te * geom.d_tag_eve_m ** -x1 + np.sum(g_t * z * g_e, 1) * (geom.d_tag_ris_m * geom.d_eve_ris_m) ** -x2
    er = h_re * geom.d_reader_eve_m ** -x1 + np.sum(g_r * z * g_e, 1) * (geom.d_reader_ris_m * geom.d_eve_ris_m) ** -x2
    return np.abs(u), np.abs(te), np.abs(er)


@lru_cache(maxsize=256)
def _matched_factor(kind: AttackKind, params: SystemParams, geom: ScenarioGeometry, n: int) -> float:
    u, te, er = _calibration_gains(params, geom, n)
    if kind is AttackKind.FAKE_READER:
        return float(np.mean(u ** 2) / np.mean(te ** 2))
    if kind in (AttackKind.IMPERSONATING_TAG, AttackKind.REPLAY):
        return float(np.mean(u ** 4) / np.mean(er ** 4))
    if kind is AttackKind.RELAY:
        return float(np.mean(u ** 4) / np.mean((te * er) ** 2))
    raise ValueError(f"{kind} has no matched power")


def attacker_power_factor(kind: AttackKind, params: SystemParams, geom: ScenarioGeometry, n: int) -> float:
    """Eve's transmit power divided by ``P_s`` for ``kind`` at ``n`` elements."""
    if kind is AttackKind.MITM:
        return 1.0
    if kind is AttackKind.INJECTION or not params.eve_power_matched:
        return params.eve_power_w / params.source_power_w
    return _matched_factor(kind, params, geom, n)


def composite_gain(kind: AttackKind, state, config, params, geom, uplink_config=None) -> complex:
    """Amplitude gain from Eve's transmitter to the reader, before ``sqrt(power)``.

    Impersonation and replay: ``u_E(down) * u_E(up)`` (Eve backscatters the
    reader's carrier). Relay and MITM: ``t_TE * u_E`` (tag->Eve hop, then
    Eve->reader hop). Injection: ``u_E`` (Eve's own signal). ``uplink_config``
    is the RIS state while replies travel to the reader, if it differs.
    """
    up = config if uplink_config is None else uplink_config
    u_up = eve_reader_gain(state, up, params, geom)
    if kind in (AttackKind.IMPERSONATING_TAG, AttackKind.REPLAY):
        return eve_reader_gain(state, config, params, geom) * u_up
    if kind in (AttackKind.RELAY, AttackKind.MITM):
        return tag_eve_gain(state, up, params, geom) * u_up
    if kind is AttackKind.INJECTION:
        return u_up
    raise ValueError(f"unsupported kind {kind}")


def _clone_session(s: Session, rng_seed: int) -> Session:
    return dataclasses.replace(s, seed=derive_seed(rng_seed, "clone"))


def _reader_outcome(ratio, kind, params) -> TrialOutcome:
    return TrialOutcome(ratio, False, reader_decision(ratio, params.rss_ratio_threshold), kind)


def fake_reader_trial(params, geom, n_ris: int, rng_seed: int, clone: bool = False) -> TrialOutcome:
    """Eve replays the tag's OOK power pattern from her own position.

    The RIS stays co-phased for the legitimate reader, so Eve's cascade adds
    up with effectively random phases.
    """
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    if clone:
        dev = observe_tag_side(_clone_session(s, rng_seed), params, geom)
    else:
        state, cfg = s.slot(params)
        k = attacker_power_factor(AttackKind.FAKE_READER, params, geom, n_ris)
        p = k * params.source_power_w * abs(tag_eve_gain(state, cfg, params, geom)) ** 2
        dev = max_deviation(simulate_profile(s.power_profile, p, params), s.stored_profile)
    return TrialOutcome(dev, False, tag_decision(dev, s.epsilon_v), AttackKind.FAKE_READER)


def _eve_rss(s: Session, clean: complex, params) -> tuple[float, float]:
    rss = estimate_rss(clean, params, derive_seed(s.seed, "reader-noise"))
    return rss, ratio_statistic(s.rss_baseline, rss)


def impersonating_tag_trial(params, geom, n_ris: int, rng_seed: int, clone: bool = False,
                            kind: AttackKind = AttackKind.IMPERSONATING_TAG) -> TrialOutcome:
    """Eve answers with the tag's ID from her position.

    Her backscatter travels reader->Eve->reader, i.e. ``sqrt(k P_s) u_E^2``
    with ``u_E`` the Eve-reader one-way gain under the legitimate RIS config.
    Replay is the same physical event with a recorded waveform.
    """
    if kind not in (AttackKind.IMPERSONATING_TAG, AttackKind.REPLAY):
        raise ValueError(f"unsupported kind {kind}")
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    if clone:
        _, ratio = observe_reader_side(_clone_session(s, rng_seed), params, geom)
    else:
        state, cfg = s.slot(params)
        k = attacker_power_factor(kind, params, geom, n_ris)
        clean = np.sqrt(k * params.source_power_w) * composite_gain(kind, state, cfg, params, geom)
        _, ratio = _eve_rss(s, clean, params)
    return _reader_outcome(ratio, kind, params)


def replay_trial(params, geom, n_ris: int, rng_seed: int, clone: bool = False) -> TrialOutcome:
    return impersonating_tag_trial(params, geom, n_ris, rng_seed, clone, kind=AttackKind.REPLAY)


def relay_mitm_injection_trial(kind: AttackKind, params, geom, n_ris: int, rng_seed: int,
                               clone: bool = False) -> TrialOutcome:
    """Composite gains at the reader, all under the legitimate RIS config:

    Relay      sqrt(k P_s)   * t_TE * u_E   (tag->Eve hop, then Eve->reader hop)
    Mitm       sqrt(P_s)     * t_TE * u_E   (Eve re-transmits at the reader's power)
    Injection  sqrt(P_eve)   * u_E          (Eve's own signal, one hop)
    """
    if kind not in (AttackKind.RELAY, AttackKind.MITM, AttackKind.INJECTION):
        raise ValueError(f"unsupported kind {kind}")
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    if clone:
        _, ratio = observe_reader_side(_clone_session(s, rng_seed), params, geom)
        return _reader_outcome(ratio, kind, params)
    state, cfg = s.slot(params)
    p_eve = attacker_power_factor(kind, params, geom, n_ris) * params.source_power_w
    clean = np.sqrt(p_eve) * composite_gain(kind, state, cfg, params, geom)
    _, ratio = _eve_rss(s, clean, params)
    return _reader_outcome(ratio, kind, params)


def malicious_ris_impersonation_trial(strategy: str, params, geom, n_ris: int, rng_seed: int,
                                      clone: bool = False) -> TrialOutcome:
    """Impersonating Eve while a compromised controller drives the RIS.

    Eve keeps the power she calibrated for a trusted RIS.
    """
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    if clone:
        c = _clone_session(s, rng_seed)
        state, _ = c.slot(params)
        down, up = malicious_config(state, strategy, params, geom)
        _, ratio = observe_reader_side(c, params, geom, state, down, up)
    else:
        state, _ = s.slot(params)
        down, up = malicious_config(state, strategy, params, geom)
        kind = AttackKind.IMPERSONATING_TAG
        k = attacker_power_factor(kind, params, geom, n_ris)
        clean = np.sqrt(k * params.source_power_w) * composite_gain(kind, state, down, params, geom, up)
        _, ratio = _eve_rss(s, clean, params)
    return _reader_outcome(ratio, AttackKind.MALICIOUS_RIS_EAVESDROP if strategy == "eavesdrop"
                           else AttackKind.MALICIOUS_RIS_JAM, params)


def _db(x: float) -> float:
    return 10.0 * np.log10(max(x, np.finfo(float).tiny))


def jamming_trial(malicious_ris: bool, params, geom, n_ris: int, rng_seed: int,
                  jammer: bool = True) -> float:
    """Reader SNR change in dB against the clean trusted-RIS SNR at the same N.

    ``malicious_ris`` turns the RIS itself into the jammer (destructive
    phases, no radiated power). Otherwise Eve radiates ``eve_power_dbm`` and
    the trusted RIS maximises SINR against her.
    """
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    state, cfg = s.slot(params)
    noise = params.noise_reader_w
    snr0 = noise_free_rss(state, cfg, params, geom) / noise
    if malicious_ris:
        down, up = malicious_config(state, "destructive", params, geom)
        return _db(noise_free_rss(state, down, params, geom, up) / noise) - _db(snr0)
    if not jammer:
        return 0.0
    p_j = params.eve_power_w
    if n_ris > 0:
        cfg = anti_jam_phases(state, params, geom, p_j)
    sinr = noise_free_rss(state, cfg, params, geom) / (noise + p_j * abs(eve_reader_gain(state, cfg, params, geom)) ** 2)
    return _db(sinr) - _db(snr0)


def eavesdrop_snrs(state, config, params, geom, uplink_config=None) -> SnrPair:
    """``gamma_R`` from the noise-free reader RSS and ``gamma_E`` from Eve's overheard sample."""
    gamma_r = noise_free_rss(state, config, params, geom, uplink_config) / params.noise_reader_w
    gamma_e = abs(received_eve(state, config, params, geom, uplink_config).value) ** 2 / params.noise_eve_w
    return SnrPair(gamma_r, gamma_e)


def malicious_ris_eavesdrop_trial(knows_csi: bool, params, geom, n_ris: int, rng_seed: int,
                                  trusted: bool = False) -> SnrPair:
    """Reader and Eve SNRs when the RIS works for Eve during the backscatter slot.

    The charging slot stays co-phased for the reader. With CSI the reply is
    steered to Eve, without it the RIS can only scramble its phases.
    ``trusted=True`` gives the reference pair with no compromise.
    """
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    state, cfg = s.slot(params)
    up = cfg
    if not trusted and n_ris > 0:
        if knows_csi:
            up = with_resolution(eavesdrop_phases(state), params.ris_phase_bits)
        else:
            up = random_phases(n_ris, derive_seed(rng_seed, "random-phases"))
    return eavesdrop_snrs(state, cfg, params, geom, up)


def attack_trial(kind: AttackKind, params, geom, n_ris: int, rng_seed: int, clone: bool = False) -> TrialOutcome:
    """Dispatch to the generator for one ROC-style attack kind."""
    if kind is AttackKind.FAKE_READER:
        return fake_reader_trial(params, geom, n_ris, rng_seed, clone)
    if kind in (AttackKind.IMPERSONATING_TAG, AttackKind.REPLAY):
        return impersonating_tag_trial(params, geom, n_ris, rng_seed, clone, kind)
    if kind in (AttackKind.RELAY, AttackKind.MITM, AttackKind.INJECTION):
        return relay_mitm_injection_trial(kind, params, geom, n_ris, rng_seed, clone)
    if kind is AttackKind.MALICIOUS_RIS_EAVESDROP:
        return malicious_ris_impersonation_trial("eavesdrop", params, geom, n_ris, rng_seed, clone)
    if kind is AttackKind.MALICIOUS_RIS_JAM:
        return malicious_ris_impersonation_trial("destructive", params, geom, n_ris, rng_seed, clone)
    raise ValueError(f"{kind} does not produce an authentication statistic")
