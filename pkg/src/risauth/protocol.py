"""Initialisation and authentication rounds between the legitimate reader and tag.

A session registers the tag at slot 0 (stored voltage profile on the tag,
RSS baseline in the reader database) and then runs one authentication slot
on channels evolved with the configured temporal correlation. The RIS is
trusted and re-aligns to the current channels in every slot.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .channel import ChannelState, draw_channels, evolve_channels, received_reader, received_tag
from .config import ScenarioGeometry, SystemParams, derive_seed
from .decision import Decision, TrialOutcome
from .reader import (ReaderDatabase, authenticate_tag, estimate_rss, noise_free_rss,
                     ratio_statistic, register_tag)
from .ris import (RisConfig, destructive_phases, eavesdrop_phases, optimal_phases, ris_off,
                  with_resolution)
from .tag import (PowerProfile, Tag, VoltageProfile, comparator_threshold, default_power_profile,
                  max_deviation, simulate_profile)

TAG_ID = "tag-1"


def with_elements(params: SystemParams, n: int) -> SystemParams:
    if params.ris_elements == n:
        return params
    return dataclasses.replace(params, ris_elements=n)


def trusted_config(state: ChannelState, params: SystemParams) -> RisConfig:
    """Co-phasing at the controller's phase resolution; OFF without elements."""
    if state.n == 0:
        return ris_off()
    return with_resolution(optimal_phases(state), params.ris_phase_bits)


def malicious_config(state: ChannelState, strategy: str, params: SystemParams,
                     geom: ScenarioGeometry) -> tuple[RisConfig, RisConfig]:
    """(carrier slot, backscatter slot) configs of a compromised RIS.

    ``eavesdrop`` leaves the charging slot co-phased, which keeps the tag
    powered and the attack covert, and steers the backscatter slot to Eve.
    ``destructive`` nulls the reader-tag link in both slots.
    """
    if state.n == 0:
        return ris_off(), ris_off()
    if strategy == "eavesdrop":
        return trusted_config(state, params), with_resolution(eavesdrop_phases(state, geom), params.ris_phase_bits)
    if strategy == "destructive":
        cfg = destructive_phases(state, geom, params, params.ris_phase_bits)
        return cfg, cfg
    raise ValueError(f"unknown malicious strategy {strategy!r}")


@dataclass(frozen=True)
class Session:
    state0: ChannelState
    config0: RisConfig
    power_profile: PowerProfile
    stored_profile: VoltageProfile
    rss_baseline: float
    epsilon_v: float
    seed: int

    def slot(self, params: SystemParams) -> tuple[ChannelState, RisConfig]:
        """Channels and trusted RIS config at the authentication slot."""
        state = evolve_channels(self.state0, params.temporal_correlation, derive_seed(self.seed, "evolve"))
        return state, trusted_config(state, params)


def incident_power(state, config, params, geom) -> float:
    return abs(received_tag(state, config, params, geom).value) ** 2


def initialise(params: SystemParams, geom: ScenarioGeometry, rng_seed: int) -> Session:
    """Slot-0 registration over the secure channel.

    The baseline RSS is the noise-free value of the RSS expression: the
    reader has as many samples as it wants during initialisation.
    """
    state0 = draw_channels(derive_seed(rng_seed, "state0"), params)
    cfg0 = trusted_config(state0, params)
    pp = default_power_profile(TAG_ID, params)
    stored = simulate_profile(pp, incident_power(state0, cfg0, params, geom), params)
    rss0 = noise_free_rss(state0, cfg0, params, geom)
    return Session(state0, cfg0, pp, stored, rss0, comparator_threshold(stored, params), rng_seed)


def observe_tag_side(session: Session, params, geom, power_scale: float = 1.0,
                     state=None, config=None) -> float:
    """Max voltage deviation the tag sees when the legitimate reader charges it."""
    if state is None:
        state, config = session.slot(params)
    p = power_scale * incident_power(state, config, params, geom)
    return max_deviation(simulate_profile(session.power_profile, p, params), session.stored_profile)


def observe_reader_side(session: Session, params, geom, state=None, config=None,
                        uplink_config=None) -> tuple[float, float]:
    """(measured RSS, ratio statistic) for the real tag's backscatter."""
    if state is None:
        state, config = session.slot(params)
    clean = received_reader(state, config, params, geom, uplink_config=uplink_config).value
    rss = estimate_rss(clean, params, derive_seed(session.seed, "reader-noise"))
    return rss, ratio_statistic(session.rss_baseline, rss)


def tag_decision(deviation: float, epsilon_v: float) -> Decision:
    return Decision.ACCEPT if deviation <= epsilon_v else Decision.REJECT


def reader_decision(ratio: float, threshold: float) -> Decision:
    return Decision.ACCEPT if ratio >= threshold else Decision.REJECT


def legitimate_tag_trial(params, geom, n_ris: int, rng_seed: int) -> TrialOutcome:
    """The tag checks the genuine reader at slot j."""
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    dev = observe_tag_side(s, params, geom)
    return TrialOutcome(dev, True, tag_decision(dev, s.epsilon_v))


def legitimate_reader_trial(params, geom, n_ris: int, rng_seed: int) -> TrialOutcome:
    """The reader checks the genuine tag at slot j."""
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    _, ratio = observe_reader_side(s, params, geom)
    return TrialOutcome(ratio, True, reader_decision(ratio, params.rss_ratio_threshold))


def legitimate_reader_trial_malicious_ris(strategy: str, params, geom, n_ris: int,
                                          rng_seed: int) -> TrialOutcome:
    """Genuine tag, but a compromised controller sets the RIS at slot j."""
    params = with_elements(params, n_ris)
    s = initialise(params, geom, rng_seed)
    state, _ = s.slot(params)
    down, up = malicious_config(state, strategy, params, geom)
    _, ratio = observe_reader_side(s, params, geom, state, down, up)
    return TrialOutcome(ratio, True, reader_decision(ratio, params.rss_ratio_threshold))


@dataclass
class RoundResult:
    reader_decision: Decision
    tag_decision: Decision
    message_id: str | None


def mutual_authentication_round(params, geom, rng_seed: int) -> RoundResult:
    """Full round with the device objects: registration, tag checks reader,
    tag backscatters, reader checks tag.

    Slower than the trial functions; used as the reference flow.
    """
    s = initialise(params, geom, rng_seed)
    db = register_tag(ReaderDatabase(), TAG_ID, s.rss_baseline, s.power_profile)
    tag = Tag(TAG_ID)
    tag.register(s.stored_profile)

    state, cfg = s.slot(params)
    observed = simulate_profile(s.power_profile, incident_power(state, cfg, params, geom), params)
    t_dec = tag.check_reader(observed, s.epsilon_v)
    if t_dec is not Decision.ACCEPT:
        return RoundResult(Decision.REJECT, t_dec, None)
    msg = tag.backscatter()
    rss, _ = observe_reader_side(s, params, geom, state, cfg)
    r_dec = authenticate_tag(db, msg.id, rss, params.rss_ratio_threshold)
    return RoundResult(r_dec, t_dec, msg.id)
