import dataclasses

import numpy as np
import pytest

from risauth.config import default_geometry, default_params
from risauth.decision import Decision
from risauth.protocol import (initialise, legitimate_reader_trial, legitimate_reader_trial_malicious_ris,
                              legitimate_tag_trial, malicious_config, mutual_authentication_round,
                              trusted_config, with_elements)
from risauth.ris import Strategy

P = default_params()
G = default_geometry()
STATIC = dataclasses.replace(P, temporal_correlation=1.0)


def test_static_channel_always_authenticates_tag_side():
    for seed in range(50):
        out = legitimate_tag_trial(STATIC, G, 100, seed)
        assert out.statistic == 0.0 and out.decision is Decision.ACCEPT and out.is_legitimate
        assert out.kind is None


def test_static_channel_reader_side_only_noise():
    ratios = [legitimate_reader_trial(STATIC, G, 100, s).statistic for s in range(50)]
    assert min(ratios) > 0.99


def test_trusted_config_quantized_and_off():
    s = initialise(with_elements(P, 10), G, 1)
    assert s.config0.strategy is Strategy.OPTIMAL and s.config0.bits == P.ris_phase_bits
    s0 = initialise(with_elements(P, 0), G, 1)
    assert s0.config0.is_off


def test_session_deterministic():
    a, b = initialise(P, G, 5), initialise(P, G, 5)
    assert a.state0 == b.state0 and a.rss_baseline == b.rss_baseline
    assert np.array_equal(a.stored_profile.samples, b.stored_profile.samples)
    assert a.slot(P)[0] == b.slot(P)[0]


def test_epsilon_is_relative_to_stored_peak():
    s = initialise(P, G, 2)
    assert s.epsilon_v == pytest.approx(0.05 * s.stored_profile.samples.max())


def test_legit_decisions_match_thresholds():
    for seed in range(30):
        t = legitimate_reader_trial(P, G, 20, seed)
        assert (t.statistic >= P.rss_ratio_threshold) == (t.decision is Decision.ACCEPT)


def test_legit_more_stable_with_ris():
    dev0 = np.mean([legitimate_reader_trial(P, G, 0, s).decision is Decision.ACCEPT for s in range(300)])
    dev100 = np.mean([legitimate_reader_trial(P, G, 100, s).decision is Decision.ACCEPT for s in range(300)])
    assert dev100 > dev0


def test_malicious_config_strategies():
    s = initialise(P, G, 3)
    state, _ = s.slot(P)
    down, up = malicious_config(state, "eavesdrop", P, G)
    # charging slot stays exactly the trusted config, only the reply is steered
    np.testing.assert_array_equal(down.phases, trusted_config(state, P).phases)
    assert up.strategy is Strategy.EAVESDROP_OPTIMAL
    down, up = malicious_config(state, "destructive", P, G)
    assert down is up and up.strategy is Strategy.DESTRUCTIVE_JAM
    off = malicious_config(initialise(with_elements(P, 0), G, 3).slot(P)[0], "eavesdrop", P, G)
    assert all(c.is_off for c in off)
    with pytest.raises(ValueError):
        malicious_config(state, "nope", P, G)


def test_malicious_ris_hurts_legit_reader():
    acc = np.mean([legitimate_reader_trial_malicious_ris("eavesdrop", P, G, 100, s).decision
                   is Decision.ACCEPT for s in range(200)])
    assert acc < 0.2


def test_full_round():
    r = mutual_authentication_round(STATIC, G, 4)
    assert r.tag_decision is Decision.ACCEPT and r.reader_decision is Decision.ACCEPT
    assert r.message_id == "tag-1"
