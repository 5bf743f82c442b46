"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``python -m pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import itertools
import time

import numpy as np
import pytest

from conftest import random_state
from risauth import adversary, protocol
from risauth.adversary import AttackKind
from risauth.channel import received_reader
from risauth.config import default_geometry, default_params
from risauth.experiments import ExperimentSpec, run_experiment, write_result
from risauth.metrics import Direction, build_roc
from risauth.reader import measure_rss, rss_ratio
from risauth.ris import RisConfig, Strategy, optimal_phases, ris_off
from risauth.tag import PowerProfile, peak_voltage, simulate_profile

P = default_params()
G = default_geometry()
TRIALS = 10_000


@pytest.fixture
def report(capsys):
    def _report(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail
    return _report


def _rss_oracle(s, theta, p, g):
    """|sqrt(P)(a+b)^2|^2 written out from the channel coefficients."""
    a = s.h_rt * g.d_tag_reader_m ** -p.pathloss_exp_direct
    b = np.sum(s.g_t * np.exp(1j * theta) * s.g_r, axis=-1) * (g.d_tag_ris_m * g.d_reader_ris_m) ** -p.pathloss_exp_ris
    return p.source_power_w * np.abs(a + b) ** 4


def test_c1_rss_oracle_equivalence(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        n = (0, 1, 2, 20, 100)[i % 5]
        s = random_state(rng, n)
        cfg = ris_off() if n == 0 else RisConfig(rng.uniform(0, 2 * np.pi, n), Strategy.RANDOM)
        m = measure_rss(s, cfg, P, G)
        ref = abs(received_reader(s, cfg, P, G).value) ** 2
        theta = np.zeros(0) if n == 0 else cfg.phases
        worst = max(worst, abs(m - ref) / ref, abs(m - _rss_oracle(s, theta, P, G)) / ref)
    dt = time.perf_counter() - t0
    report(1, worst < 1e-10 and dt < 5, f"max rel err {worst:.2e}, {dt:.2f} s")


def test_c2_bruteforce_phase_optimality(report):
    rng = np.random.default_rng(2)
    grid = np.arange(16) * (2 * np.pi / 16)
    t0 = time.perf_counter()
    worst = -np.inf
    for i in range(100):
        n = 1 + i % 3
        s = random_state(rng, n)
        cont = measure_rss(s, optimal_phases(s), P, G)
        combos = np.array(list(itertools.product(grid, repeat=n)))
        best = float(np.max(_rss_oracle(s, combos, P, G)))
        worst = max(worst, (best - cont) / cont)
    dt = time.perf_counter() - t0
    report(2, worst <= 1e-12 and dt < 30, f"grid best exceeds continuous by at most {worst:.2e} rel, {dt:.2f} s")


def test_c3_rc_closed_forms(report):
    tau = P.rc_time_constant_s
    p_in = 1e-3
    vp = peak_voltage(p_in, P)
    worst = 0.0
    for t in (tau / 2, tau, 2 * tau, 10 * tau):
        charge = simulate_profile(PowerProfile.from_bitstring("1", t), p_in, P).samples[0]
        worst = max(worst, abs(charge - vp * (1 - np.exp(-t / tau))) / (vp * (1 - np.exp(-t / tau))))
        # saturate, then discharge for t
        v = simulate_profile(PowerProfile.from_bitstring("1" * 400 + "0", t), p_in, P).samples
        v0 = v[-2]
        worst = max(worst, abs(v[-1] - v0 * np.exp(-t / tau)) / (v0 * np.exp(-t / tau)))
    at_tau = simulate_profile(PowerProfile.from_bitstring("1", tau), p_in, P).samples[0]
    exact = (1 - np.exp(-1)) * np.sqrt(P.rectifier_efficiency * p_in * 1000.0)
    worst = max(worst, abs(at_tau - exact) / exact)
    report(3, worst < 1e-12, f"max rel err {worst:.2e}")


def test_c4_ratio_properties(report):
    rng = np.random.default_rng(4)
    b = 10.0 ** rng.uniform(-15, 5, 100_000)
    o = 10.0 ** rng.uniform(-15, 5, 100_000)
    c = 10.0 ** rng.uniform(-6, 6, 100_000)
    r = rss_ratio(b, o)
    in_range = bool(np.all((r > 0) & (r <= 1)))
    symmetric = bool(np.array_equal(r, rss_ratio(o, b)))
    scale = float(np.max(np.abs(rss_ratio(c * b, c * o) - r) / r))
    identity = bool(np.all(rss_ratio(b, b) == 1.0))
    ok = in_range and symmetric and scale < 1e-12 and identity
    report(4, ok, f"range {in_range}, symmetric {symmetric}, scale err {scale:.1e}, identity {identity}")


def _roc_aucs(name):
    t0 = time.perf_counter()
    res = run_experiment(ExperimentSpec(name, trials=TRIALS, seed=42))
    aucs = [res.summary["results"]["auc"][str(n)] for n in (0, 20, 50, 100)]
    return aucs, time.perf_counter() - t0


@pytest.mark.parametrize("name", ["roc-tag", "roc-reader"])
def test_c5_auc_ordering(report, name):
    aucs, dt = _roc_aucs(name)
    ok = all(x < y for x, y in zip(aucs, aucs[1:])) and aucs[-1] > 0.97 and dt < 180
    report(5, ok, f"{name} AUC N=0/20/50/100 = {', '.join(f'{a:.4f}' for a in aucs)}, {dt:.0f} s")


def test_c6_distance_trend(report):
    t0 = time.perf_counter()
    res = run_experiment(ExperimentSpec("distance-table", trials=TRIALS, seed=42, n_ris_list=(0, 100)))
    dt = time.perf_counter() - t0
    acc = res.summary["results"]["accuracy"]
    drop = {n: 100 * (acc[n]["2.0"] - acc[n]["6.0"]) for n in ("0", "100")}
    ok = drop["100"] <= 2.0 and drop["0"] >= 3.0 and dt < 300
    report(6, ok, f"drop 2 m -> 6 m: N=100 {drop['100']:.2f} pts, No-RIS {drop['0']:.2f} pts, {dt:.0f} s")


def test_c7_asc_orderings(report):
    t0 = time.perf_counter()
    res = run_experiment(ExperimentSpec("asc", trials=TRIALS, seed=42))
    dt = time.perf_counter() - t0
    asc = res.summary["results"]["asc_bits"]
    tr = np.array([asc["trusted"][str(n)] for n in (0, 20, 50, 100)])
    mal = np.array([asc["malicious"][str(n)] for n in (0, 20, 50, 100)])
    no_ris = tr[0]
    checks = {
        "trusted nondecreasing in N": bool(np.all(np.diff(tr, axis=0) >= 0)),
        "trusted >= No-RIS": bool(np.all(tr >= no_ris)),
        "malicious <= No-RIS": bool(np.all(mal <= no_ris)),
        "nonnegative": bool(np.all(tr >= 0) and np.all(mal >= 0)),
        "gap grows": bool(np.all(np.diff(tr - mal, axis=0) >= 0)),
    }
    ok = all(checks.values()) and dt < 300
    bad = [k for k, v in checks.items() if not v]
    report(7, ok, f"{'all orderings hold' if not bad else 'violated: ' + ', '.join(bad)}; "
                  f"ASC at 30 dB trusted {tr[-1, -1]:.2f}, malicious {mal[-1, -1]:.3f} bits; {dt:.0f} s")


def test_c8_malicious_ris_auc(report):
    t0 = time.perf_counter()
    res = run_experiment(ExperimentSpec("roc-malicious-ris", trials=TRIALS, seed=42, strategy="eavesdrop"))
    dt = time.perf_counter() - t0
    auc = {int(k): v for k, v in res.summary["results"]["auc"].items()}
    ok = auc[20] > auc[50] > auc[100] and auc[100] < auc[0] and dt < 180
    report(8, ok, f"AUC N=0/20/50/100 = {auc[0]:.4f}, {auc[20]:.4f}, {auc[50]:.4f}, {auc[100]:.4f}, {dt:.0f} s")


def test_c9_determinism(report, tmp_path):
    names = ("roc-tag", "tag-power-density", "roc-reader", "attacker-density", "distance-table", "asc",
             "roc-malicious-ris")
    same = True
    for name in names:
        spec = ExperimentSpec(name, trials=200, seed=7, n_ris_list=(0, 20))
        outs = []
        for run, threads in enumerate((1, 1, 2)):
            d = tmp_path / f"{name}-{run}"
            write_result(run_experiment(spec, threads=threads), d)
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "timing.json"})
        same &= outs[0] == outs[1] == outs[2]
    report(9, same, "CSV and summary JSON byte-identical over repeat runs and 1 vs 2 workers"
                    if same else "outputs differ")


# generator -> (legitimate stream, clone stream, direction)
def _clones():
    tag = Direction.LOWER_IS_AUTHENTIC
    rd = Direction.HIGHER_IS_AUTHENTIC
    legit_t = protocol.legitimate_tag_trial
    legit_r = protocol.legitimate_reader_trial
    out = {
        "fake-reader": (legit_t, lambda p, g, n, s: adversary.fake_reader_trial(p, g, n, s, clone=True), tag),
        "impersonating-tag": (legit_r, lambda p, g, n, s: adversary.impersonating_tag_trial(p, g, n, s, clone=True), rd),
        "replay": (legit_r, lambda p, g, n, s: adversary.replay_trial(p, g, n, s, clone=True), rd),
    }
    for kind in (AttackKind.RELAY, AttackKind.MITM, AttackKind.INJECTION):
        out[kind.value] = (legit_r, lambda p, g, n, s, k=kind: adversary.relay_mitm_injection_trial(
            k, p, g, n, s, clone=True), rd)
    for strat in ("eavesdrop", "destructive"):
        out[f"malicious-ris-{strat}"] = (
            lambda p, g, n, s, st=strat: protocol.legitimate_reader_trial_malicious_ris(st, p, g, n, s),
            lambda p, g, n, s, st=strat: adversary.malicious_ris_impersonation_trial(st, p, g, n, s, clone=True),
            rd)
    return out


def test_c10_clone_limit(report):
    n = 20
    worst, lines = 0.0, []
    cache = {}
    for name, (legit, clone, direction) in _clones().items():
        if legit not in cache:
            cache[legit] = [legit(P, G, n, i).statistic for i in range(TRIALS)]
        attack = [clone(P, G, n, 10 ** 7 + i).statistic for i in range(TRIALS)]
        auc = build_roc(cache[legit], attack, direction).auc
        worst = max(worst, abs(auc - 0.5))
        lines.append(f"{name} {auc:.3f}")
    report(10, worst <= 0.03, f"clone AUCs at N={n}: " + ", ".join(lines))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
