import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risauth.metrics import Direction, RocCurve, accuracy, build_roc, rate_at_far

vals = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=60)


def brute_auc(legit, attack, higher=True):
    """P(legit more authentic than attack) + 0.5 P(tie), over all pairs."""
    l = np.asarray(legit)[:, None]
    a = np.asarray(attack)[None, :]
    if not higher:
        l, a = -l, -a
    return float(np.mean((l > a) + 0.5 * (l == a)))


def test_perfect_separation():
    r = build_roc([0.9, 0.95, 1.0], [0.1, 0.2])
    assert r.auc == 1.0
    assert rate_at_far(r, 0.0) == 1.0


def test_two_point_curve():
    r = build_roc([1.0], [0.0], Direction.HIGHER_IS_AUTHENTIC)
    pts = set(zip(r.fpr, r.tpr))
    assert (0.0, 1.0) in pts and (0.0, 0.0) in pts and (1.0, 1.0) in pts


def test_identical_streams_half():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(10_000)
    y = rng.standard_normal(10_000)
    assert build_roc(x, y).auc == pytest.approx(0.5, abs=0.02)
    assert build_roc(x, x).auc == pytest.approx(0.5, abs=1e-12)


def test_lower_is_authentic():
    r = build_roc([0.01, 0.02], [0.5, 0.7], Direction.LOWER_IS_AUTHENTIC)
    assert r.auc == 1.0
    assert build_roc([0.01, 0.02], [0.5, 0.7]).auc == 0.0


def test_empty_rejected():
    with pytest.raises(ValueError):
        build_roc([], [1.0])
    with pytest.raises(ValueError):
        build_roc([1.0], [])


@settings(max_examples=200, deadline=None)
@given(vals, vals, st.sampled_from(list(Direction)))
def test_invariants(legit, attack, direction):
    r = build_roc(legit, attack, direction)
    assert len(r.thresholds) == len(r.tpr) == len(r.fpr)
    assert np.all((r.tpr >= 0) & (r.tpr <= 1) & (r.fpr >= 0) & (r.fpr <= 1))
    assert np.all(np.diff(r.tpr) >= 0) and np.all(np.diff(r.fpr) >= 0)
    assert (r.fpr[0], r.tpr[0]) == (0.0, 0.0) and (r.fpr[-1], r.tpr[-1]) == (1.0, 1.0)
    trap = float(np.sum(np.diff(r.fpr) * (r.tpr[1:] + r.tpr[:-1]) / 2))
    assert r.auc == pytest.approx(trap, abs=1e-9)
    assert r.auc == pytest.approx(brute_auc(legit, attack, direction is Direction.HIGHER_IS_AUTHENTIC), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(vals, vals)
def test_swap_gives_complement(legit, attack):
    assert build_roc(attack, legit).auc == pytest.approx(1 - build_roc(legit, attack).auc, abs=1e-9)


grid_vals = st.lists(st.integers(-10 ** 5, 10 ** 5).map(lambda k: k / 8), min_size=1, max_size=60)


@settings(max_examples=100, deadline=None)
@given(grid_vals, grid_vals)
def test_monotone_transform_invariance(legit, attack):
    # cubes of k/8 with |k| <= 1e5 are exact in double precision, so order is kept
    f = lambda x: np.asarray(x) ** 3 + 2.0
    base = build_roc(legit, attack).auc
    assert build_roc(f(legit), f(attack)).auc == pytest.approx(base, abs=1e-9)
    neg = lambda x: -np.asarray(x)
    assert build_roc(neg(legit), neg(attack), Direction.LOWER_IS_AUTHENTIC).auc == pytest.approx(base, abs=1e-9)


def test_rate_at_far_examples():
    curve = RocCurve(np.array([np.inf, 0.5, 0.3, -np.inf]), np.array([0.0, 0.8, 0.9, 1.0]),
                     np.array([0.0, 0.1, 0.3, 1.0]), 0.0)
    assert rate_at_far(curve, 0.2) == pytest.approx(0.85)
    assert rate_at_far(curve, 1.0) == 1.0
    with pytest.raises(ValueError):
        rate_at_far(curve, 1.5)


@settings(max_examples=100, deadline=None)
@given(vals, vals, st.floats(0, 1))
def test_rate_at_far_bounded(legit, attack, far):
    r = build_roc(legit, attack)
    assert 0.0 <= rate_at_far(r, far) <= 1.0
    assert rate_at_far(r, 1.0) == 1.0


def test_accuracy_inclusive():
    assert accuracy([0.9, 0.5], [0.1, 0.9], 0.9) == 0.5
    assert accuracy([0.01], [0.01], 0.01, Direction.LOWER_IS_AUTHENTIC) == 0.5


def test_csv(tmp_path):
    r = build_roc([1.0, 0.5], [0.2])
    r.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "threshold,tpr,fpr" and lines[1].startswith("inf,") and lines[-1].startswith("-inf,")
