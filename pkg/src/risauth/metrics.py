"""Empirical ROC curves, AUC and operating-point lookups."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class Direction(enum.Enum):
    HIGHER_IS_AUTHENTIC = "higher"   # reader side, RSS ratio
    LOWER_IS_AUTHENTIC = "lower"     # tag side, voltage deviation


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Points ordered from the reject-all corner (0, 0) to accept-all (1, 1).

    ``thresholds[i]`` is the decision threshold giving ``(fpr[i], tpr[i])``;
    the two ends are the infinite sentinels.
    """

    thresholds: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray
    auc: float

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["threshold", "tpr", "fpr"])
            for t, y, x in zip(self.thresholds, self.tpr, self.fpr):
                w.writerow([repr(float(t)), repr(float(y)), repr(float(x))])


def _accept_counts(sorted_stats: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """How many statistics are >= each threshold."""
    return sorted_stats.size - np.searchsorted(sorted_stats, thresholds, side="left")


def build_roc(legit_stats, attack_stats, direction: Direction = Direction.HIGHER_IS_AUTHENTIC) -> RocCurve:
    """Exact empirical ROC over every distinct observed statistic.

    A trial is accepted when its statistic is on the authentic side of the
    threshold or equal to it.
    """
    legit = np.asarray(legit_stats, dtype=float).reshape(-1)
    attack = np.asarray(attack_stats, dtype=float).reshape(-1)
    if legit.size == 0 or attack.size == 0:
        raise ValueError("both statistic streams must be nonempty")
    if np.isnan(legit).any() or np.isnan(attack).any():
        raise ValueError("statistics contain NaN")
    sign = 1.0 if direction is Direction.HIGHER_IS_AUTHENTIC else -1.0
    # flip so that "accept iff s >= thr" holds in both directions
    l_s, a_s = np.sort(sign * legit), np.sort(sign * attack)
    distinct = np.unique(np.concatenate([l_s, a_s]))[::-1]
    thr = np.concatenate([[np.inf], distinct, [-np.inf]])
    tpr = _accept_counts(l_s, thr) / legit.size
    fpr = _accept_counts(a_s, thr) / attack.size
    auc = float(np.trapezoid(tpr, fpr)) if hasattr(np, "trapezoid") else float(np.trapz(tpr, fpr))
    return RocCurve(sign * thr, tpr, fpr, auc)


def rate_at_far(curve: RocCurve, target_far: float) -> float:
    """Authentication rate at a false-acceptance rate, linearly interpolated.

    At an fpr shared by several points (a vertical step) the best rate is
    returned.
    """
    if not 0.0 <= target_far <= 1.0:
        raise ValueError("target_far must lie in [0, 1]")
    fpr, tpr = curve.fpr, curve.tpr
    hit = fpr == target_far
    if hit.any():
        return float(tpr[hit].max())
    hi = int(np.searchsorted(fpr, target_far, side="right"))
    lo = hi - 1
    x0, x1 = fpr[lo], fpr[hi]
    # top of the lower step to bottom of the upper one
    y0, y1 = tpr[fpr == x0].max(), tpr[fpr == x1].min()
    return float(y0 + (y1 - y0) * (target_far - x0) / (x1 - x0))


def accuracy(legit_stats, attack_stats, threshold: float,
             direction: Direction = Direction.HIGHER_IS_AUTHENTIC) -> float:
    """Fraction of correct decisions over the pooled stream."""
    legit = np.asarray(legit_stats, dtype=float)
    attack = np.asarray(attack_stats, dtype=float)
    if direction is Direction.HIGHER_IS_AUTHENTIC:
        ok = np.count_nonzero(legit >= threshold) + np.count_nonzero(attack < threshold)
    else:
        ok = np.count_nonzero(legit <= threshold) + np.count_nonzero(attack > threshold)
    total = legit.size + attack.size
    if total == 0:
        raise ValueError("no trials")
    return ok / total
