"""Reader side: RSS measurement, the RSS ratio statistic and the tag database."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .channel import complex_normal, received_reader
from .config import SystemParams
from .decision import Decision
from .tag import PowerProfile

log = logging.getLogger(__name__)


class DuplicateTagError(ValueError):
    pass


class UnknownTagError(KeyError):
    pass


@dataclass(frozen=True)
class TagRecord:
    tag_id: str
    rss_baseline: float
    power_profile: PowerProfile

    def __post_init__(self):
        if not self.rss_baseline > 0:
            raise ValueError(f"{self.tag_id}: RSS baseline must be > 0, got {self.rss_baseline}")


class ReaderDatabase:
    """Registered tags keyed by ID. Written once during initialisation, then read-only."""

    def __init__(self, records=()):
        self._records: dict[str, TagRecord] = {}
        for r in records:
            self.add(r)

    def add(self, record: TagRecord) -> None:
        if record.tag_id in self._records:
            raise DuplicateTagError(f"tag {record.tag_id!r} already registered")
        self._records[record.tag_id] = record

    def get(self, tag_id: str) -> TagRecord:
        try:
            return self._records[tag_id]
        except KeyError:
            raise UnknownTagError(tag_id) from None

    def __contains__(self, tag_id):
        return tag_id in self._records

    def __len__(self):
        return len(self._records)

    def __iter__(self) -> Iterator[TagRecord]:
        return iter(self._records.values())

    def dumps(self) -> str:
        """One ``id,rss_baseline_w,profile_bits`` row per record."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "rss_baseline_w", "power_profile"])
        for r in self:
            w.writerow([r.tag_id, repr(float(r.rss_baseline)), r.power_profile.bitstring()])
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str, symbol_period_s: float = 10e-3) -> "ReaderDatabase":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["id", "rss_baseline_w", "power_profile"]:
            raise ValueError("missing or malformed header row")
        db = cls()
        for i, row in enumerate(rows[1:], 2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"line {i}: expected 3 fields, got {len(row)}")
            tag_id, rss, bits = row
            db.add(TagRecord(tag_id, float(rss), PowerProfile.from_bitstring(bits, symbol_period_s)))
        return db

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path, symbol_period_s: float = 10e-3) -> "ReaderDatabase":
        return cls.loads(Path(path).read_text(encoding="utf-8"), symbol_period_s)


def register_tag(db: ReaderDatabase, tag_id: str, rss0: float, pp: PowerProfile) -> ReaderDatabase:
    db.add(TagRecord(tag_id, rss0, pp))
    return db


def noise_free_rss(state, config, params, geom, uplink_config=None) -> float:
    """``P_s * |a^2 + 2ab + b^2|^2`` evaluated through the received reader sample."""
    return abs(received_reader(state, config, params, geom, uplink_config=uplink_config).value) ** 2


def measure_rss(state, config, params: SystemParams, geom, noise_seed: Optional[int] = None,
                uplink_config=None) -> float:
    """RSS at the reader in watts.

    Without ``noise_seed`` this is the noise-free value. Otherwise see
    :func:`estimate_rss`.
    """
    clean = received_reader(state, config, params, geom, uplink_config=uplink_config).value
    if noise_seed is None:
        return abs(clean) ** 2
    return estimate_rss(clean, params, noise_seed)


def estimate_rss(clean: complex, params: SystemParams, noise_seed: int) -> float:
    """Average ``params.rss_samples`` noisy copies of ``clean``, subtract the
    known noise power, floor at zero."""
    sigma2 = params.noise_reader_w
    rng = np.random.default_rng(noise_seed)
    noise = np.sqrt(sigma2) * complex_normal(rng, params.rss_samples)
    power = float(np.mean(np.abs(clean + noise) ** 2))
    return max(power - sigma2, 0.0)


def rss_ratio(baseline, observed):
    """Smaller over larger of the two RSS values, element-wise for arrays."""
    b = np.asarray(baseline, dtype=float)
    o = np.asarray(observed, dtype=float)
    if np.any(b <= 0) or np.any(o <= 0):
        raise ValueError("RSS values must be > 0")
    out = np.where(b > o, o / b, b / o)
    return float(out) if out.ndim == 0 else out


def ratio_statistic(baseline: float, observed: float) -> float:
    """rss_ratio, with a zero measurement mapped to 0 (nothing to compare)."""
    return rss_ratio(baseline, observed) if observed > 0 else 0.0


def authenticate_tag(db: ReaderDatabase, claimed_id: str, observed_rss: float,
                     threshold: float) -> Decision:
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    try:
        record = db.get(claimed_id)
    except UnknownTagError:
        log.info("reject: unknown tag id %r", claimed_id)
        return Decision.REJECT
    ratio = ratio_statistic(record.rss_baseline, observed_rss)
    return Decision.ACCEPT if ratio >= threshold else Decision.REJECT
