"""Named experiments, spec files and result export.

Every trial draws its randomness from ``derive_seed(seed, name, n_ris, i)``,
so results do not depend on how trials are split across worker processes.
Chunks are reduced in index order.
"""

from __future__ import annotations

import dataclasses
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import adversary, protocol
from .config import (ConfigError, ScenarioGeometry, SystemParams, apply_overrides, default_geometry,
                     default_params, derive_seed, parse_flat)
from .decision import Decision
from .metrics import Direction, build_roc, rate_at_far
from .secrecy import compute_asc

EXPERIMENTS = ("roc-tag", "tag-power-density", "roc-reader", "attacker-density",
               "distance-table", "asc", "roc-malicious-ris")
MIN_TRIALS = 100
SOURCE_POWERS_DBM = (-5.0, 0.0, 1.0, 5.0)
ATTACKER_DENSITIES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
DISTANCES_M = (2.0, 3.0, 4.0, 5.0, 6.0)
ASC_GRID_DB = tuple(float(x) for x in range(-10, 31, 5))
REPORT_FAR = 0.1
CHUNK = 500

METRIC_DEFINITIONS = {
    "roc-tag": "tag authenticates reader; statistic = max |V - V0| over the profile, lower is authentic; "
               "attack = fake reader",
    "roc-reader": "reader authenticates tag; statistic = min/max RSS ratio, higher is authentic; "
                  "attack = impersonating tag",
    "tag-power-density": "accuracy = (legitimate accepted + attacks rejected) / trials on a stream of "
                         "trials where a fraction n_mr are fake-reader attempts, tag-side decisions with the "
                         "relative comparator threshold; independent of P_S because the threshold scales "
                         "with the stored profile and the attacker matches the reader's mean power",
    "attacker-density": "accuracy = (legitimate accepted + attacks rejected) / trials on a stream of trials "
                        "where a fraction n_mr are impersonating-tag attempts, reader-side decisions",
    "distance-table": "accuracy = fraction of legitimate reader-side attempts accepted, no attackers",
    "asc": "mean over channel draws of (log2(1+gR) - log2(1+gE)) * (gR > gE); noise scaled so the mean "
           "reader SNR equals the grid value",
    "roc-malicious-ris": "reader authenticates tag while the RIS runs a malicious strategy at the "
                         "authentication slot; attack = impersonating tag at trusted-calibrated power",
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    trials: int = 10_000
    seed: int = 42
    overrides: dict = field(default_factory=dict)
    n_ris_list: tuple = (0, 20, 50, 100)
    # malicious RIS strategy, only read by roc-malicious-ris
    strategy: str = "eavesdrop"

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"name: unknown experiment {self.name!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < MIN_TRIALS:
            raise ConfigError(f"trials: must be an integer >= {MIN_TRIALS}, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        ns = self.n_ris_list
        if isinstance(ns, int) and not isinstance(ns, bool):
            ns = (ns,)
        if not isinstance(ns, (tuple, list)) or not ns:
            raise ConfigError("n_ris_list: must be a nonempty list of integers")
        for n in ns:
            if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                raise ConfigError(f"n_ris_list: entries must be integers >= 0, got {n!r}")
        object.__setattr__(self, "n_ris_list", tuple(ns))
        if self.strategy not in ("eavesdrop", "destructive"):
            raise ConfigError(f"strategy: must be eavesdrop or destructive, got {self.strategy!r}")
        # fail early on bad override keys or values
        apply_overrides(default_params(), default_geometry(), self.overrides)

    def resolved(self) -> tuple[SystemParams, ScenarioGeometry]:
        return apply_overrides(default_params(), default_geometry(), self.overrides)


SPEC_KEYS = {f.name for f in dataclasses.fields(ExperimentSpec)} - {"overrides"}


def spec_from_mapping(data: dict) -> ExperimentSpec:
    if "name" not in data:
        raise ConfigError("name: missing experiment name")
    top = {k: v for k, v in data.items() if k in SPEC_KEYS}
    rest = {k: v for k, v in data.items() if k not in SPEC_KEYS}
    return ExperimentSpec(overrides=rest, **top)


def load_spec(path) -> ExperimentSpec:
    """Read a flat ``key = value`` spec file.

    ``name``, ``trials``, ``seed``, ``n_ris_list`` and ``strategy`` are
    experiment fields; every other key overrides a system or geometry field.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"spec: cannot read {path}: {exc.strerror}") from None
    return spec_from_mapping(parse_flat(text))


def version_string() -> str:
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5, check=True).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"{__version__}+g{rev}" if rev else __version__


# ---------------------------------------------------------------------------
# trial streams
# ---------------------------------------------------------------------------

def _legit_mal(strategy):
    return lambda p, g, n, s: protocol.legitimate_reader_trial_malicious_ris(strategy, p, g, n, s)


def _attack_mal(strategy):
    return lambda p, g, n, s: adversary.malicious_ris_impersonation_trial(strategy, p, g, n, s)


STREAMS: dict[str, Callable] = {
    "legit-tag": protocol.legitimate_tag_trial,
    "legit-reader": protocol.legitimate_reader_trial,
    "fake-reader": adversary.fake_reader_trial,
    "impersonating-tag": adversary.impersonating_tag_trial,
    "legit-reader-eavesdrop": _legit_mal("eavesdrop"),
    "legit-reader-destructive": _legit_mal("destructive"),
    "mal-eavesdrop": _attack_mal("eavesdrop"),
    "mal-destructive": _attack_mal("destructive"),
}


def _run_chunk(task) -> tuple[np.ndarray, np.ndarray]:
    stream, params, geom, n, seed_key, start, stop = task
    fn = STREAMS[stream]
    stats = np.empty(stop - start)
    acc = np.empty(stop - start, dtype=bool)
    for j, i in enumerate(range(start, stop)):
        out = fn(params, geom, n, derive_seed(*seed_key, i))
        stats[j] = out.statistic
        acc[j] = out.decision is Decision.ACCEPT
    return stats, acc


class Runner:
    """Evaluates trial streams, optionally on a process pool."""

    def __init__(self, threads: int = 1):
        self.threads = max(1, int(threads))
        self._pool: Optional[ProcessPoolExecutor] = None

    def __enter__(self):
        if self.threads > 1:
            self._pool = ProcessPoolExecutor(self.threads)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()

    def stream(self, stream: str, params, geom, n: int, seed_key: tuple, count: int):
        """Statistics and accept flags of trials ``0..count-1``."""
        tasks = [(stream, params, geom, n, seed_key, a, min(a + CHUNK, count))
                 for a in range(0, count, CHUNK)]
        parts = list(self._pool.map(_run_chunk, tasks)) if self._pool else [_run_chunk(t) for t in tasks]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class Table:
    header: list
    rows: list

    def column(self, name) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


@dataclass
class ExperimentResult:
    name: str
    tables: dict          # file stem -> Table
    summary: dict
    timing: dict


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _roc_table(legit, attack, direction) -> tuple[Table, float, float]:
    roc = build_roc(legit, attack, direction)
    rows = [[float(t), float(y), float(x)] for t, y, x in zip(roc.thresholds, roc.tpr, roc.fpr)]
    return Table(["threshold", "tpr", "fpr"], rows), roc.auc, rate_at_far(roc, REPORT_FAR)


def _roc_experiment(spec, params, geom, runner, legit_stream, attack_stream, direction, prefix=None):
    tables, aucs, rates, acc_l, rej_a = {}, {}, {}, {}, {}
    prefix = prefix or spec.name
    for n in spec.n_ris_list:
        key = (spec.seed, spec.name, n)
        ls, la = runner.stream(legit_stream, params, geom, n, key, spec.trials)
        as_, aa = runner.stream(attack_stream, params, geom, n, key, spec.trials)
        t, auc, rate = _roc_table(ls, as_, direction)
        tables[f"{prefix}_N{n}"] = t
        aucs[str(n)] = auc
        rates[str(n)] = rate
        acc_l[str(n)] = float(np.mean(la))
        rej_a[str(n)] = float(np.mean(~aa))
    return tables, {"auc": aucs, f"authentication_rate_at_far_{REPORT_FAR}": rates,
                    "authentication_rate_default": acc_l, "attack_rejection_default": rej_a}


def _mixed_accuracy(legit_ok: np.ndarray, attack_ok: np.ndarray, trials: int, density: float) -> float:
    m = int(round(density * trials))
    return (np.count_nonzero(legit_ok[: trials - m]) + np.count_nonzero(~attack_ok[:m])) / trials


def _density_experiment(spec, params, geom, runner, legit_stream, attack_stream, powers):
    tables, summary = {}, {}
    n_attack = int(round(max(ATTACKER_DENSITIES) * spec.trials))
    for n in spec.n_ris_list:
        rows = []
        for p_dbm in powers:
            p = params if p_dbm is None else dataclasses.replace(params, source_power_dbm=p_dbm)
            key = (spec.seed, spec.name, n)
            _, lok = runner.stream(legit_stream, p, geom, n, key, spec.trials)
            _, aok = runner.stream(attack_stream, p, geom, n, key, n_attack)
            for d in ATTACKER_DENSITIES:
                acc = _mixed_accuracy(lok, aok, spec.trials, d)
                rows.append(([p_dbm] if p_dbm is not None else []) + [d, acc])
        header = (["source_power_dbm"] if powers != (None,) else []) + ["attacker_density", "accuracy"]
        tables[f"{spec.name}_N{n}"] = Table(header, rows)
        summary[str(n)] = [dict(zip(header, r)) for r in rows]
    return tables, {"accuracy": summary}


def _distance_experiment(spec, params, geom, runner):
    tables, summary = {}, {}
    for n in spec.n_ris_list:
        rows = []
        for d in DISTANCES_M:
            g = dataclasses.replace(geom, d_tag_reader_m=d)
            _, ok = runner.stream("legit-reader", params, g, n, (spec.seed, spec.name, n), spec.trials)
            rows.append([d, float(np.mean(ok))])
        tables[f"{spec.name}_N{n}"] = Table(["d_tag_reader_m", "accuracy"], rows)
        summary[str(n)] = {repr(d): a for d, a in rows}
    return tables, {"accuracy": summary}


def _asc_experiment(spec, params, geom):
    tables, summary = {}, {}
    for n in spec.n_ris_list:
        for mode in ("trusted", "malicious"):
            curve = compute_asc(mode if n > 0 else "off", n, ASC_GRID_DB, spec.trials, params, geom, spec.seed)
            rows = [[float(g), float(c), curve.n_sim] for g, c in zip(curve.gamma_r_bar_db, curve.asc_bits)]
            tables[f"{spec.name}-{mode}_N{n}"] = Table(["gamma_r_bar_db", "asc_bits", "n_sim"], rows)
            summary.setdefault(mode, {})[str(n)] = [float(c) for c in curve.asc_bits]
    return tables, {"gamma_r_bar_db": list(ASC_GRID_DB), "asc_bits": summary}


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    params, geom = spec.resolved()
    t0 = time.perf_counter()
    with Runner(threads) as runner:
        if spec.name == "roc-tag":
            tables, res = _roc_experiment(spec, params, geom, runner, "legit-tag", "fake-reader",
                                          Direction.LOWER_IS_AUTHENTIC)
        elif spec.name == "roc-reader":
            tables, res = _roc_experiment(spec, params, geom, runner, "legit-reader", "impersonating-tag",
                                          Direction.HIGHER_IS_AUTHENTIC)
        elif spec.name == "roc-malicious-ris":
            tables, res = _roc_experiment(spec, params, geom, runner, f"legit-reader-{spec.strategy}",
                                          f"mal-{spec.strategy}", Direction.HIGHER_IS_AUTHENTIC)
        elif spec.name == "tag-power-density":
            tables, res = _density_experiment(spec, params, geom, runner, "legit-tag", "fake-reader",
                                              SOURCE_POWERS_DBM)
        elif spec.name == "attacker-density":
            tables, res = _density_experiment(spec, params, geom, runner, "legit-reader", "impersonating-tag",
                                              (None,))
        elif spec.name == "distance-table":
            tables, res = _distance_experiment(spec, params, geom, runner)
        else:
            tables, res = _asc_experiment(spec, params, geom)
    elapsed = time.perf_counter() - t0
    summary = {
        "experiment": spec.name,
        "version": version_string(),
        "seed": spec.seed,
        "trials": spec.trials,
        "n_ris_list": list(spec.n_ris_list),
        "metric_definition": METRIC_DEFINITIONS[spec.name],
        "config": {"system": dataclasses.asdict(params), "geometry": dataclasses.asdict(geom)},
        "results": res,
        "files": sorted(f"{stem}.csv" for stem in tables),
    }
    if spec.name == "roc-malicious-ris":
        summary["strategy"] = spec.strategy
    timing = {"experiment": spec.name, "runtime_s": elapsed, "threads": threads}
    return ExperimentResult(spec.name, tables, _json_safe(summary), timing)


def write_result(result: ExperimentResult, out_dir, fmt: str = "both") -> list[Path]:
    """Write CSV tables and/or JSON. ``summary.json`` is always written and
    holds no wall-clock data, so it is byte-stable across runs; runtimes go
    to ``timing.json``."""
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    summary = dict(result.summary)
    if fmt in ("csv", "both"):
        for stem, table in result.tables.items():
            path = out / f"{stem}.csv"
            lines = [",".join(table.header)] + [",".join(_fmt(v) for v in row) for row in result.tables[stem].rows]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(path)
    if fmt in ("json", "both"):
        summary["tables"] = {stem: {"header": t.header, "rows": _json_safe(t.rows)}
                             for stem, t in result.tables.items()}
    if fmt == "json":
        summary.pop("files", None)
    for fname, payload in (("summary.json", summary), ("timing.json", result.timing)):
        path = out / fname
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
    return written
