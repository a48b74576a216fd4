"""Replicated simulation harness: R independently seeded runs with pair
trackers attached, aggregated into means, standard errors, histograms, and
estimator-ratio distributions.

Replicate r draws from the Philox stream keyed by (master_seed, r), so the
summary is a pure function of the config no matter how replicates are
scheduled; aggregation writes into per-replicate slots and reduces over the
full arrays afterwards.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence, TextIO

import numpy as np

from . import __version__
from .graph import ModelParams, ParameterError, evolve, new_graph
from .theory import RegimeConstants, regime_constants
from .trackers import (PairTracker, TrajectoryPoint, init_pair,
                       regime_normalizer, write_trajectory_csv)

RATIO_HIST_RANGE = (0.0, 3.0)
RATIO_HIST_BINS = 50


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one replicated experiment."""

    params: ModelParams
    pairs: tuple[tuple[int, int], ...]
    n_max: int
    checkpoints: tuple[int, ...]
    replicates: int
    master_seed: int
    estimator_k: tuple[float, ...] = ()
    hist_bins: int = 50
    allow_node_one: bool = False
    record_steps: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))
        object.__setattr__(self, "checkpoints", tuple(sorted(set(int(n) for n in self.checkpoints))))
        object.__setattr__(self, "estimator_k", tuple(float(k) for k in self.estimator_k))
        if not self.pairs:
            raise ParameterError("at least one tracked pair is required")
        for i, j in self.pairs:
            if not 1 <= i < j:
                raise ParameterError(f"pair ({i},{j}) must satisfy 1 <= i < j")
            if i == 1 and not self.allow_node_one:
                raise ParameterError("pairs touching node 1 carry the node-1 caveat; "
                                     "set allow_node_one=True to track them anyway")
            if j > self.n_max:
                raise ParameterError(f"pair ({i},{j}) never exists before n_max={self.n_max}")
        if not self.checkpoints or self.checkpoints[-1] > self.n_max:
            raise ParameterError("checkpoints must be non-empty and <= n_max")
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        if self.hist_bins < 1:
            raise ParameterError("hist_bins must be >= 1")
        for k in self.estimator_k:
            if not k > 1:
                raise ParameterError(f"estimator k must be > 1, got {k}")

    @property
    def constants(self) -> RegimeConstants:
        return regime_constants(self.params.c, self.params.delta)

    def to_dict(self) -> dict:
        return {
            "c": self.params.c, "delta": self.params.delta,
            "pairs": [list(p) for p in self.pairs],
            "n_max": self.n_max, "checkpoints": list(self.checkpoints),
            "replicates": self.replicates, "master_seed": self.master_seed,
            "estimator_k": list(self.estimator_k),
        }


@dataclass
class ReplicateRecord:
    """Checkpoint values of one replicate; trackers kept only on request."""

    replicate_id: int
    counts: dict[tuple[int, int], np.ndarray]
    x_i: dict[tuple[int, int], np.ndarray]
    x_j: dict[tuple[int, int], np.ndarray]
    trackers: dict[tuple[int, int], PairTracker] | None = None


def run_replicate(config: ExperimentConfig, replicate_id: int,
                  keep_trackers: bool = False) -> ReplicateRecord:
    """One seeded trajectory with all pairs tracked from their creation times."""
    state = new_graph(config.params, config.master_seed, replicate_id,
                      capacity=min(config.n_max, 1 << 22))
    by_j: dict[int, list[tuple[int, int]]] = {}
    for pair in config.pairs:
        by_j.setdefault(pair[1], []).append(pair)
    trackers: dict[tuple[int, int], PairTracker] = {}
    active: list[PairTracker] = []
    for j in sorted(by_j):
        evolve(state, j, observers=active)
        for pair in by_j[j]:
            tracker = init_pair(state, pair[0], pair[1], checkpoints=config.checkpoints,
                                record_steps=config.record_steps)
            trackers[pair] = tracker
            active.append(tracker)
    evolve(state, config.n_max, observers=active)

    counts, xi, xj = {}, {}, {}
    for pair, tracker in trackers.items():
        by_n = {pt.n: pt for pt in tracker.trajectory}
        rows = [by_n.get(cp) for cp in config.checkpoints]
        counts[pair] = np.array([math.nan if r is None else r.n_ij for r in rows])
        xi[pair] = np.array([math.nan if r is None else r.x_i for r in rows])
        xj[pair] = np.array([math.nan if r is None else r.x_j for r in rows])
    return ReplicateRecord(replicate_id=replicate_id, counts=counts, x_i=xi, x_j=xj,
                           trackers=trackers if keep_trackers else None)


def iter_replicates(config: ExperimentConfig, keep_trackers: bool = False,
                    workers: int = 1) -> Iterator[ReplicateRecord]:
    """Records in replicate order regardless of execution schedule."""
    if workers <= 1:
        for r in range(config.replicates):
            yield run_replicate(config, r, keep_trackers)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_replicate, config, r, keep_trackers)
                   for r in range(config.replicates)]
        for fut in futures:
            yield fut.result()


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    se: float
    min: float
    max: float
    histogram: tuple[tuple[float, int], ...]

    @classmethod
    def integer_valued(cls, values: np.ndarray) -> "SummaryStats":
        vals = values[~np.isnan(values)].astype(np.int64)
        levels, counts = np.unique(vals, return_counts=True)
        return cls._make(vals, tuple((float(v), int(c)) for v, c in zip(levels, counts)))

    @classmethod
    def real_valued(cls, values: np.ndarray, bins: int = 50) -> "SummaryStats":
        vals = values[~np.isnan(values)]
        hi = float(vals.max()) if vals.size and vals.max() > 0 else 1.0
        counts, edges = np.histogram(vals, bins=bins, range=(0.0, hi))
        return cls._make(vals, tuple((float(e), int(c)) for e, c in zip(edges[:-1], counts)))

    @classmethod
    def _make(cls, vals: np.ndarray, hist) -> "SummaryStats":
        if vals.size == 0:
            return cls(math.nan, math.nan, math.nan, math.nan, ())
        sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        return cls(mean=float(vals.mean()), se=sd / math.sqrt(vals.size),
                   min=float(vals.min()), max=float(vals.max()), histogram=hist)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "min": self.min, "max": self.max,
                "histogram": [list(b) for b in self.histogram]}


@dataclass(frozen=True)
class RatioStats:
    """Distribution of N(n) / N_hat^k(n), conditioned on a positive estimate."""

    n: int
    k: float
    snapshot_n: int
    conditioning_rate: float
    count: int
    median: float
    iqr: float
    mean: float
    histogram: tuple[int, ...]
    overflow: int

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "snapshot_n": self.snapshot_n,
                "conditioning_rate": self.conditioning_rate, "count": self.count,
                "median": self.median, "iqr": self.iqr, "mean": self.mean,
                "histogram": list(self.histogram), "overflow": self.overflow}


@dataclass
class ReplicationSummary:
    """Aggregates plus the raw per-replicate checkpoint matrices (rows =
    replicates in id order, columns = checkpoints) that downstream
    verification checks reduce further."""

    config: ExperimentConfig
    count_stats: dict[tuple[int, int], dict[int, SummaryStats]]
    scaled_stats: dict[tuple[int, int], dict[int, SummaryStats]]
    y_inf_stats: dict[tuple[int, int], SummaryStats]
    ratio_stats: dict[tuple[int, int], list[RatioStats]]
    counts: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)
    x_i: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)
    x_j: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)
    y_inf_hat: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)

    def to_dict(self) -> dict:
        def pair_key(pair):
            return f"{pair[0]}:{pair[1]}"
        return {
            "metadata": {
                "package_version": __version__,
                "config": self.config.to_dict(),
                "regime": self.config.constants.regime,
                "gamma": self.config.constants.gamma,
                "ratio_histogram": {"range": list(RATIO_HIST_RANGE), "bins": RATIO_HIST_BINS},
            },
            "pairs": {
                pair_key(pair): {
                    "counts": {str(n): s.to_dict() for n, s in self.count_stats[pair].items()},
                    "scaled": {str(n): s.to_dict() for n, s in self.scaled_stats[pair].items()},
                    "y_inf_hat": self.y_inf_stats[pair].to_dict(),
                    "ratios": [r.to_dict() for r in self.ratio_stats[pair]],
                }
                for pair in self.config.pairs
            },
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _ratio_candidates(config: ExperimentConfig) -> list[tuple[int, float, int]]:
    """(n, k, floor(n/k)) triples where both checkpoint values exist."""
    cps = set(config.checkpoints)
    out = []
    for k in config.estimator_k:
        for n in config.checkpoints:
            snap = int(n // k)
            if snap in cps and snap < n:
                out.append((n, k, snap))
    return out


def summarize(config: ExperimentConfig, records: Sequence[ReplicateRecord]) -> ReplicationSummary:
    constants = config.constants
    cps = config.checkpoints
    r_count = len(records)
    count_stats, scaled_stats, y_stats, ratio_stats = {}, {}, {}, {}
    counts_by_pair, xi_by_pair, xj_by_pair, y_inf_by_pair = {}, {}, {}, {}
    for pair in config.pairs:
        counts = np.vstack([rec.counts[pair] for rec in records])
        xi = np.vstack([rec.x_i[pair] for rec in records])
        xj = np.vstack([rec.x_j[pair] for rec in records])
        counts_by_pair[pair] = counts
        xi_by_pair[pair] = xi
        xj_by_pair[pair] = xj
        count_stats[pair] = {}
        scaled_stats[pair] = {}
        for idx, cp in enumerate(cps):
            col = counts[:, idx]
            count_stats[pair][cp] = SummaryStats.integer_valued(col)
            if cp >= 2:
                scaled_stats[pair][cp] = SummaryStats.real_valued(
                    col / regime_normalizer(cp, constants), bins=config.hist_bins)
        y_inf = (xi[:, -1] * xj[:, -1]) / cps[-1] ** (2 * constants.gamma)
        y_inf_by_pair[pair] = y_inf
        y_stats[pair] = SummaryStats.real_valued(y_inf, bins=config.hist_bins)
        ratio_stats[pair] = []
        cp_index = {cp: idx for idx, cp in enumerate(cps)}
        for n, k, snap in _ratio_candidates(config):
            n_hat = counts[:, cp_index[snap]]
            if constants.regime == "power":
                n_hat = n_hat * k ** constants.power_exponent
            positive = n_hat > 0
            ratios = counts[positive, cp_index[n]] / n_hat[positive]
            hist, _ = np.histogram(ratios, bins=RATIO_HIST_BINS, range=RATIO_HIST_RANGE)
            q25, q50, q75 = (np.percentile(ratios, (25, 50, 75)) if ratios.size
                             else (math.nan, math.nan, math.nan))
            ratio_stats[pair].append(RatioStats(
                n=n, k=k, snapshot_n=snap,
                conditioning_rate=float(positive.mean()),
                count=int(positive.sum()),
                median=float(q50), iqr=float(q75 - q25),
                mean=float(ratios.mean()) if ratios.size else math.nan,
                histogram=tuple(int(x) for x in hist),
                overflow=int((ratios > RATIO_HIST_RANGE[1]).sum())))
        total = sum(c for _, c in count_stats[pair][cps[-1]].histogram)
        if total != r_count:
            raise AssertionError(f"histogram count {total} != replicates {r_count}")
    return ReplicationSummary(config=config, count_stats=count_stats, scaled_stats=scaled_stats,
                              y_inf_stats=y_stats, ratio_stats=ratio_stats,
                              counts=counts_by_pair, x_i=xi_by_pair, x_j=xj_by_pair,
                              y_inf_hat=y_inf_by_pair)


def run(config: ExperimentConfig, workers: int = 1) -> ReplicationSummary:
    """Execute all replicates and aggregate; deterministic given the config."""
    records = list(iter_replicates(config, workers=workers))
    return summarize(config, records)


def trajectory_export(config: ExperimentConfig, count: int, out: TextIO) -> None:
    """Per-step paths of the first `count` replicates in the trajectory CSV contract."""
    if count > config.replicates:
        raise ParameterError(f"count={count} exceeds replicates={config.replicates}")
    constants = config.constants
    metadata = {"version": __version__, "c": config.params.c, "delta": config.params.delta,
                "n_max": config.n_max, "master_seed": config.master_seed,
                "granularity": "per-step"}
    stepwise = ExperimentConfig(
        params=config.params, pairs=config.pairs, n_max=config.n_max,
        checkpoints=config.checkpoints, replicates=config.replicates,
        master_seed=config.master_seed, estimator_k=config.estimator_k,
        allow_node_one=config.allow_node_one, record_steps=True)
    trackers, ids = [], []
    for rep in range(count):
        record = run_replicate(stepwise, rep, keep_trackers=True)
        for pair in config.pairs:
            tracker = record.trackers[pair]
            ns = np.arange(tracker.j, config.n_max + 1)
            path = tracker.count_path()
            xi, xj = tracker.x_paths()
            full = PairTracker(i=tracker.i, j=tracker.j, n=config.n_max,
                               n_ij=tracker.n_ij, x_i=tracker.x_i, x_j=tracker.x_j)
            full.trajectory = [TrajectoryPoint(n=int(n), n_ij=int(c), x_i=float(a), x_j=float(b))
                               for n, c, a, b in zip(ns, path, xi, xj)]
            trackers.append(full)
            ids.append(rep)
    write_trajectory_csv(out, trackers, constants, metadata=metadata,
                         replicate_column=True, replicate_ids=ids)


def write_histogram_csv(summary: ReplicationSummary, out: TextIO) -> None:
    """Long-format histogram rows for external plotting."""
    out.write("kind,pair_i,pair_j,n,k,bin,count\n")
    for pair in summary.config.pairs:
        i, j = pair
        for cp, stats in summary.count_stats[pair].items():
            for value, c in stats.histogram:
                out.write(f"n_ij,{i},{j},{cp},,{value:.17g},{c}\n")
        for cp, stats in summary.scaled_stats[pair].items():
            for left, c in stats.histogram:
                out.write(f"scaled,{i},{j},{cp},,{left:.17g},{c}\n")
        for left, c in summary.y_inf_stats[pair].histogram:
            out.write(f"y_inf_hat,{i},{j},{summary.config.checkpoints[-1]},,{left:.17g},{c}\n")
        edges = np.linspace(*RATIO_HIST_RANGE, RATIO_HIST_BINS + 1)
        for rs in summary.ratio_stats[pair]:
            for left, c in zip(edges[:-1], rs.histogram):
                out.write(f"ratio,{i},{j},{rs.n},{rs.k:.17g},{left:.17g},{c}\n")
            out.write(f"ratio_overflow,{i},{j},{rs.n},{rs.k:.17g},{RATIO_HIST_RANGE[1]:.17g},{rs.overflow}\n")
