"""Pair observers: running common-friend counts, shifted degrees, and the
regime-scaled statistics for configured fixed pairs (i, j).

Trackers never mutate the graph. After node j exists, the common-friend count
grows by at most one per arrival: exactly when the arrival lands at least one
stub on i and at least one on j, multiplicity ignored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .graph import GraphState, ParameterError, StepOutcome
from .theory import RegimeConstants, REGIME_LOG, REGIME_POWER, REGIME_STATIC


@dataclass(frozen=True)
class TrajectoryPoint:
    n: int
    n_ij: int
    x_i: float
    x_j: float

    @property
    def y_ij(self) -> float:
        return self.x_i * self.x_j


@dataclass(frozen=True)
class ScaledStatistic:
    """n_ij divided by the regime normalizer: 1, log n, or n^(2g-1)/(2g-1)."""

    regime: str
    value: float


@dataclass(frozen=True)
class LimitEstimate:
    """Plug-in estimates of the scaling limits from a finite-n state."""

    d_i_inf_hat: float
    d_j_inf_hat: float

    @property
    def y_inf_hat(self) -> float:
        return self.d_i_inf_hat * self.d_j_inf_hat


def regime_normalizer(n, constants: RegimeConstants):
    """Normalizer of the common-friend count at node count n (n >= 2); array-friendly."""
    n = np.asarray(n, dtype=np.float64)
    if np.any(n < 2):
        raise ParameterError("scaled statistics need n >= 2")
    if constants.regime == REGIME_STATIC:
        out = np.ones_like(n)
    elif constants.regime == REGIME_LOG:
        out = np.log(n)
    else:
        e = constants.power_exponent
        out = n ** e / e
    return out if out.ndim else float(out)


def scaled_statistic(n_ij, n, constants: RegimeConstants) -> ScaledStatistic:
    return ScaledStatistic(regime=constants.regime, value=n_ij / regime_normalizer(n, constants))


def estimate(snapshot_tracker, k: float, constants: RegimeConstants) -> float:
    """Subsample estimator from the state at time floor(n/k): the stored count,
    rescaled by k^(2*gamma-1) in the power regime."""
    if not k > 1:
        raise ParameterError(f"estimator requires k > 1, got {k}")
    n_ij = snapshot_tracker.n_ij if isinstance(snapshot_tracker, PairTracker) else int(snapshot_tracker)
    if constants.regime == REGIME_POWER:
        return n_ij * k ** constants.power_exponent
    return float(n_ij)


@dataclass
class PairTracker:
    """Running values for one tracked pair, updated per arrival or per block.

    Checkpoint rows (n, n_ij, x_i, x_j) land in ``trajectory``; with
    ``record_steps`` the per-arrival stub counts for i and j are kept too,
    which is what the martingale and Cesaro diagnostics consume.
    """

    i: int
    j: int
    n: int
    n_ij: int
    x_i: float
    x_j: float
    checkpoints: tuple[int, ...] = ()
    record_steps: bool = False
    trajectory: list[TrajectoryPoint] = field(default_factory=list)
    _delta_i: list = field(default_factory=list, repr=False)
    _delta_j: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.checkpoints = tuple(sorted(set(self.checkpoints)))
        self._record_checkpoint(self.n)

    @property
    def y_ij(self) -> float:
        return self.x_i * self.x_j

    def scaled(self, constants: RegimeConstants) -> ScaledStatistic:
        return scaled_statistic(self.n_ij, self.n, constants)

    def limit_estimate(self, constants: RegimeConstants) -> LimitEstimate:
        ng = self.n ** constants.gamma
        return LimitEstimate(d_i_inf_hat=self.x_i / ng, d_j_inf_hat=self.x_j / ng)

    def _record_checkpoint(self, n: int) -> None:
        if n in self.checkpoints:
            self.trajectory.append(TrajectoryPoint(n=n, n_ij=self.n_ij, x_i=self.x_i, x_j=self.x_j))

    def on_step(self, outcome: StepOutcome, state_pre: GraphState | None = None) -> None:
        """Fold in one arrival (which must postdate j)."""
        if outcome.new_node <= self.j:
            raise ParameterError(f"arrival {outcome.new_node} predates tracked pair ({self.i},{self.j})")
        if outcome.new_node != self.n + 1:
            raise ParameterError(f"arrival {outcome.new_node} out of order at n={self.n}")
        deltas = outcome.delta_per_node
        d_i = deltas.get(self.i, 0)
        d_j = deltas.get(self.j, 0)
        if d_i >= 1 and d_j >= 1:
            self.n_ij += 1
        self.x_i += d_i
        self.x_j += d_j
        self.n = outcome.new_node
        if self.record_steps:
            self._delta_i.append(d_i)
            self._delta_j.append(d_j)
        self._record_checkpoint(self.n)

    def on_block(self, first_new_node: int, targets: np.ndarray) -> None:
        """Vectorized equivalent of on_step over a contiguous run of arrivals."""
        if first_new_node != self.n + 1:
            raise ParameterError(f"block starting at {first_new_node} out of order at n={self.n}")
        if first_new_node <= self.j:
            raise ParameterError(f"block at {first_new_node} predates tracked pair ({self.i},{self.j})")
        d_i = (targets == self.i).sum(axis=1)
        d_j = (targets == self.j).sum(axis=1)
        inc = np.cumsum((d_i > 0) & (d_j > 0))
        cum_i = np.cumsum(d_i)
        cum_j = np.cumsum(d_j)
        last = self.n + targets.shape[0]
        for cp in self.checkpoints:
            if self.n < cp <= last:
                k = cp - self.n - 1
                self.trajectory.append(TrajectoryPoint(
                    n=cp, n_ij=self.n_ij + int(inc[k]),
                    x_i=self.x_i + float(cum_i[k]), x_j=self.x_j + float(cum_j[k])))
        if self.record_steps:
            self._delta_i.extend(d_i.tolist())
            self._delta_j.extend(d_j.tolist())
        self.n_ij += int(inc[-1])
        self.x_i += float(cum_i[-1])
        self.x_j += float(cum_j[-1])
        self.n = last

    def step_deltas(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-arrival stub counts on i and j for arrivals j+1..n (record_steps only)."""
        if not self.record_steps:
            raise ParameterError("tracker was not recording per-step deltas")
        return (np.asarray(self._delta_i, dtype=np.int64),
                np.asarray(self._delta_j, dtype=np.int64))

    def x_paths(self) -> tuple[np.ndarray, np.ndarray]:
        """Shifted-degree paths x_i(n), x_j(n) for n = j..current (record_steps only)."""
        d_i, d_j = self.step_deltas()
        x_i0 = self.x_i - d_i.sum()
        x_j0 = self.x_j - d_j.sum()
        xi = np.concatenate(([x_i0], x_i0 + np.cumsum(d_i)))
        xj = np.concatenate(([x_j0], x_j0 + np.cumsum(d_j)))
        return xi, xj

    def count_path(self) -> np.ndarray:
        """N_ij(n) for n = j..current (record_steps only)."""
        d_i, d_j = self.step_deltas()
        inc = ((d_i > 0) & (d_j > 0)).astype(np.int64)
        n0 = self.n_ij - int(inc.sum())
        return np.concatenate(([n0], n0 + np.cumsum(inc)))


def geometric_checkpoints(j: int, n_max: int) -> tuple[int, ...]:
    """Default checkpoint spacing n = j * 2^m, keeping memory O(log n)."""
    cps = []
    n = j
    while n <= n_max:
        cps.append(n)
        n *= 2
    if not cps or cps[-1] != n_max:
        cps.append(n_max)
    return tuple(cps)


def linear_checkpoints(j: int, n_max: int, count: int = 32) -> tuple[int, ...]:
    step = max(1, (n_max - j) // max(1, count - 1))
    cps = list(range(j, n_max + 1, step))
    if cps[-1] != n_max:
        cps.append(n_max)
    return tuple(cps)


def common_friends_bruteforce(state: GraphState, i: int, j: int) -> int:
    """Oracle recount straight from adjacency: third vertices adjacent to both."""
    _check_pair_in_state(state, i, j)
    commons = state.neighbors(i) & state.neighbors(j)
    commons.discard(i)
    commons.discard(j)
    return len(commons)


def init_pair(state: GraphState, i: int, j: int, checkpoints: Sequence[int] = (),
              record_steps: bool = False) -> PairTracker:
    """Start tracking (i, j) from a state with n >= j.

    The initial count is the sorted-set intersection of the two neighbor sets
    with i and j themselves stripped (node 1's self-loops make it its own
    neighbor, never its own common friend).
    """
    _check_pair_in_state(state, i, j)
    nb_i = np.fromiter(state.neighbors(i), dtype=np.int64)
    nb_j = np.fromiter(state.neighbors(j), dtype=np.int64)
    common = np.intersect1d(nb_i, nb_j)
    n_ij = int(common.size - np.isin(common, (i, j)).sum())
    return PairTracker(
        i=i, j=j, n=state.n, n_ij=n_ij,
        x_i=state.degree(i) + state.params.delta,
        x_j=state.degree(j) + state.params.delta,
        checkpoints=tuple(checkpoints), record_steps=record_steps)


def _check_pair_in_state(state: GraphState, i: int, j: int) -> None:
    if i >= j:
        raise ParameterError(f"need i < j, got ({i}, {j})")
    if j > state.n:
        raise ParameterError(f"node {j} does not exist yet (n={state.n})")
    if i < 1:
        raise ParameterError(f"node ids start at 1, got i={i}")


TRAJECTORY_HEADER = "n,pair_i,pair_j,n_ij,x_i,x_j,y_ij,scaled"


def write_trajectory_csv(out: TextIO, trackers: Iterable[PairTracker],
                         constants: RegimeConstants,
                         metadata: dict | None = None,
                         replicate_column: bool = False,
                         replicate_ids: Sequence[int] | None = None) -> None:
    """Checkpoint rows in the fixed column contract, one row per checkpoint."""
    for key, value in (metadata or {}).items():
        out.write(f"# {key}={value}\n")
    header = TRAJECTORY_HEADER if not replicate_column else "replicate," + TRAJECTORY_HEADER
    out.write(header + "\n")
    trackers = list(trackers)
    ids = list(replicate_ids) if replicate_ids is not None else [0] * len(trackers)
    for rep, tracker in zip(ids, trackers):
        for pt in tracker.trajectory:
            scaled = pt.n_ij / regime_normalizer(pt.n, constants) if pt.n >= 2 else math.nan
            prefix = f"{rep}," if replicate_column else ""
            out.write(f"{prefix}{pt.n},{tracker.i},{tracker.j},{pt.n_ij},"
                      f"{pt.x_i:.17g},{pt.x_j:.17g},{pt.y_ij:.17g},{scaled:.17g}\n")
