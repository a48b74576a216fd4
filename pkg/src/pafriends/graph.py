"""Linear preferential attachment multigraph: state, one-step evolution, sampling.

The process starts from a single node carrying ``c`` self-loops. Each arrival
brings ``c`` stubs, every stub independently attached to an existing node with
probability proportional to its shifted degree ``D_i + delta``. Degrees count
stub multiplicity (a self-loop adds 2), so the total weight after n arrivals
is exactly ``(2c + delta) * n``.
"""
from __future__ import annotations

import numbers
import warnings
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Protocol, Sequence, runtime_checkable

import numpy as np

from . import _kernels

DEFAULT_BLOCK_STEPS = 1 << 15
# Exact tree rebuild cadence; caps float drift from incremental weight updates.
REBUILD_INTERVAL = 1 << 20

MAX_SEED = (1 << 64) - 1


class ParameterError(ValueError):
    """Raised when model parameters or operation arguments leave the admissible domain."""


class ModelWarning(UserWarning):
    """Emitted for parameter choices outside the range the growth theorems cover."""


def derive_rng(master_seed: int, replicate_id: int = 0) -> np.random.Generator:
    """Counter-based stream for (master_seed, replicate_id).

    Distinct key pairs select provably disjoint Philox streams, so replicates
    never share draws regardless of scheduling.
    """
    if not 0 <= master_seed <= MAX_SEED:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {master_seed}")
    if not 0 <= replicate_id <= MAX_SEED:
        raise ParameterError(f"replicate_id must be a 64-bit unsigned integer, got {replicate_id}")
    key = master_seed | (replicate_id << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ModelParams:
    """Edge count per arrival and the attachment shift.

    The growth theorems assume c >= 2; c = 1 is accepted for completeness but
    flagged with a ModelWarning. Admissibility requires delta > -c so every
    node keeps strictly positive sampling weight.
    """

    c: int
    delta: float

    def __post_init__(self):
        if not isinstance(self.c, numbers.Integral) or isinstance(self.c, bool):
            raise ParameterError(f"c must be an integer, got {self.c!r}")
        object.__setattr__(self, "c", int(self.c))
        if self.c < 1:
            raise ParameterError(f"c must be >= 1, got {self.c}")
        delta = float(self.delta)
        object.__setattr__(self, "delta", delta)
        if not np.isfinite(delta) or delta <= -self.c:
            raise ParameterError(f"delta must satisfy delta > -c, got delta={delta} with c={self.c}")
        if self.c == 1:
            warnings.warn("c = 1 is outside the c >= 2 range of the growth theorems", ModelWarning, stacklevel=2)

    @property
    def within_theorem_range(self) -> bool:
        return self.c >= 2

    @property
    def weight_rate(self) -> float:
        """Total sampling weight per node count: 2c + delta."""
        return 2 * self.c + self.delta


@dataclass(frozen=True)
class StepOutcome:
    """Result of one arrival: the new node id and its c chosen endpoints."""

    new_node: int
    targets: tuple[int, ...]

    @cached_property
    def delta_per_node(self) -> dict[int, int]:
        """Stub multiplicity landing on each target node."""
        return dict(Counter(self.targets))


class CumulativeWeights:
    """Fenwick tree over positive node weights with O(log n) sample and update."""

    __slots__ = ("tree", "cap", "size")

    def __init__(self, cap: int):
        if cap < 1 or cap & (cap - 1):
            raise ValueError(f"capacity must be a power of two, got {cap}")
        self.cap = cap
        self.tree = np.zeros(cap + 1)
        self.size = 0

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "CumulativeWeights":
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        cap = 1
        while cap < w.size:
            cap <<= 1
        idx = cls(cap)
        idx.size = w.size
        _kernels.fenwick_build(w, idx.tree, cap)
        return idx

    @property
    def total(self) -> float:
        return float(self.tree[self.cap])

    def entry(self, i: int) -> float:
        if not 1 <= i <= self.size:
            raise IndexError(f"index {i} out of range 1..{self.size}")
        return float(_kernels.fenwick_prefix(self.tree, i) - _kernels.fenwick_prefix(self.tree, i - 1))

    def add(self, i: int, delta: float) -> None:
        if not 1 <= i <= self.cap:
            raise IndexError(f"index {i} out of range 1..{self.cap}")
        self.size = max(self.size, i)
        _kernels.fenwick_add(self.tree, self.cap, i, float(delta))

    def find(self, u: float) -> int:
        """The unique i with cumsum(i-1) <= u < cumsum(i)."""
        if not 0.0 <= u < self.total:
            raise ParameterError(f"u={u} outside [0, total={self.total})")
        i = int(_kernels.fenwick_find(self.tree, self.cap, float(u)))
        return min(i, self.size)

    def rebuild(self, weights: np.ndarray) -> None:
        if weights.size != self.size:
            raise ValueError("rebuild weight vector must match current size")
        _kernels.fenwick_build(np.asarray(weights, dtype=np.float64), self.tree, self.cap)

    def grown(self, new_cap: int, weights: np.ndarray) -> "CumulativeWeights":
        out = CumulativeWeights(new_cap)
        out.size = self.size
        _kernels.fenwick_build(np.asarray(weights, dtype=np.float64), out.tree, new_cap)
        return out


def sample_weighted(weights: CumulativeWeights, u: float) -> int:
    """Sample from a cumulative-weight index: the node whose weight interval contains u."""
    return weights.find(u)


class GraphState:
    """Evolving multigraph state.

    Owns the per-node degrees, the cumulative-weight index over D_i + delta,
    the per-arrival endpoint log (the full multigraph, since every edge joins
    an arrival to its targets), and the deterministic random stream. Single
    threaded by design: transferable between threads, never shared mutably.
    """

    def __init__(self, params: ModelParams, rng: np.random.Generator, capacity: int = 1024):
        self.params = params
        self.rng = rng
        cap = 1024
        while cap < capacity:
            cap <<= 1
        self.n = 1
        self._degrees = np.zeros(cap + 1, dtype=np.int64)
        self._degrees[1] = 2 * params.c
        self._targets_log = np.zeros((cap, params.c), dtype=np.int64)
        self.weights = CumulativeWeights(cap)
        self.weights.add(1, params.weight_rate)

    # -- views ---------------------------------------------------------------

    @property
    def degrees(self) -> np.ndarray:
        """Degrees of nodes 1..n (read-only view)."""
        view = self._degrees[1 : self.n + 1]
        view.flags.writeable = False
        return view

    def degree(self, i: int) -> int:
        self._check_node(i)
        return int(self._degrees[i])

    @property
    def total_weight(self) -> float:
        return self.weights.total

    def index_weight(self, i: int) -> float:
        """Weight the sampler currently assigns to node i."""
        self._check_node(i)
        return self.weights.entry(i)

    def targets_of(self, m: int) -> tuple[int, ...]:
        """Endpoints chosen by arrival m (m >= 2)."""
        if not 2 <= m <= self.n:
            raise ParameterError(f"arrival id {m} out of range 2..{self.n}")
        return tuple(int(t) for t in self._targets_log[m - 2])

    @property
    def targets_log(self) -> np.ndarray:
        """Endpoint log rows for arrivals 2..n (read-only view)."""
        view = self._targets_log[: self.n - 1]
        view.flags.writeable = False
        return view

    def neighbors(self, i: int) -> set[int]:
        """Distinct neighbors of node i (multiplicity collapsed).

        Node 1 records itself via its initial self-loops.
        """
        self._check_node(i)
        nb: set[int] = {1} if i == 1 else set(int(t) for t in self._targets_log[i - 2])
        rows = self._targets_log[: self.n - 1]
        hit = np.nonzero((rows == i).any(axis=1))[0]
        nb.update(int(m) + 2 for m in hit)
        return nb

    def _check_node(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise ParameterError(f"node id {i} out of range 1..{self.n}")

    def check_invariants(self) -> None:
        """Degree conservation and weight-index consistency; cheap enough for tests."""
        c, delta = self.params.c, self.params.delta
        total_deg = int(self._degrees[1 : self.n + 1].sum())
        if total_deg != 2 * c * self.n:
            raise AssertionError(f"degree sum {total_deg} != 2cn = {2 * c * self.n}")
        expected = self.params.weight_rate * self.n
        if abs(self.total_weight - expected) > 1e-9 * max(1.0, abs(expected)):
            raise AssertionError(f"weight total {self.total_weight} != (2c+delta)n = {expected}")

    # -- evolution -----------------------------------------------------------

    def _ensure_capacity(self, target_n: int) -> None:
        cap = self.weights.cap
        if target_n <= cap:
            return
        while cap < target_n:
            cap <<= 1
        degrees = np.zeros(cap + 1, dtype=np.int64)
        degrees[: self._degrees.size] = self._degrees
        log = np.zeros((cap, self.params.c), dtype=np.int64)
        log[: self.n - 1] = self._targets_log[: self.n - 1]
        self._degrees = degrees
        self._targets_log = log
        self.weights = self.weights.grown(cap, self._node_weights())

    def _node_weights(self) -> np.ndarray:
        return self._degrees[1 : self.n + 1].astype(np.float64) + self.params.delta

    def _maybe_rebuild(self) -> None:
        # keyed to absolute n so the block and per-step paths rebuild at the
        # same trajectory points
        if self.n % REBUILD_INTERVAL == 0:
            self.weights.rebuild(self._node_weights())

    def clone(self) -> "GraphState":
        """Independent deep copy, including the random stream position."""
        dup = GraphState.__new__(GraphState)
        dup.params = self.params
        dup.n = self.n
        dup._degrees = self._degrees.copy()
        dup._targets_log = self._targets_log.copy()
        dup.weights = CumulativeWeights(self.weights.cap)
        dup.weights.tree[:] = self.weights.tree
        dup.weights.size = self.weights.size
        dup.rng = np.random.Generator(np.random.Philox())
        dup.rng.bit_generator.state = self.rng.bit_generator.state
        return dup


def new_graph(params: ModelParams, seed: int, replicate_id: int = 0, capacity: int = 1024) -> GraphState:
    """Fresh state: one node with c self-loops, deterministically seeded."""
    return GraphState(params, derive_rng(seed, replicate_id), capacity)


def state_from_targets(params: ModelParams, targets: Iterable[Sequence[int]],
                       rng: np.random.Generator | None = None) -> GraphState:
    """Rebuild a state from an explicit endpoint log (arrival m=2 first).

    Validates that every row has c endpoints drawn from the nodes existing at
    that arrival. Used by snapshot restore and by tests that need a specific
    graph.
    """
    rows = [tuple(int(t) for t in row) for row in targets]
    c = params.c
    n = len(rows) + 1
    for m, row in enumerate(rows, start=2):
        if len(row) != c:
            raise ParameterError(f"arrival {m} has {len(row)} endpoints, expected c={c}")
        if any(not 1 <= t <= m - 1 for t in row):
            raise ParameterError(f"arrival {m} targets {row} outside 1..{m - 1}")
    state = GraphState(params, rng if rng is not None else derive_rng(0), capacity=max(n, 1024))
    if rows:
        arr = np.asarray(rows, dtype=np.int64)
        state._targets_log[: n - 1] = arr
        hits = np.bincount(arr.ravel(), minlength=n + 1)
        state._degrees[1 : n + 1] = c
        state._degrees[1] = 2 * c
        state._degrees[: n + 1] += hits
        state.n = n
        state.weights.size = n
        state.weights.rebuild(state._node_weights())
    return state


def sample_arrival_targets(state: GraphState) -> tuple[int, ...]:
    """One conditional draw of the next arrival's endpoints; advances only the rng."""
    c = state.params.c
    u_row = state.rng.random(c)
    out = np.empty(c, dtype=np.int64)
    _kernels.sample_targets(state.weights.tree, state.weights.cap, state.n, u_row, out)
    return tuple(int(t) for t in out)


def _apply_arrival(state: GraphState, targets: Sequence[int]) -> int:
    state._ensure_capacity(state.n + 1)
    row = np.asarray(targets, dtype=np.int64)
    state._targets_log[state.n - 1] = row
    state.n = _kernels.apply_arrival(
        state.weights.tree, state.weights.cap, state._degrees, state.n, row,
        state.params.c + state.params.delta)
    state.weights.size = state.n
    state._maybe_rebuild()
    return state.n


def step(state: GraphState) -> StepOutcome:
    """Advance by one arrival; returns the endpoints it chose."""
    targets = sample_arrival_targets(state)
    new_node = state.n + 1
    _apply_arrival(state, targets)
    return StepOutcome(new_node=new_node, targets=targets)


@runtime_checkable
class BlockObserver(Protocol):
    def on_block(self, first_new_node: int, targets: np.ndarray) -> None: ...


Observer = Callable[[StepOutcome, GraphState], None]


def _notify_step(observer, outcome: StepOutcome, state_pre: GraphState) -> None:
    on_step = getattr(observer, "on_step", None)
    if on_step is not None:
        on_step(outcome, state_pre)
    else:
        observer(outcome, state_pre)


def evolve(state: GraphState, target_n: int, observers: Sequence = (),
           block_steps: int = DEFAULT_BLOCK_STEPS) -> GraphState:
    """Apply arrivals until n = target_n, notifying every observer of each one.

    Observers exposing ``on_block(first_new_node, targets)`` are driven in
    vectorized blocks (the fast path). Any other observer is called per step
    as ``obs(outcome, state_pre)`` (or ``obs.on_step``) with the pre-arrival
    state, which forces the scalar path. The trajectory is identical either
    way: both paths consume exactly c uniforms per arrival in arrival order.
    """
    if target_n < state.n:
        raise ParameterError(f"target_n={target_n} below current n={state.n}")
    if target_n == state.n:
        return state
    block_mode = all(isinstance(o, BlockObserver) for o in observers)
    if not block_mode:
        while state.n < target_n:
            targets = sample_arrival_targets(state)
            outcome = StepOutcome(new_node=state.n + 1, targets=targets)
            for obs in observers:
                _notify_step(obs, outcome, state)
            _apply_arrival(state, targets)
        return state

    state._ensure_capacity(target_n)
    c, delta = state.params.c, state.params.delta
    while state.n < target_n:
        next_rebuild = REBUILD_INTERVAL * (state.n // REBUILD_INTERVAL + 1)
        steps = min(block_steps, target_n - state.n, next_rebuild - state.n)
        first_new = state.n + 1
        uniforms = state.rng.random((steps, c))
        block = state._targets_log[state.n - 1 : state.n - 1 + steps]
        state.n = _kernels.evolve_block(
            state.weights.tree, state.weights.cap, state._degrees, state.n,
            c + delta, uniforms, block)
        state.weights.size = state.n
        for obs in observers:
            obs.on_block(first_new, block)
        state._maybe_rebuild()
    return state
