"""Pair trackers: per-arrival updates, initialization by intersection, the
brute-force oracle equivalence, scaled statistics, and the subsample estimator."""
import io

import numpy as np
import pytest

from pafriends import (ModelParams, ParameterError, StepOutcome, estimate,
                       evolve, common_friends_bruteforce, init_pair,
                       new_graph, scaled_statistic, state_from_targets, step,
                       write_trajectory_csv)
from pafriends.theory import regime_constants
from pafriends.trackers import (PairTracker, geometric_checkpoints,
                                linear_checkpoints)


def make_tracker(i=2, j=3, n=3, n_ij=0, x_i=2.0, x_j=2.0, **kw):
    return PairTracker(i=i, j=j, n=n, n_ij=n_ij, x_i=x_i, x_j=x_j, **kw)


class TestOnStep:
    def test_miss_on_j_leaves_count(self):
        t = make_tracker()
        t.on_step(StepOutcome(new_node=4, targets=(2, 2)))
        assert t.n_ij == 0
        assert t.x_i == 4.0 and t.x_j == 2.0

    def test_both_hit_increments(self):
        t = make_tracker()
        t.on_step(StepOutcome(new_node=4, targets=(2, 3)))
        assert t.n_ij == 1

    def test_multiplicity_ignored(self):
        # c=3 arrival lands 2 stubs on i and 1 on j: still one new common friend
        t = make_tracker()
        t.on_step(StepOutcome(new_node=4, targets=(2, 2, 3)))
        assert t.n_ij == 1
        assert t.x_i == 4.0 and t.x_j == 3.0

    def test_y_consistency(self):
        t = make_tracker()
        for new in range(4, 30):
            t.on_step(StepOutcome(new_node=new, targets=(2, 3) if new % 3 else (1, 1)))
            assert t.y_ij == t.x_i * t.x_j

    def test_rejects_arrival_before_j(self):
        t = make_tracker()
        with pytest.raises(ParameterError):
            t.on_step(StepOutcome(new_node=3, targets=(1, 2)))

    def test_block_equals_stepwise(self):
        a = make_tracker(record_steps=True)
        b = make_tracker(record_steps=True)
        rows = np.array([[2, 3], [1, 1], [2, 2], [3, 2], [1, 3]])
        for offset, row in enumerate(rows):
            a.on_step(StepOutcome(new_node=4 + offset, targets=tuple(int(x) for x in row)))
        b.on_block(4, rows)
        assert (a.n, a.n_ij, a.x_i, a.x_j) == (b.n, b.n_ij, b.x_i, b.x_j)
        assert np.array_equal(a.count_path(), b.count_path())
        assert np.array_equal(a.x_paths()[0], b.x_paths()[0])


class TestInitPair:
    def test_tiny_graph_pair_23(self, tiny_graph):
        assert init_pair(tiny_graph, 2, 3).n_ij == 1  # node 1 is the common friend

    def test_tiny_graph_pair_12(self, tiny_graph):
        assert init_pair(tiny_graph, 1, 2).n_ij == 1  # node 3 befriended both

    def test_pair_12_at_n2(self, params_c2):
        state = state_from_targets(params_c2, [[1, 1]])
        assert init_pair(state, 1, 2).n_ij == 0  # no third node exists

    def test_rejects_bad_pairs(self, tiny_graph):
        with pytest.raises(ParameterError):
            init_pair(tiny_graph, 3, 2)
        with pytest.raises(ParameterError):
            init_pair(tiny_graph, 2, 2)
        with pytest.raises(ParameterError):
            init_pair(tiny_graph, 2, 4)

    def test_initial_count_bound(self):
        # N_ij(j) <= max(j-2, c) on random states
        params = ModelParams(2, -1.0)
        for seed in range(5):
            state = evolve(new_graph(params, seed), 40)
            for i, j in ((2, 3), (2, 10), (5, 40)):
                t = init_pair(state, i, j)
                assert t.n_ij <= max(state.n - 2, params.c)


class TestBruteForce:
    def test_star_graph(self, star_graph):
        assert common_friends_bruteforce(star_graph, 2, 3) == 1
        assert common_friends_bruteforce(star_graph, 4, 6) == 1

    def test_disjoint_neighborhoods(self, params_c2):
        # 4 -> {2,2}, 5 -> {3,3}: pair (4,5) shares nobody
        state = state_from_targets(params_c2, [[1, 1], [1, 1], [2, 2], [3, 3]])
        assert common_friends_bruteforce(state, 4, 5) == 0

    def test_matches_tracker_along_trajectory(self):
        params = ModelParams(2, -1.5)
        state = new_graph(params, seed=321)
        evolve(state, 20)
        tracker = init_pair(state, 5, 9)
        for _ in range(400):
            outcome = step(state)
            tracker.on_step(outcome)
        assert tracker.n_ij == common_friends_bruteforce(state, 5, 9)

    def test_oracle_equivalence_randomized(self):
        # tracked count equals adjacency recount at every checkpoint
        rng = np.random.Generator(np.random.Philox(key=2))
        for trial in range(10):
            c = int(rng.integers(2, 5))
            delta = float(rng.uniform(-c + 0.3, 2.0))
            params = ModelParams(c, delta)
            state = new_graph(params, seed=1000 + trial)
            j = int(rng.integers(4, 30))
            i = int(rng.integers(2, j))
            evolve(state, j)
            tracker = init_pair(state, i, j, checkpoints=geometric_checkpoints(j, 2000))
            evolve(state, 2000, observers=[tracker])
            assert tracker.n_ij == common_friends_bruteforce(state, i, j)

    def test_monotone_zero_one_increments(self):
        params = ModelParams(2, -1.5)
        state = new_graph(params, seed=9)
        evolve(state, 10)
        tracker = init_pair(state, 2, 10, record_steps=True)
        evolve(state, 3000, observers=[tracker])
        path = tracker.count_path()
        steps = np.diff(path)
        assert np.all(steps >= 0) and np.all(steps <= 1)

    def test_count_bounded_by_degrees_and_n(self):
        # n_ij <= min(D_i, D_j) and n_ij <= n - 2 along random trajectories
        for seed in range(4):
            params = ModelParams(2, -1.0)
            state = new_graph(params, seed=seed)
            evolve(state, 12)
            tracker = init_pair(state, 3, 12)
            for stop in (50, 200, 800):
                evolve(state, stop, observers=[tracker])
                assert tracker.n_ij <= min(state.degree(3), state.degree(12))
                assert tracker.n_ij <= state.n - 2


class TestScaledAndEstimates:
    def test_scaled_log_regime(self):
        k = regime_constants(2, 0.0)
        # log-regime normalizer at n = e^2 is exactly 2
        s = scaled_statistic(5, np.e**2, k)
        assert s.value == pytest.approx(2.5, rel=1e-12)
        assert s.regime == "logarithmic"

    def test_scaled_power_regime(self):
        k = regime_constants(2, -1.5)
        s = scaled_statistic(12, 100, k)
        assert s.value == pytest.approx(0.45428928802573914, rel=1e-12)

    def test_scaled_static_identity(self):
        k = regime_constants(2, 1.5)
        assert scaled_statistic(3, 50, k).value == 3

    def test_estimate_static(self):
        k = regime_constants(2, 1.5)
        t = make_tracker(n_ij=3)
        assert estimate(t, 2, k) == 3

    def test_estimate_power_rescales(self):
        k = regime_constants(2, -1.5)
        t = make_tracker(n_ij=5)
        assert estimate(t, 4, k) == pytest.approx(11.48698354997035, rel=1e-12)

    def test_estimate_zero_count(self):
        k = regime_constants(2, 0.0)
        assert estimate(make_tracker(n_ij=0), 7.5, k) == 0.0

    def test_estimate_rejects_k_not_above_one(self):
        k = regime_constants(2, 0.0)
        with pytest.raises(ParameterError):
            estimate(make_tracker(), 1.0, k)

    def test_limit_estimate_product(self):
        k = regime_constants(2, -1.5)
        t = make_tracker(n=100, x_i=6.5, x_j=3.5)
        est = t.limit_estimate(k)
        assert est.y_inf_hat == pytest.approx(est.d_i_inf_hat * est.d_j_inf_hat)
        assert est.d_i_inf_hat == pytest.approx(6.5 / 100**0.8, rel=1e-12)


class TestCheckpoints:
    def test_geometric_spacing(self):
        assert geometric_checkpoints(3, 100) == (3, 6, 12, 24, 48, 96, 100)
        assert geometric_checkpoints(10, 80) == (10, 20, 40, 80)

    def test_linear_spacing(self):
        cps = linear_checkpoints(10, 100, count=10)
        assert cps[0] == 10 and cps[-1] == 100
        assert all(b - a == 10 for a, b in zip(cps, cps[1:]))


class TestMixedObservers:
    def test_tracker_plus_callable_forces_stepwise_path(self):
        params = ModelParams(2, 0.0)
        state = new_graph(params, seed=71)
        evolve(state, 5)
        tracker = init_pair(state, 2, 5)
        seen = []
        evolve(state, 60, observers=[tracker, lambda out, pre: seen.append(out.new_node)])
        assert seen == list(range(6, 61))
        assert tracker.n_ij == common_friends_bruteforce(state, 2, 5)

        # same seed through the block path lands on the same values
        state2 = new_graph(params, seed=71)
        evolve(state2, 5)
        tracker2 = init_pair(state2, 2, 5)
        evolve(state2, 60, observers=[tracker2])
        assert (tracker.n_ij, tracker.x_i, tracker.x_j) == (tracker2.n_ij, tracker2.x_i, tracker2.x_j)


class TestTrajectoryCsv:
    def test_column_contract(self):
        params = ModelParams(2, -1.5)
        state = new_graph(params, seed=55)
        evolve(state, 10)
        tracker = init_pair(state, 2, 10, checkpoints=(10, 20, 40, 80))
        evolve(state, 100, observers=[tracker])
        buf = io.StringIO()
        write_trajectory_csv(buf, [tracker], regime_constants(2, -1.5),
                             metadata={"seed": 55})
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# seed=55"
        assert lines[1] == "n,pair_i,pair_j,n_ij,x_i,x_j,y_ij,scaled"
        rows = [line.split(",") for line in lines[2:]]
        assert [r[0] for r in rows] == ["10", "20", "40", "80"]
        for r in rows:
            assert float(r[6]) == pytest.approx(float(r[4]) * float(r[5]))
