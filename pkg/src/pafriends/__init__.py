"""Simulator and exact-theory toolkit for the shifted linear preferential
attachment graph, centered on the growth law of common-friend counts for
fixed node pairs and the subsample estimator built on it."""

__version__ = "0.1.0"

from .graph import (DEFAULT_BLOCK_STEPS, CumulativeWeights, GraphState,
                    ModelParams, ModelWarning, ParameterError, StepOutcome,
                    derive_rng, evolve, new_graph, sample_arrival_targets,
                    sample_weighted, state_from_targets, step)
from .snapshot import (SnapshotFormatError, load_snapshot, read_snapshot,
                       save_snapshot, write_snapshot)
from .theory import (ExpectationConstants, NodeOneCaveat, RegimeConstants,
                     conditional_product_enumeration,
                     conditional_product_expectation, exact_expected_x,
                     exact_expected_y, expectation_constants,
                     expected_common_increment_sum, expected_degree_limit,
                     gamma_ratio, increment_bounds, increment_probability,
                     limit_coefficient_mean, martingale_statistic,
                     regime_constants)
from .trackers import (LimitEstimate, PairTracker, ScaledStatistic,
                       common_friends_bruteforce, estimate,
                       geometric_checkpoints, init_pair, linear_checkpoints,
                       regime_normalizer, scaled_statistic,
                       write_trajectory_csv)
from .montecarlo import (ExperimentConfig, RatioStats, ReplicateRecord,
                         ReplicationSummary, SummaryStats, iter_replicates,
                         run, run_replicate, summarize, trajectory_export)
from .tolerances import TOLERANCE_VERSION, TOLERANCES, Tolerances
from .verify import (CheckResult, Report, check_common_friend_mean_c2,
                     check_estimator, check_exact_means, check_identities,
                     check_regimes, run_suite)

__all__ = [name for name in dir() if not name.startswith("_")]
