"""Verification harness: identity suite must pass at exact tolerance, the
statistical checks on small configs, and the report contract."""
import json

import pytest

from pafriends import (ExperimentConfig, ModelParams, ParameterError,
                       check_common_friend_mean_c2, check_estimator,
                       check_exact_means, check_identities, check_regimes)
from pafriends.verify import Report, default_power_config, run_suite


class TestIdentities:
    def test_all_pass(self):
        report = check_identities()
        assert report.passed
        assert all(r.hard for r in report.results)
        names = {r.name for r in report.results}
        assert {"sandwich_grid", "sandwich_equality_c2", "enumeration_identity",
                "martingale_one_step", "gamma_telescoping", "gamma_ratio_inverse"} <= names

    def test_report_serializes(self):
        report = check_identities()
        payload = json.loads(report.to_json())
        assert payload["passed"] is True
        assert payload["hard_failures"] == 0
        entry = payload["results"][0]
        assert {"name", "passed", "hard", "target", "achieved", "tolerance"} <= set(entry)


class TestExactMeans:
    def test_small_run_passes(self):
        cfg = ExperimentConfig(params=ModelParams(2, 0.0), pairs=((2, 3),),
                               n_max=200, checkpoints=(3, 50, 200),
                               replicates=800, master_seed=11)
        report = check_exact_means(cfg)
        assert report.passed, [r.to_dict() for r in report.results if not r.passed]
        zero_var = report[f"mean_x_3_n3"]
        assert zero_var.details.get("zero_variance")

    def test_rejects_node_one_pairs(self):
        cfg = ExperimentConfig(params=ModelParams(2, 0.0), pairs=((1, 3),),
                               n_max=50, checkpoints=(3, 50), replicates=10,
                               master_seed=11, allow_node_one=True)
        with pytest.raises(ParameterError):
            check_exact_means(cfg)


class TestCommonFriendMean:
    def test_exact_mode_c2(self):
        cfg = ExperimentConfig(params=ModelParams(2, 0.0), pairs=((2, 3),),
                               n_max=300, checkpoints=(3, 100, 300),
                               replicates=1200, master_seed=21)
        report = check_common_friend_mean_c2(cfg)
        assert report.metadata["mode"] == "exact"
        assert report.passed, [r.to_dict() for r in report.results if not r.passed]

    def test_bound_mode_c3(self):
        cfg = ExperimentConfig(params=ModelParams(3, -1.0), pairs=((2, 4),),
                               n_max=250, checkpoints=(4, 100, 250),
                               replicates=400, master_seed=31)
        report = check_common_friend_mean_c2(cfg)
        assert report.metadata["mode"] == "bounds"
        assert report.passed, [r.to_dict() for r in report.results if not r.passed]
        bounds = report["mean_dn_bounds_2_4_n250"]
        assert bounds.details["lo_sum_mean"] <= bounds.details["hi_sum_mean"]

    def test_requires_creation_checkpoint(self):
        cfg = ExperimentConfig(params=ModelParams(2, 0.0), pairs=((2, 3),),
                               n_max=100, checkpoints=(50, 100),
                               replicates=10, master_seed=1)
        with pytest.raises(ParameterError):
            check_common_friend_mean_c2(cfg)


class TestRegimeAndEstimatorSmoke:
    def test_power_only_smoke(self):
        cfg = default_power_config(replicates=300)
        report = check_regimes(None, None, cfg)
        names = [r.name for r in report.results]
        assert "power_scaled_last_doubling" in names
        assert "power_scaled_correlates_with_limit" in names
        assert report["power_scaled_correlates_with_limit"].achieved > 0.5

    def test_wrong_regime_config_rejected(self):
        cfg = default_power_config(replicates=10)
        with pytest.raises(ParameterError):
            check_regimes(cfg, None, None)

    def test_estimator_requires_k(self):
        cfg = ExperimentConfig(params=ModelParams(2, 1.5), pairs=((2, 3),),
                               n_max=100, checkpoints=(50, 100),
                               replicates=10, master_seed=1)
        with pytest.raises(ParameterError):
            check_estimator(cfg)

    def test_estimator_reports_median_and_iqr(self):
        cfg = ExperimentConfig(params=ModelParams(2, 1.5), pairs=((2, 3),),
                               n_max=400, checkpoints=(100, 200, 400),
                               replicates=150, master_seed=5, estimator_k=(2.0,))
        report = check_estimator(cfg)
        medians = [r for r in report.results if r.name.startswith("estimator_median")]
        assert medians and medians[0].achieved == pytest.approx(1.0, abs=0.1)


class TestRunSuite:
    def test_unknown_suite(self):
        with pytest.raises(ParameterError):
            run_suite("nonsense")

    def test_report_lookup(self):
        report = Report(suite="x")
        with pytest.raises(KeyError):
            report["missing"]
