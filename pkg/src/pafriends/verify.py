"""Verification harness: deterministic identity checks plus Monte Carlo
comparisons against the exact and asymptotic predictions of the theory module.

Every check is reproducible bit for bit from (config, master_seed). Hard
checks carry exact tolerances; statistical checks compare a Monte Carlo mean
against an exact expectation within z standard errors, or apply the
pilot-calibrated regime proxies from the tolerances file. A failed entry
names the check, the target, the achieved value, and the tolerance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .graph import ParameterError
from .montecarlo import ExperimentConfig, ReplicationSummary, run, run_replicate
from .theory import (REGIME_LOG, REGIME_POWER, REGIME_STATIC,
                     conditional_product_enumeration,
                     conditional_product_expectation, exact_expected_x,
                     exact_expected_y, expectation_constants,
                     expected_common_increment_sum, gamma_ratio,
                     increment_probability, increment_bounds,
                     martingale_statistic, regime_constants)
from .tolerances import TOLERANCE_VERSION, TOLERANCES, Tolerances
from .trackers import regime_normalizer

DEFAULT_MASTER_SEED = 20260810

SUITES = ("identities", "means", "regimes", "estimator")


@dataclass(frozen=True)
class CheckResult:
    """One named check: target, achieved value, tolerance, verdict."""

    name: str
    passed: bool
    hard: bool
    target: object
    achieved: object
    tolerance: object
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "hard": self.hard,
                "target": self.target, "achieved": self.achieved,
                "tolerance": self.tolerance, "details": self.details}


@dataclass
class Report:
    suite: str
    results: list[CheckResult] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, result: CheckResult) -> None:
        self.results.append(result)

    def extend(self, other: "Report") -> None:
        self.results.extend(other.results)

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def hard_failures(self) -> list[CheckResult]:
        return [r for r in self.results if r.hard and not r.passed]

    @property
    def statistical_failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.hard and not r.passed]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {"suite": self.suite,
                "metadata": {"package_version": __version__,
                             "tolerance_version": TOLERANCE_VERSION, **self.metadata},
                "passed": self.passed,
                "hard_failures": len(self.hard_failures),
                "statistical_failures": len(self.statistical_failures),
                "results": [r.to_dict() for r in self.results]}

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _z_check(name: str, values: np.ndarray, exact: float, tol: Tolerances,
             extra: dict | None = None) -> CheckResult:
    """Two-sided z test of a per-replicate sample mean against an exact target."""
    values = np.asarray(values, dtype=np.float64)
    mc_mean = float(values.mean())
    se = float(values.std(ddof=1)) / math.sqrt(values.size) if values.size > 1 else 0.0
    details = dict(extra or {})
    if se == 0.0:
        # degenerate sample (e.g. X_j at its own creation time); the slack only
        # absorbs last-ulp drift from the floating mean of identical values
        passed = math.isclose(mc_mean, exact, rel_tol=1e-12, abs_tol=0.0)
        z = 0.0 if passed else math.inf
        details["zero_variance"] = True
    else:
        z = (mc_mean - exact) / se
        passed = abs(z) <= tol.z_max
    details.update({"mc_mean": mc_mean, "se": se, "z": z, "replicates": int(values.size)})
    return CheckResult(name=name, passed=passed, hard=False, target=exact,
                       achieved=mc_mean, tolerance=f"|z| <= {tol.z_max}", details=details)


# --------------------------------------------------------------------------
# deterministic identity checks
# --------------------------------------------------------------------------

def check_identities(tol: Tolerances = TOLERANCES, seed: int = DEFAULT_MASTER_SEED) -> Report:
    """Sandwich bounds on the full (p_i, p_j, c) grid, enumeration-vs-formula
    identities, the martingale one-step identity, and Gamma telescoping.

    All entries are hard: they must hold to exact tolerance.
    """
    report = Report(suite="identities", metadata={"seed": seed})
    rng = np.random.Generator(np.random.Philox(key=seed))

    grid = [round(0.01 * t, 2) for t in range(0, 51)]
    worst_violation = -math.inf
    worst_c2_gap = 0.0
    points = 0
    for c in range(2, 7):
        for p_i in grid:
            for p_j in grid:
                if p_i + p_j > 1.0:
                    continue
                points += 1
                q = increment_probability(p_i, p_j, c)
                low, high = increment_bounds(p_i, p_j, c)
                worst_violation = max(worst_violation, low - q, q - high)
                if c == 2:
                    worst_c2_gap = max(worst_c2_gap, abs(q - high), abs(q - low))
    report.add(CheckResult(
        name="sandwich_grid", passed=worst_violation <= tol.sandwich_slack, hard=True,
        target=0.0, achieved=worst_violation, tolerance=tol.sandwich_slack,
        details={"points": points, "c_range": [2, 6]}))
    report.add(CheckResult(
        name="sandwich_equality_c2", passed=worst_c2_gap <= tol.sandwich_slack, hard=True,
        target=0.0, achieved=worst_c2_gap, tolerance=tol.sandwich_slack))

    worst_rel = 0.0
    for _ in range(100):
        c = int(rng.integers(2, 6))
        delta = float(rng.uniform(-c + 0.25, 3.0))
        n = int(rng.integers(3, 5000))
        # shifted degrees of a realizable state: positive, jointly below (2c+delta)n
        x_i = float(rng.uniform(c + delta, (2 * c + delta) * n / 4))
        x_j = float(rng.uniform(c + delta, (2 * c + delta) * n / 4))
        formula = conditional_product_expectation(x_i, x_j, n, c, delta)
        enum = conditional_product_enumeration(x_i, x_j, n, c, delta)
        worst_rel = max(worst_rel, abs(formula - enum) / abs(formula))
    report.add(CheckResult(
        name="enumeration_identity", passed=worst_rel <= tol.enumeration_rel, hard=True,
        target=0.0, achieved=worst_rel, tolerance=tol.enumeration_rel,
        details={"samples": 100}))

    worst_rel = 0.0
    for _ in range(50):
        c = int(rng.integers(2, 6))
        delta = float(rng.uniform(-c + 0.25, 3.0))
        k = regime_constants(c, delta)
        ec = expectation_constants(2, 3, k)
        n = int(rng.integers(3, 2000))
        x_i = float(rng.uniform(c + delta, (2 * c + delta) * n / 4))
        x_j = float(rng.uniform(c + delta, (2 * c + delta) * n / 4))
        w_now = martingale_statistic(x_i * x_j, n, ec.c_ij, k)
        ey_next = conditional_product_enumeration(x_i, x_j, n, c, delta)
        w_next = martingale_statistic(ey_next, n + 1, ec.c_ij, k)
        worst_rel = max(worst_rel, abs(w_next - w_now) / abs(w_now))
    report.add(CheckResult(
        name="martingale_one_step", passed=worst_rel <= tol.identity_rel, hard=True,
        target=0.0, achieved=worst_rel, tolerance=tol.identity_rel,
        details={"samples": 50}))

    worst_rel = 0.0
    for c, delta in ((2, 0.0), (2, -1.5), (2, 1.5), (3, -1.0), (4, 2.0), (5, -3.5)):
        k = regime_constants(c, delta)
        for i in (2, 3, 10, 50):
            worst_rel = max(worst_rel, abs(exact_expected_x(i, i, k) - (c + delta)) / (c + delta))
        for i, j in ((2, 3), (2, 10), (5, 9)):
            lhs = exact_expected_y(i, j, j, k)
            rhs = (c + delta) ** 2 * gamma_ratio(j, k.gamma) / gamma_ratio(i, k.gamma)
            worst_rel = max(worst_rel, abs(lhs - rhs) / abs(rhs))
    report.add(CheckResult(
        name="gamma_telescoping", passed=worst_rel <= tol.telescoping_rel, hard=True,
        target=0.0, achieved=worst_rel, tolerance=tol.telescoping_rel))

    worst_rel = 0.0
    for n in (0.25, 0.5, 1.0, 2.0, 7.5, 31.0, 33.0, 1e3, 1e6, 1e9):
        for a in (-0.9, -0.5, 0.146, 0.5, 0.854, 1.0, 1.7):
            if n + a <= 0:
                continue
            prod = gamma_ratio(n, a) * gamma_ratio(n + a, -a)
            worst_rel = max(worst_rel, abs(prod - 1.0))
    report.add(CheckResult(
        name="gamma_ratio_inverse", passed=worst_rel <= tol.gamma_identity_rel, hard=True,
        target=1.0, achieved=1.0 + worst_rel, tolerance=tol.gamma_identity_rel))
    return report


# --------------------------------------------------------------------------
# exact finite-n means
# --------------------------------------------------------------------------

def check_exact_means(config: ExperimentConfig, tol: Tolerances = TOLERANCES,
                      workers: int = 1, summary: ReplicationSummary | None = None) -> Report:
    """MC means of X_i, X_j and Y_ij at every checkpoint vs their exact
    Gamma-ratio expectations, reported as z-scores."""
    for i, _ in config.pairs:
        if i < 2:
            raise ParameterError("exact-mean checks require pairs with i >= 2 (node-1 caveat)")
    if summary is None:
        summary = run(config, workers=workers)
    k = config.constants
    report = Report(suite="means", metadata={"config": config.to_dict()})
    for pair in config.pairs:
        i, j = pair
        xi, xj = summary.x_i[pair], summary.x_j[pair]
        for idx, cp in enumerate(config.checkpoints):
            if cp < j:
                continue
            report.add(_z_check(f"mean_x_{i}_n{cp}", xi[:, idx],
                                exact_expected_x(i, cp, k), tol, {"pair": list(pair)}))
            report.add(_z_check(f"mean_x_{j}_n{cp}", xj[:, idx],
                                exact_expected_x(j, cp, k), tol, {"pair": list(pair)}))
            report.add(_z_check(f"mean_y_{i}_{j}_n{cp}", xi[:, idx] * xj[:, idx],
                                exact_expected_y(i, j, cp, k), tol, {"pair": list(pair)}))
    return report


# --------------------------------------------------------------------------
# common-friend mean: exact telescoped sum at c = 2, bound mode for c >= 3
# --------------------------------------------------------------------------

def check_common_friend_mean_c2(config: ExperimentConfig, tol: Tolerances = TOLERANCES,
                                workers: int = 1,
                                summary: ReplicationSummary | None = None) -> Report:
    """MC mean of N_ij(n) - N_ij(j) vs the exact telescoped increment sum.

    The sum is exact only at c = 2, where the upper bound holds with
    equality. For c >= 3 the run switches to bound mode: the mean is compared
    against the per-replicate conditional-increment sums (an exact-mean check
    by the tower property) and sandwiched between the Monte Carlo L- and
    R-sums, since the lower bound has no closed-form expectation.
    """
    report = Report(suite="means", metadata={"config": config.to_dict(), "mode": None})
    k = config.constants
    cps = config.checkpoints
    for _, j in config.pairs:
        if j not in cps:
            raise ParameterError(f"checkpoints must include each pair's creation time (missing {j})")
    if config.params.c == 2:
        report.metadata["mode"] = "exact"
        if summary is None:
            summary = run(config, workers=workers)
        for pair in config.pairs:
            i, j = pair
            counts = summary.counts[pair]
            j_idx = cps.index(j)
            for idx, cp in enumerate(cps):
                if cp <= j:
                    continue
                growth = counts[:, idx] - counts[:, j_idx]
                exact = expected_common_increment_sum(i, j, j, cp, k)
                report.add(_z_check(f"mean_dn_{i}_{j}_n{cp}", growth, exact, tol,
                                    {"pair": list(pair)}))
        return report

    report.metadata["mode"] = "bounds"
    stepped = ExperimentConfig(
        params=config.params, pairs=config.pairs, n_max=config.n_max,
        checkpoints=config.checkpoints, replicates=config.replicates,
        master_seed=config.master_seed, estimator_k=config.estimator_k,
        allow_node_one=config.allow_node_one, record_steps=True)
    c, delta = config.params.c, config.params.delta
    rate = 2 * c + delta
    per_pair = {pair: {"dn": [], "q": [], "lo": [], "hi": []} for pair in config.pairs}
    for rep in range(config.replicates):
        record = run_replicate(stepped, rep, keep_trackers=True)
        for pair, tracker in record.trackers.items():
            i, j = pair
            xi, xj = tracker.x_paths()
            ks = np.arange(j, config.n_max)
            p_i = xi[:-1] / (rate * ks)
            p_j = xj[:-1] / (rate * ks)
            q = (1.0 - (1.0 - p_i) ** c - (1.0 - p_j) ** c + (1.0 - p_i - p_j) ** c)
            hi = c * (c - 1) * p_i * p_j
            lo = hi * (1.0 - 0.5 * (c - 2) * (p_i + p_j))
            path = tracker.count_path()
            sel = [cp - j for cp in cps if cp >= j]
            d = per_pair[pair]
            d["dn"].append(path[sel] - path[0])
            d["q"].append(np.concatenate(([0.0], np.cumsum(q)))[sel])
            d["lo"].append(np.concatenate(([0.0], np.cumsum(lo)))[sel])
            d["hi"].append(np.concatenate(([0.0], np.cumsum(hi)))[sel])
    for pair in config.pairs:
        i, j = pair
        d = {key: np.vstack(v) for key, v in per_pair[pair].items()}
        eval_cps = [cp for cp in cps if cp >= j]
        for idx, cp in enumerate(eval_cps):
            if cp <= j:
                continue
            growth = d["dn"][:, idx]
            q_sum = d["q"][:, idx]
            # tower property: E[sum of conditional increment probabilities] = E[growth]
            diff = growth - q_sum
            report.add(_z_check(f"mean_dn_vs_qsum_{i}_{j}_n{cp}", diff, 0.0, tol,
                                {"pair": list(pair), "mc_qsum_mean": float(q_sum.mean())}))
            lo_mean = float(d["lo"][:, idx].mean())
            hi_mean = float(d["hi"][:, idx].mean())
            se = float(growth.std(ddof=1)) / math.sqrt(len(growth))
            g_mean = float(growth.mean())
            slack = tol.z_max * se
            passed = lo_mean - slack <= g_mean <= hi_mean + slack
            report.add(CheckResult(
                name=f"mean_dn_bounds_{i}_{j}_n{cp}", passed=passed, hard=False,
                target=f"[{lo_mean:.6g}, {hi_mean:.6g}]", achieved=g_mean,
                tolerance=f"z_max={tol.z_max} (se={se:.3g})",
                details={"pair": list(pair), "lo_sum_mean": lo_mean, "hi_sum_mean": hi_mean}))
    return report


# --------------------------------------------------------------------------
# regimes
# --------------------------------------------------------------------------

def _cesaro_diagnostics(config: ExperimentConfig, pair: tuple[int, int],
                        tol: Tolerances, sample: int = 40) -> list[CheckResult]:
    """Trajectory Cesaro sums of Y(k)/k^2 (and the correction-factor variant)
    against the regime normalizer: monitored series, pass/fail only on
    stabilization of the last two checkpoints."""
    k = config.constants
    if k.regime == REGIME_STATIC:
        return []
    c, delta = config.params.c, config.params.delta
    rate = 2 * c + delta
    stepped = ExperimentConfig(
        params=config.params, pairs=(pair,), n_max=config.n_max,
        checkpoints=config.checkpoints, replicates=config.replicates,
        master_seed=config.master_seed, allow_node_one=config.allow_node_one,
        record_steps=True)
    i, j = pair
    eval_cps = [cp for cp in config.checkpoints if cp >= max(j, 2)]
    if len(eval_cps) < 2:
        return []
    rel_changes, star_changes, gaps = [], [], []
    count = min(sample, config.replicates)
    for rep in range(count):
        record = run_replicate(stepped, rep, keep_trackers=True)
        tracker = record.trackers[pair]
        xi, xj = tracker.x_paths()
        ks = np.arange(j, config.n_max + 1)
        y = xi * xj
        terms = y / ks.astype(np.float64) ** 2
        correction = 1.0 - 0.5 * (c - 2) * (xi + xj) / (rate * ks)
        sums = np.cumsum(terms)
        star_sums = np.cumsum(terms * correction)
        idx = [cp - j for cp in eval_cps]
        norm = np.asarray(regime_normalizer(np.asarray(eval_cps, dtype=float), k))
        series = sums[idx] / norm
        star_series = star_sums[idx] / norm
        rel_changes.append(abs(series[-1] / series[-2] - 1.0))
        star_changes.append(abs(star_series[-1] / star_series[-2] - 1.0))
        y_inf = y[-1] / config.n_max ** (2 * k.gamma)
        if y_inf > 0:
            gaps.append(series[-1] / y_inf)
    med_change = float(np.median(rel_changes))
    med_star = float(np.median(star_changes))
    return [
        CheckResult(
            name=f"cesaro_stabilization_{i}_{j}", hard=False,
            passed=med_change <= tol.cesaro_rel_change_max,
            target=0.0, achieved=med_change, tolerance=tol.cesaro_rel_change_max,
            details={"trajectories": count, "checkpoints": eval_cps,
                     "median_ratio_to_y_inf_hat": float(np.median(gaps)) if gaps else math.nan}),
        CheckResult(
            name=f"cesaro_star_stabilization_{i}_{j}", hard=False,
            passed=med_star <= tol.cesaro_rel_change_max,
            target=0.0, achieved=med_star, tolerance=tol.cesaro_rel_change_max,
            details={"trajectories": count}),
    ]


def check_regimes(static_config: ExperimentConfig | None,
                  log_config: ExperimentConfig | None,
                  power_config: ExperimentConfig | None,
                  tol: Tolerances = TOLERANCES, workers: int = 1) -> Report:
    """Regime-discrimination proxies, one per sign of delta.

    static: mean increments across checkpoint doublings decay monotonically
    (and match the exact sums at c = 2); log: the difference quotient against
    log n matches the exact-recursion slope; power: the scaled statistic is
    stable across the last doubling and correlates with the plug-in limit.
    """
    report = Report(suite="regimes", metadata={})
    for label, config in (("static", static_config), ("log", log_config), ("power", power_config)):
        if config is None:
            continue
        k = config.constants
        expected_regime = {"static": REGIME_STATIC, "log": REGIME_LOG, "power": REGIME_POWER}[label]
        if k.regime != expected_regime:
            raise ParameterError(f"{label} config has delta={config.params.delta} ({k.regime})")
        report.metadata[label] = config.to_dict()
        summary = run(config, workers=workers)
        pair = config.pairs[0]
        i, j = pair
        counts = summary.counts[pair]
        cps = list(config.checkpoints)
        idx = {cp: t for t, cp in enumerate(cps)}

        if label == "static":
            doublings = [(a, b) for a, b in zip(cps, cps[1:]) if b == 2 * a]
            inc_means = []
            for a, b in doublings:
                growth = counts[:, idx[b]] - counts[:, idx[a]]
                inc_means.append(float(growth.mean()))
                if config.params.c == 2:
                    exact = expected_common_increment_sum(i, j, a, b, k)
                    report.add(_z_check(f"static_increment_{a}_{b}", growth, exact, tol,
                                        {"pair": list(pair)}))
            decreasing = all(x > y for x, y in zip(inc_means, inc_means[1:]))
            report.add(CheckResult(
                name="static_increments_decreasing", passed=decreasing, hard=False,
                target="strictly decreasing", achieved=[round(v, 6) for v in inc_means],
                tolerance="monotone across doublings",
                details={"doublings": doublings, "verdict": REGIME_STATIC if decreasing else "unclear"}))

        elif label == "log":
            n1, n2 = cps[0], cps[-1]
            dlog = math.log(n2) - math.log(n1)
            slopes = (counts[:, idx[n2]] - counts[:, idx[n1]]) / dlog
            exact_slope = expected_common_increment_sum(i, j, n1, n2, k) / dlog if config.params.c == 2 else None
            ec = expectation_constants(i, j, k)
            if exact_slope is not None:
                res = _z_check(f"log_slope_{n1}_{n2}", slopes, exact_slope, tol,
                               {"pair": list(pair), "asymptotic_coefficient": ec.limit_coeff_mean,
                                "verdict": REGIME_LOG})
                report.add(res)
            else:
                report.add(CheckResult(
                    name=f"log_slope_{n1}_{n2}", passed=True, hard=False,
                    target=None, achieved=float(slopes.mean()),
                    tolerance="informational (no exact recursion for c != 2)",
                    details={"asymptotic_coefficient": ec.limit_coeff_mean}))
            report.results.extend(_cesaro_diagnostics(config, pair, tol))

        else:
            scaled = counts / np.asarray(regime_normalizer(np.asarray(cps, dtype=float), k))
            means = scaled.mean(axis=0)
            ratio = float(means[-1] / means[-2])
            lo, hi = tol.regime_scaled_band
            report.add(CheckResult(
                name="power_scaled_last_doubling", passed=lo <= ratio <= hi, hard=False,
                target=1.0, achieved=ratio, tolerance=f"[{lo}, {hi}]",
                details={"checkpoints": cps, "scaled_means": [float(m) for m in means],
                         "verdict": REGIME_POWER if lo <= ratio <= hi else "unclear"}))
            coeff = expectation_constants(i, j, k).limit_coeff_mean
            y_inf = summary.y_inf_hat[pair]
            corr = float(np.corrcoef(scaled[:, -1],
                                     y_inf * (config.params.c * (config.params.c - 1)
                                              / (2 * config.params.c + config.params.delta) ** 2))[0, 1])
            report.add(CheckResult(
                name="power_scaled_correlates_with_limit", passed=corr >= tol.power_corr_min,
                hard=False, target=1.0, achieved=corr, tolerance=f">= {tol.power_corr_min}",
                details={"pair": list(pair), "limit_coeff_mean": coeff}))
            report.results.extend(_cesaro_diagnostics(config, pair, tol))
    return report


# --------------------------------------------------------------------------
# subsample estimator
# --------------------------------------------------------------------------

def check_estimator(config: ExperimentConfig, tol: Tolerances = TOLERANCES,
                    workers: int = 1, summary: ReplicationSummary | None = None) -> Report:
    """Concentration of N(n)/N_hat^k(n) conditioned on a positive estimate:
    the interquartile range must shrink as n doubles and the median must sit
    in the declared band at the largest n."""
    if not config.estimator_k:
        raise ParameterError("estimator check needs at least one k > 1")
    if summary is None:
        summary = run(config, workers=workers)
    report = Report(suite="estimator", metadata={"config": config.to_dict()})
    lo, hi = tol.estimator_median_band
    for pair in config.pairs:
        i, j = pair
        by_k: dict[float, list] = {}
        for rs in summary.ratio_stats[pair]:
            by_k.setdefault(rs.k, []).append(rs)
        for k_val, series in sorted(by_k.items()):
            series.sort(key=lambda rs: rs.n)
            iqrs = [rs.iqr for rs in series]
            ns = [rs.n for rs in series]
            shrinking = all(a > b for a, b in zip(iqrs, iqrs[1:]))
            report.add(CheckResult(
                name=f"estimator_iqr_shrinks_{i}_{j}_k{k_val:g}", passed=shrinking, hard=False,
                target="strictly decreasing IQR", achieved=[round(v, 6) for v in iqrs],
                tolerance="strict decrease across doublings",
                details={"pair": list(pair), "n": ns,
                         "conditioning_rates": [rs.conditioning_rate for rs in series],
                         "off_one_fraction": [
                             float(np.mean(np.abs(_ratios(summary, pair, rs) - 1.0) > 1e-12))
                             for rs in series]}))
            final = series[-1]
            report.add(CheckResult(
                name=f"estimator_median_{i}_{j}_k{k_val:g}_n{final.n}",
                passed=lo <= final.median <= hi, hard=False,
                target=1.0, achieved=final.median, tolerance=f"[{lo}, {hi}]",
                details={"pair": list(pair), "conditioning_rate": final.conditioning_rate,
                         "count": final.count}))
    return report


def _ratios(summary: ReplicationSummary, pair, rs) -> np.ndarray:
    cps = summary.config.checkpoints
    counts = summary.counts[pair]
    k = summary.config.constants
    n_hat = counts[:, cps.index(rs.snapshot_n)].astype(np.float64)
    if k.regime == REGIME_POWER:
        n_hat = n_hat * rs.k ** k.power_exponent
    mask = n_hat > 0
    return counts[mask, cps.index(rs.n)] / n_hat[mask]


# --------------------------------------------------------------------------
# default suite configs (the acceptance-scale experiments)
# --------------------------------------------------------------------------

def default_means_config(master_seed: int = DEFAULT_MASTER_SEED,
                         replicates: int = 5000) -> ExperimentConfig:
    return ExperimentConfig(
        params=_params(2, 0.0), pairs=((2, 3),), n_max=1000,
        checkpoints=(3, 10, 100, 1000), replicates=replicates, master_seed=master_seed)


def default_static_config(master_seed: int = DEFAULT_MASTER_SEED,
                          replicates: int = 4000) -> ExperimentConfig:
    return ExperimentConfig(
        params=_params(2, 1.5), pairs=((2, 3),), n_max=4000,
        checkpoints=(500, 1000, 2000, 4000), replicates=replicates, master_seed=master_seed)


def default_log_config(master_seed: int = DEFAULT_MASTER_SEED,
                       replicates: int = 5000) -> ExperimentConfig:
    return ExperimentConfig(
        params=_params(2, 0.0), pairs=((2, 3),), n_max=1000,
        checkpoints=(100, 250, 500, 1000), replicates=replicates, master_seed=master_seed)


def default_power_config(master_seed: int = DEFAULT_MASTER_SEED,
                         replicates: int = 2000) -> ExperimentConfig:
    return ExperimentConfig(
        params=_params(2, -1.5), pairs=((2, 3),), n_max=2000,
        checkpoints=(250, 500, 1000, 2000), replicates=replicates, master_seed=master_seed)


def default_estimator_config(master_seed: int = DEFAULT_MASTER_SEED,
                             replicates: int = 500) -> ExperimentConfig:
    # the tracked pair is an arbitrary default, recorded in report metadata
    return ExperimentConfig(
        params=_params(2, 1.5), pairs=((10, 20),), n_max=4000,
        checkpoints=(250, 500, 1000, 2000, 4000), replicates=replicates,
        master_seed=master_seed, estimator_k=(2.0, 4.0))


def _params(c, delta):
    from .graph import ModelParams
    return ModelParams(c, delta)


def run_suite(suite: str, master_seed: int = DEFAULT_MASTER_SEED,
              tol: Tolerances = TOLERANCES, workers: int = 1) -> Report:
    """Named verification suites behind the CLI; `all` concatenates them."""
    if suite == "identities":
        return check_identities(tol, seed=master_seed)
    if suite == "means":
        config = default_means_config(master_seed)
        summary = run(config, workers=workers)
        report = check_exact_means(config, tol, summary=summary)
        report.extend(check_common_friend_mean_c2(config, tol, summary=summary))
        report.suite = "means"
        return report
    if suite == "regimes":
        return check_regimes(default_static_config(master_seed),
                             default_log_config(master_seed),
                             default_power_config(master_seed), tol, workers=workers)
    if suite == "estimator":
        return check_estimator(default_estimator_config(master_seed), tol, workers=workers)
    if suite == "all":
        report = Report(suite="all", metadata={"master_seed": master_seed})
        for name in SUITES:
            sub = run_suite(name, master_seed, tol, workers)
            report.metadata[name] = sub.metadata
            report.extend(sub)
        return report
    raise ParameterError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
