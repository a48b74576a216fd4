"""Versioned tolerances for the verification harness.

Statistical tolerances default to 3 standard errors (two sided). The
asymptotic-regime and histogram-signature thresholds are empirical
calibration decisions, not derived quantities; recalibrating them means
editing this file and bumping TOLERANCE_VERSION so the change is explicit.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

TOLERANCE_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    # statistical checks (MC mean vs exact expectation)
    z_max: float = 3.0
    # hard identity checks
    identity_rel: float = 1e-10
    enumeration_rel: float = 1e-12
    gamma_identity_rel: float = 1e-10
    telescoping_rel: float = 1e-12
    sandwich_slack: float = 1e-12
    # regime proxies
    regime_scaled_band: tuple[float, float] = (0.8, 1.25)
    regime_last_doubling_rel: float = 0.20
    power_corr_min: float = 0.8
    cesaro_rel_change_max: float = 0.10
    # subsample-estimator concentration
    estimator_median_band: tuple[float, float] = (0.9, 1.1)
    # heavy-tail signature of the power-regime count histogram. Pilot
    # calibration (c=2, delta=-1.5, pair (10,20), n=500, R=2500) put sample
    # skewness in 0.55..1.09 across seeds, so the gate sits below that range;
    # max/median stayed >= 4 throughout.
    heavy_tail_skewness_min: float = 0.4
    heavy_tail_max_over_median_min: float = 3.0

    def as_dict(self) -> dict:
        return asdict(self)


TOLERANCES = Tolerances()
