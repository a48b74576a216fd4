"""Closed-form quantities of the model: exponents, Gamma-ratio expectations,
exact one-step conditional expectations, and the increment-probability bounds.

Everything Gamma-valued is evaluated in log space (no raw Gamma call above
argument 30), so arguments up to 1e9 stay far from overflow.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.special import gammaln

from .graph import ModelParams, ParameterError

REGIME_STATIC = "static"
REGIME_LOG = "logarithmic"
REGIME_POWER = "power"

# Above this both Gamma arguments are handled by the Stirling tail directly;
# below, the ratio is shifted up through the recurrence first.
_STIRLING_MIN = 32.0


class NodeOneCaveat(UserWarning):
    """Formulas seeded with E[X_i(i)] = c + delta assume i >= 2; node 1 starts
    with 2c self-loop stubs, so i = 1 values are computed as written but flagged."""


@dataclass(frozen=True)
class RegimeConstants:
    """Growth exponents for given (c, delta) and the regime tag from sign(delta)."""

    c: int
    delta: float
    gamma: float
    gamma1: float
    gamma2: float
    regime: str

    @property
    def power_exponent(self) -> float:
        """Exponent 2*gamma - 1 of the power regime normalizer."""
        return 2 * self.gamma - 1


@dataclass(frozen=True)
class ExpectationConstants:
    """Gamma-ratio expectation constants for a fixed pair (i, j)."""

    i: int
    j: int
    e_d_inf_i: float
    e_d_inf_j: float
    c_ij: float
    limit_coeff_mean: float
    node_one_caveat: bool


def regime_constants(c: int, delta: float) -> RegimeConstants:
    """gamma = c/(2c+delta) and its (1 -+ 1/sqrt(c)) multiples."""
    params = ModelParams(c, delta)  # domain check
    c, delta = params.c, params.delta
    gamma = c / (2 * c + delta)
    root = 1.0 / math.sqrt(c)
    if delta > 0:
        regime = REGIME_STATIC
    elif delta == 0:
        regime = REGIME_LOG
    else:
        regime = REGIME_POWER
    return RegimeConstants(c=c, delta=delta, gamma=gamma,
                           gamma1=(1 - root) * gamma, gamma2=(1 + root) * gamma,
                           regime=regime)


def _lgamma_tail(z: float) -> float:
    # Stirling correction g(z): lnGamma(z) = (z-1/2)ln z - z + ln(2 pi)/2 + g(z).
    z2 = 1.0 / (z * z)
    return (1.0 / 12.0 - z2 * (1.0 / 360.0 - z2 * (1.0 / 1260.0 - z2 / 1680.0))) / z


def gamma_ratio(n: float, a: float) -> float:
    """Gamma(n+a)/Gamma(n) for n > 0, n + a > 0.

    For small arguments the ratio is shifted up through Gamma(z+1) = z Gamma(z)
    until both sit in Stirling range; the log difference is then rearranged as
    (n - 1/2) log1p(a/n) + a log(n+a) - a so no large terms cancel. Relative
    error stays ~1e-13 for n up to 1e9 with |a| of a few units.
    """
    n = float(n)
    a = float(a)
    if not (n > 0 and n + a > 0) or not (math.isfinite(n) and math.isfinite(a)):
        raise ParameterError(f"gamma_ratio requires n > 0 and n + a > 0, got n={n}, a={a}")
    if a == 0.0:
        return 1.0
    if abs(a) > 64.0:
        # Outside the model's exponent range; plain log-gamma difference.
        return math.exp(gammaln(n + a) - gammaln(n))
    log_shift = 0.0
    while n < _STIRLING_MIN or n + a < _STIRLING_MIN:
        log_shift += math.log(n) - math.log(n + a)
        n += 1.0
    lnr = (n - 0.5) * math.log1p(a / n) + a * math.log(n + a) - a \
        + _lgamma_tail(n + a) - _lgamma_tail(n)
    return math.exp(lnr + log_shift)


def expected_degree_limit(i: int, constants: RegimeConstants) -> float:
    """E[D_i(infinity)] = (c + delta) Gamma(i) / Gamma(i + gamma)."""
    _check_node_index(i)
    return (constants.c + constants.delta) / gamma_ratio(i, constants.gamma)


def exact_expected_x(i: int, n: int, constants: RegimeConstants) -> float:
    """E[X_i(n)] = (c+delta) (Gamma(i)/Gamma(i+gamma)) (Gamma(n+gamma)/Gamma(n)), n >= i."""
    _check_node_index(i)
    if n < i:
        raise ParameterError(f"need n >= i, got n={n}, i={i}")
    return (constants.c + constants.delta) * gamma_ratio(n, constants.gamma) / gamma_ratio(i, constants.gamma)


def expectation_constants(i: int, j: int, constants: RegimeConstants) -> ExpectationConstants:
    """All Gamma-ratio constants for pair (i, j), computed in log space."""
    _check_pair(i, j)
    c, delta = constants.c, constants.delta
    g, g1, g2 = constants.gamma, constants.gamma1, constants.gamma2
    caveat = i == 1
    if caveat:
        warnings.warn(f"i={i}: expectation formulas assume i >= 2", NodeOneCaveat, stacklevel=2)
    c_ij = (c + delta) ** 2 * gamma_ratio(j, g) / (gamma_ratio(i, g) * gamma_ratio(j, g1) * gamma_ratio(j, g2))
    coeff = c * (c - 1) / (2 * c + delta) ** 2 * c_ij
    return ExpectationConstants(
        i=i, j=j,
        e_d_inf_i=(c + delta) / gamma_ratio(i, g),
        e_d_inf_j=(c + delta) / gamma_ratio(j, g),
        c_ij=c_ij, limit_coeff_mean=coeff, node_one_caveat=caveat)


def exact_expected_y(i: int, j: int, n: int, constants: RegimeConstants) -> float:
    """E[Y_ij(n)] = C_ij Gamma(n+gamma1) Gamma(n+gamma2) / Gamma(n)^2 for n >= j > i."""
    _check_pair(i, j)
    if n < j:
        raise ParameterError(f"need n >= j, got n={n}, j={j}")
    ec = expectation_constants(i, j, constants)
    return ec.c_ij * gamma_ratio(n, constants.gamma1) * gamma_ratio(n, constants.gamma2)


def limit_coefficient_mean(i: int, j: int, constants: RegimeConstants) -> float:
    """Mean of the regime limit: c(c-1)/(2c+delta)^2 * C_ij. Zero when c = 1."""
    ec = expectation_constants(i, j, constants)
    return ec.limit_coeff_mean


def increment_probability(p_i: float, p_j: float, c: int) -> float:
    """Exact conditional probability that one arrival befriends both i and j.

    Inclusion-exclusion over the c independent stubs:
    1 - (1-p_i)^c - (1-p_j)^c + (1-p_i-p_j)^c.
    """
    _check_probs(p_i, p_j, c)
    return 1.0 - (1.0 - p_i) ** c - (1.0 - p_j) ** c + (1.0 - p_i - p_j) ** c


def increment_bounds(p_i: float, p_j: float, c: int,
                     x_i: float | None = None, x_j: float | None = None,
                     n: int | None = None, delta: float | None = None) -> tuple[float, float]:
    """Sandwich (L, R) around increment_probability; equality at c = 2.

    R = c(c-1) p_i p_j and L = R [1 - (c-2)(p_i + p_j)/2]. When the shifted
    degrees are supplied, consistency with p = x / ((2c+delta) n) is enforced.
    """
    _check_probs(p_i, p_j, c)
    if x_i is not None or x_j is not None or n is not None or delta is not None:
        if None in (x_i, x_j, n, delta):
            raise ParameterError("supply all of x_i, x_j, n, delta or none")
        rate = (2 * c + delta) * n
        for p, x, name in ((p_i, x_i, "p_i"), (p_j, x_j, "p_j")):
            if abs(p - x / rate) > 1e-12 * max(1.0, abs(p)):
                raise ParameterError(f"{name} inconsistent with x/((2c+delta)n)")
    right = c * (c - 1) * p_i * p_j
    left = right * (1.0 - 0.5 * (c - 2) * (p_i + p_j))
    return left, right


def conditional_product_expectation(x_i: float, x_j: float, n: int, c: int, delta: float) -> float:
    """E[Y_ij(n+1) | state] = x_i x_j (n + gamma1)(n + gamma2) / n^2."""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    k = regime_constants(c, delta)
    return x_i * x_j * (n + k.gamma1) * (n + k.gamma2) / (n * n)


def conditional_product_enumeration(x_i: float, x_j: float, n: int, c: int, delta: float) -> float:
    """Brute-force route to the same expectation: sum (x_i+k)(x_j+l) over the
    trinomial law of stub counts (k, l) landing on i and j."""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    ModelParams(c, delta)
    rate = (2 * c + delta) * n
    p_i, p_j = x_i / rate, x_j / rate
    p_rest = 1.0 - p_i - p_j
    total = 0.0
    for k in range(c + 1):
        for l in range(c + 1 - k):
            m = c - k - l
            pmf = math.comb(c, k) * math.comb(c - k, l) * p_i ** k * p_j ** l * p_rest ** m
            total += (x_i + k) * (x_j + l) * pmf
    return total


def martingale_statistic(y_ij: float, n: int, c_ij: float, constants: RegimeConstants) -> float:
    """W_ij(n) = Y_ij(n)/C_ij * Gamma(n)^2 / (Gamma(n+gamma1) Gamma(n+gamma2)).

    Unit-mean with constant one-step conditional expectation.
    """
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    return y_ij / (c_ij * gamma_ratio(n, constants.gamma1) * gamma_ratio(n, constants.gamma2))


def expected_common_increment_sum(i: int, j: int, n0: int, n1: int,
                                  constants: RegimeConstants) -> float:
    """Sum over k in [n0, n1) of c(c-1) E[Y_ij(k)] / ((2c+delta)^2 k^2).

    Exactly E[N_ij(n1)] - E[N_ij(n0)] when c = 2 (the bound holds with
    equality there); an upper bound on it for c >= 3. E[Y] advances through
    its own one-step recursion, so the sum needs a single Gamma evaluation.
    """
    _check_pair(i, j)
    if not j <= n0 <= n1:
        raise ParameterError(f"need j <= n0 <= n1, got j={j}, n0={n0}, n1={n1}")
    c, delta = constants.c, constants.delta
    g1, g2 = constants.gamma1, constants.gamma2
    coeff = c * (c - 1) / (2 * c + delta) ** 2
    ey = exact_expected_y(i, j, n0, constants)
    total = 0.0
    for k in range(n0, n1):
        total += coeff * ey / (k * k)
        ey *= (k + g1) * (k + g2) / (k * k)
    return total


def _check_node_index(i: int) -> None:
    if i < 1:
        raise ParameterError(f"node index must be >= 1, got {i}")
    if i == 1:
        warnings.warn("i=1: expectation formulas assume i >= 2", NodeOneCaveat, stacklevel=3)


def _check_pair(i: int, j: int) -> None:
    if i < 1 or j <= i:
        raise ParameterError(f"need 1 <= i < j, got i={i}, j={j}")


def _check_probs(p_i: float, p_j: float, c: int) -> None:
    if c < 1:
        raise ParameterError(f"c must be >= 1, got {c}")
    if p_i < 0 or p_j < 0 or p_i + p_j > 1.0:
        raise ParameterError(f"need p_i, p_j >= 0 and p_i + p_j <= 1, got {p_i}, {p_j}")
