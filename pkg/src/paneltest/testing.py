"""Permutation-calibrated two-sample and independence tests.

The two-sample test pools all realisations and redraws random partitions of
the pool with the original sizes; the independence test permutes the rows of
Y while X stays fixed. In both cases the pooled/within Gram matrices are
computed once and the permuted statistics are obtained purely by index
reordering. A moment-matched Gamma fit to a pilot permutation run is
available as a cheaper, approximate alternative to the full null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateNullError, ParameterError, SampleSizeError
from .estimators import hsic_u_from_grams
from .kernels import KernelConfig, gram_from_sq_dists, pairwise_sq_dists
from .panels import SamplePanel, check_same_grid_length

NULL_METHODS = ("permutation", "gamma")

# memory cap for vectorised permutation blocks (floats held at once)
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class TestConfig:
    """Calibration settings shared by all tests.

    ``permutations`` is the size of the permutation null; the Gamma method
    instead runs a short pilot of ``gamma_pilot`` permutations to estimate
    the null moments.
    """

    __test__ = False  # not a pytest class, despite the name

    alpha: float = 0.05
    permutations: int = 500
    seed: int = 0
    null_method: str = "permutation"
    gamma_pilot: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.null_method not in NULL_METHODS:
            raise ParameterError(f"unknown null method: {self.null_method!r}")
        if self.null_method == "permutation" and self.permutations < 100:
            raise ParameterError(
                f"need at least 100 permutations for a usable threshold, got {self.permutations}"
            )
        if self.null_method == "gamma" and self.gamma_pilot < 2:
            raise ParameterError("gamma pilot needs at least 2 permutations")


@dataclass
class TestResult:
    """Outcome of one calibrated test."""

    __test__ = False  # not a pytest class, despite the name

    statistic: float
    threshold: float
    p_value: float
    reject: bool
    config: TestConfig
    null_samples: np.ndarray | None = None
    approximate: bool = False
    bandwidth: float | tuple[float, float] | None = field(default=None)

    def to_dict(self) -> dict:
        """JSON-ready representation (null samples included when present)."""
        bw = self.bandwidth
        if isinstance(bw, tuple):
            bw = list(bw)
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "approximate": self.approximate,
            "bandwidth": bw,
            "alpha": self.config.alpha,
            "permutations": self.config.permutations,
            "seed": self.config.seed,
            "null_method": self.config.null_method,
            "null_samples": None if self.null_samples is None else list(self.null_samples),
        }


def permutation_threshold(null_values: np.ndarray, alpha: float) -> float:
    """Upper (1 - alpha) quantile of the null: ascending position ceil((1-alpha)P).

    1-indexed with a ceiling, so alpha = 0.05 and P = 5000 picks position
    4750 counted from the smallest value; the ceiling errs on the large
    (conservative) side.
    """
    p = len(null_values)
    ascending = np.sort(null_values)
    pos = math.ceil((1.0 - alpha) * p)
    pos = min(max(pos, 1), p)
    return float(ascending[pos - 1])


def permutation_p_value(null_values: np.ndarray, observed: float) -> float:
    """Add-one permutation p-value; ties with the observed value count as exceedances."""
    p = len(null_values)
    return float((1 + int(np.sum(null_values >= observed))) / (p + 1))


def random_permutations(rng: np.random.Generator, count: int, size: int) -> np.ndarray:
    """(count, size) array of independent uniformly random permutations."""
    return np.argsort(rng.random((count, size)), axis=1)


def _mmd_from_pooled(pooled: np.ndarray, members: np.ndarray, m: int, n: int) -> np.ndarray:
    """mmd2_u for each 0/1 membership row, reading all terms from the pooled Gram.

    ``members`` is (P, m+n) with exactly m ones per row marking the X side.
    Only the Gaussian unit diagonal is assumed (diag = 1).
    """
    row_sums = pooled.sum(axis=1)
    total = row_sums.sum()
    q = np.einsum("pn,pn->p", members @ pooled, members)  # sum over the X block
    br = members @ row_sums  # sum over X rows against everything
    s_xx = q - m
    s_xy = br - q
    s_yy = total - 2.0 * br + q - n
    return s_xx / (m * (m - 1)) + s_yy / (n * (n - 1)) - 2.0 * s_xy / (m * n)


def _mmd_null(
    pooled: np.ndarray, m: int, n: int, perms: np.ndarray
) -> np.ndarray:
    """Null statistics for partitions whose X side is the first m entries of each perm."""
    big = pooled.shape[0]
    out = np.empty(perms.shape[0])
    chunk = max(1, _CHUNK_BUDGET // big)
    for start in range(0, perms.shape[0], chunk):
        block = perms[start : start + chunk]
        members = np.zeros((block.shape[0], big))
        np.put_along_axis(members, block[:, :m], 1.0, axis=1)
        out[start : start + block.shape[0]] = _mmd_from_pooled(pooled, members, m, n)
    return out


def mmd_two_sample_test(
    panel_x: SamplePanel,
    panel_y: SamplePanel,
    kernel: KernelConfig,
    config: TestConfig,
) -> TestResult:
    """Two-sample test of distribution equality via the unbiased squared MMD.

    Pools the m + n realisations, computes their Gram matrix once, and draws
    ``config.permutations`` random partitions of the pool into sizes (m, n) by
    index reordering. Rejects when the observed statistic exceeds the upper
    (1 - alpha) quantile of the permuted statistics.
    """
    check_same_grid_length(panel_x, panel_y)
    m, n = panel_x.m, panel_y.m
    if m < 2 or n < 2:
        raise SampleSizeError(f"two-sample test needs at least 2 rows per side, got {m}, {n}")
    sigma = kernel.resolve(panel_x, panel_y)
    rows = np.vstack([panel_x.values, panel_y.values])
    pooled = gram_from_sq_dists(pairwise_sq_dists(rows), sigma)

    identity = np.zeros((1, m + n))
    identity[0, :m] = 1.0
    observed = float(_mmd_from_pooled(pooled, identity, m, n)[0])

    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    if config.null_method == "gamma":
        pilot = random_permutations(rng, config.gamma_pilot, m + n)
        null = _mmd_null(pooled, m, n, pilot)
        return _gamma_result(observed, null, config, sigma)

    perms = random_permutations(rng, config.permutations, m + n)
    null = _mmd_null(pooled, m, n, perms)
    return _permutation_result(observed, null, config, sigma)


def _hsic_null(
    kt: np.ndarray, lt: np.ndarray, perms: np.ndarray
) -> np.ndarray:
    """Null statistics for row permutations of Y, from zero-diagonal Gram matrices."""
    m = kt.shape[0]
    rk = kt.sum(axis=1)
    rl = lt.sum(axis=1)
    t2 = rk.sum() * rl.sum() / ((m - 1) * (m - 2))
    out = np.empty(perms.shape[0])
    chunk = max(1, _CHUNK_BUDGET // (m * m))
    for start in range(0, perms.shape[0], chunk):
        block = perms[start : start + chunk]
        l_perm = lt[block[:, :, None], block[:, None, :]]
        t1 = np.einsum("ij,pij->p", kt, l_perm)
        t3 = rl[block] @ rk
        out[start : start + block.shape[0]] = (t1 + t2 - 2.0 * t3 / (m - 2)) / (
            m * (m - 3)
        )
    return out


def hsic_independence_test(
    panel_x: SamplePanel,
    panel_y: SamplePanel,
    kernel_x: KernelConfig,
    kernel_y: KernelConfig,
    config: TestConfig,
) -> TestResult:
    """Independence test via unbiased HSIC, permuting Y rows while X stays fixed.

    The Gram matrix of Y is reindexed per permutation rather than recomputed.
    """
    m = panel_x.m
    if panel_y.m != m:
        raise SampleSizeError(
            f"independence test needs equal realisation counts, got {m} and {panel_y.m}"
        )
    if m < 4:
        raise SampleSizeError(f"independence test needs at least 4 realisations, got {m}")
    sigma_x = kernel_x.resolve(panel_x)
    sigma_y = kernel_y.resolve(panel_y)
    kt = gram_from_sq_dists(pairwise_sq_dists(panel_x.values), sigma_x)
    lt = gram_from_sq_dists(pairwise_sq_dists(panel_y.values), sigma_y)
    observed = hsic_u_from_grams(kt, lt)
    np.fill_diagonal(kt, 0.0)
    np.fill_diagonal(lt, 0.0)

    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    if config.null_method == "gamma":
        pilot = random_permutations(rng, config.gamma_pilot, m)
        null = _hsic_null(kt, lt, pilot)
        return _gamma_result(observed, null, config, (sigma_x, sigma_y))

    perms = random_permutations(rng, config.permutations, m)
    null = _hsic_null(kt, lt, perms)
    return _permutation_result(observed, null, config, (sigma_x, sigma_y))


def _permutation_result(observed, null, config, bandwidth) -> TestResult:
    threshold = permutation_threshold(null, config.alpha)
    p_value = permutation_p_value(null, observed)
    return TestResult(
        statistic=observed,
        threshold=threshold,
        p_value=p_value,
        reject=bool(observed > threshold),
        config=config,
        null_samples=null,
        bandwidth=bandwidth,
    )


def gamma_params(mean: float, variance: float) -> tuple[float, float]:
    """Moment-matched Gamma (shape, scale); needs strictly positive moments."""
    if not np.isfinite(variance) or variance <= 0:
        raise DegenerateNullError(f"null variance must be positive, got {variance}")
    if not np.isfinite(mean) or mean <= 0:
        raise DegenerateNullError(
            f"null mean must be positive for the Gamma fit, got {mean}; "
            "use the permutation method instead"
        )
    return mean * mean / variance, variance / mean


def gamma_null_approx(null_moments: tuple[float, float], alpha: float) -> float:
    """(1 - alpha) quantile of the moment-matched Gamma null approximation."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    shape, scale = gamma_params(*null_moments)
    return float(stats.gamma.ppf(1.0 - alpha, a=shape, scale=scale))


def _gamma_result(observed, pilot_null, config, bandwidth) -> TestResult:
    mean = float(pilot_null.mean())
    variance = float(pilot_null.var(ddof=1))
    threshold = gamma_null_approx((mean, variance), config.alpha)
    shape, scale = gamma_params(mean, variance)
    p_value = float(stats.gamma.sf(observed, a=shape, scale=scale))
    return TestResult(
        statistic=observed,
        threshold=threshold,
        p_value=p_value,
        reject=bool(observed > threshold),
        config=config,
        null_samples=pilot_null,
        approximate=True,
        bandwidth=bandwidth,
    )
