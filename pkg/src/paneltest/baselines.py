"""Comparison statistics for the linear-dependence experiment.

SubCorr averages the Pearson correlation between each time point of X and the
single-measurement Y; SubHSIC averages per-time-point unbiased HSIC values.
Both are calibrated by permuting Y rows, like the main independence test.
SubCorr is signed, so its test uses the absolute value as the permuted
statistic (independence testing is two-sided).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InputError, SampleSizeError
from .estimators import hsic_u_from_grams
from .kernels import KernelConfig, gram_from_sq_dists, pairwise_sq_dists
from .panels import SamplePanel
from .testing import (
    TestConfig,
    TestResult,
    permutation_p_value,
    permutation_threshold,
    random_permutations,
)


def _check_pairing(panel_x: SamplePanel, panel_y: SamplePanel) -> None:
    if panel_x.m != panel_y.m:
        raise SampleSizeError(
            f"paired panels needed, got {panel_x.m} and {panel_y.m} rows"
        )
    if panel_y.n_times != 1:
        raise DimensionError(
            f"the second panel must hold a single measurement per realisation, "
            f"got {panel_y.n_times}"
        )


def _standardise_columns(values: np.ndarray) -> np.ndarray:
    """Centre each column and scale it to unit Euclidean norm."""
    centred = values - values.mean(axis=0, keepdims=True)
    norms = np.linalg.norm(centred, axis=0)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise InputError(f"column {bad} has zero variance; correlation undefined")
    return centred / norms


def sub_corr(panel_x: SamplePanel, panel_y: SamplePanel) -> float:
    """Mean over time points of Corr(X[:, t], Y); lies in [-1, 1]."""
    _check_pairing(panel_x, panel_y)
    zx = _standardise_columns(panel_x.values)
    zy = _standardise_columns(panel_y.values)[:, 0]
    return float((zx.T @ zy).mean())


def _column_grams(
    panel: SamplePanel, kernel: KernelConfig | None
) -> list[np.ndarray]:
    """One Gram matrix per time-point column, median bandwidth per column unless fixed."""
    grams = []
    for t in range(panel.n_times):
        column = SamplePanel(panel.values[:, t : t + 1], panel.grid[t : t + 1])
        config = kernel if kernel is not None else KernelConfig.median_per_sample()
        sigma = config.resolve(column)
        grams.append(gram_from_sq_dists(pairwise_sq_dists(column.values), sigma))
    return grams


def sub_hsic(
    panel_x: SamplePanel,
    panel_y: SamplePanel,
    kernel_x: KernelConfig | None = None,
    kernel_y: KernelConfig | None = None,
) -> float:
    """Mean over time points of the unbiased HSIC between X[:, t] and Y."""
    _check_pairing(panel_x, panel_y)
    if panel_x.m < 4:
        raise SampleSizeError(f"sub_hsic needs at least 4 realisations, got {panel_x.m}")
    grams_x = _column_grams(panel_x, kernel_x)
    gram_y = _column_grams(panel_y, kernel_y)[0]
    return float(np.mean([hsic_u_from_grams(k, gram_y) for k in grams_x]))


def baseline_test(
    statistic: str,
    panel_x: SamplePanel,
    panel_y: SamplePanel,
    config: TestConfig,
    kernel_x: KernelConfig | None = None,
    kernel_y: KernelConfig | None = None,
) -> TestResult:
    """Permutation test with SubCorr (as |SubCorr|) or SubHSIC as the statistic.

    Y rows are permuted while X stays fixed; thresholds and p-values follow
    the same rules as the kernel tests.
    """
    if statistic not in ("subcorr", "subhsic"):
        raise InputError(f"statistic must be 'subcorr' or 'subhsic', got {statistic!r}")
    _check_pairing(panel_x, panel_y)
    m = panel_x.m
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    perms = random_permutations(rng, config.permutations, m)

    if statistic == "subcorr":
        zx = _standardise_columns(panel_x.values)
        zy = _standardise_columns(panel_y.values)[:, 0]
        observed = abs(float((zx.T @ zy).mean()))
        null = np.abs((zy[perms] @ zx).mean(axis=1))
    else:
        grams_x = _column_grams(panel_x, kernel_x)
        gram_y = _column_grams(panel_y, kernel_y)[0]
        observed = float(np.mean([hsic_u_from_grams(k, gram_y) for k in grams_x]))
        null = _sub_hsic_null(grams_x, gram_y, perms)

    threshold = permutation_threshold(null, config.alpha)
    return TestResult(
        statistic=observed,
        threshold=threshold,
        p_value=permutation_p_value(null, observed),
        reject=bool(observed > threshold),
        config=config,
        null_samples=null,
    )


def _sub_hsic_null(
    grams_x: list[np.ndarray], gram_y: np.ndarray, perms: np.ndarray
) -> np.ndarray:
    """SubHSIC under Y-row permutations, reusing all per-column Gram matrices."""
    m = gram_y.shape[0]
    kt_stack = np.stack(grams_x)
    for kt in kt_stack:
        np.fill_diagonal(kt, 0.0)
    lt = gram_y.copy()
    np.fill_diagonal(lt, 0.0)
    rk = kt_stack.sum(axis=2)  # (T, m) row sums per column-gram
    rl = lt.sum(axis=1)
    sk = rk.sum(axis=1)
    t2 = sk * rl.sum() / ((m - 1) * (m - 2))
    out = np.empty(perms.shape[0])
    for p, perm in enumerate(perms):
        l_perm = lt[np.ix_(perm, perm)]
        t1 = np.einsum("tij,ij->t", kt_stack, l_perm)
        t3 = rk @ rl[perm]
        out[p] = np.mean((t1 + t2 - 2.0 * t3 / (m - 2)) / (m * (m - 3)))
    return out
