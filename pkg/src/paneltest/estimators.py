"""Unbiased U-statistic estimators of squared MMD and HSIC, with variances.

Both statistics are unbiased and may be negative. The `_from_grams` variants
work on precomputed Gram matrices so permutation and search loops can reuse
kernel evaluations; the panel-level wrappers resolve bandwidths and build the
Gram matrices once.

Variance estimates use the delete-one jackknife over realisations: the
statistic is recomputed on every leave-one-out panel pair (dropping x_i and
y_i jointly) and the jackknife variance of those values estimates the
variance of the full-sample statistic. The recomputation is closed-form in
the Gram row sums, so the whole jackknife costs O(m^2).
"""

from __future__ import annotations

import numpy as np

from .errors import SampleSizeError
from .kernels import KernelConfig, cross_gram, gram
from .panels import SamplePanel, check_same_grid_length


def mmd2_u_from_grams(kxx: np.ndarray, kyy: np.ndarray, kxy: np.ndarray) -> float:
    """Unbiased squared-MMD estimate from within- and cross-sample Gram matrices.

    Within-sample means exclude the diagonal; the cross term is a plain mean:
    sum_{i != j} kxx_ij / (m(m-1)) + sum_{i != j} kyy_ij / (n(n-1))
    - 2 sum_{ij} kxy_ij / (mn).
    """
    m = kxx.shape[0]
    n = kyy.shape[0]
    if m < 2 or n < 2:
        raise SampleSizeError(f"mmd2_u needs at least 2 realisations per sample, got {m}, {n}")
    t_xx = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    t_yy = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    # summing sorted values makes the cross term independent of matrix
    # orientation, so swapping the samples gives the bitwise-same statistic
    t_xy = np.sort(kxy, axis=None).sum() / (m * n)
    return float(t_xx + t_yy - 2.0 * t_xy)


def mmd2_u(panel_x: SamplePanel, panel_y: SamplePanel, kernel: KernelConfig) -> float:
    """Unbiased squared-MMD estimate between two panels under a shared kernel.

    Median-rule kernels resolve their bandwidth on the two panels pooled.
    """
    check_same_grid_length(panel_x, panel_y)
    if panel_x.m < 2 or panel_y.m < 2:
        raise SampleSizeError(
            f"mmd2_u needs at least 2 realisations per sample, got {panel_x.m}, {panel_y.m}"
        )
    sigma = kernel.resolve(panel_x, panel_y)
    fixed = KernelConfig.fixed(sigma)
    kxx = gram(panel_x, fixed)
    kyy = gram(panel_y, fixed)
    kxy = cross_gram(panel_x, panel_y, fixed)
    return mmd2_u_from_grams(kxx, kyy, kxy)


def hsic_u_from_grams(k: np.ndarray, l: np.ndarray) -> float:
    """Unbiased HSIC estimate from the two within-sample Gram matrices.

    With Kt, Lt the Gram matrices with zeroed diagonals:
    [trace(Kt Lt) + (1'Kt1)(1'Lt1)/((m-1)(m-2)) - 2/(m-2) 1'Kt Lt 1] / (m(m-3)).
    """
    m = k.shape[0]
    if l.shape[0] != m:
        raise SampleSizeError(f"hsic_u needs equal realisation counts, got {m} and {l.shape[0]}")
    if m < 4:
        raise SampleSizeError(f"hsic_u needs at least 4 realisations, got {m}")
    kt = k.copy()
    lt = l.copy()
    np.fill_diagonal(kt, 0.0)
    np.fill_diagonal(lt, 0.0)
    t1 = float((kt * lt).sum())  # trace(Kt Lt), both symmetric
    rk = kt.sum(axis=1)
    rl = lt.sum(axis=1)
    t2 = rk.sum() * rl.sum() / ((m - 1) * (m - 2))
    t3 = float(rk @ rl)  # 1' Kt Lt 1
    return float((t1 + t2 - 2.0 * t3 / (m - 2)) / (m * (m - 3)))


def hsic_u(
    panel_x: SamplePanel,
    panel_y: SamplePanel,
    kernel_x: KernelConfig,
    kernel_y: KernelConfig,
) -> float:
    """Unbiased HSIC estimate between paired panels (equal row counts).

    The panels may have different numbers of time points; each side gets its
    own kernel, resolved on that side alone.
    """
    if panel_x.m != panel_y.m:
        raise SampleSizeError(
            f"hsic_u needs equal realisation counts, got {panel_x.m} and {panel_y.m}"
        )
    k = gram(panel_x, KernelConfig.fixed(kernel_x.resolve(panel_x)))
    l = gram(panel_y, KernelConfig.fixed(kernel_y.resolve(panel_y)))
    return hsic_u_from_grams(k, l)


def _jackknife_variance(leave_one_out: np.ndarray) -> float:
    """Jackknife variance from the vector of leave-one-out statistic values."""
    m = leave_one_out.shape[0]
    centred = leave_one_out - leave_one_out.mean()
    return float((m - 1) / m * np.dot(centred, centred))


def mmd_jackknife_from_grams(
    kxx: np.ndarray, kyy: np.ndarray, kxy: np.ndarray
) -> tuple[float, float]:
    """Statistic and jackknife variance of mmd2_u, sharing the Gram matrices.

    Requires m = n; realisation i is dropped jointly from both sides. The
    variance is floored at 0.
    """
    m = kxx.shape[0]
    n = kyy.shape[0]
    if m != n:
        raise SampleSizeError(f"variance estimate needs m = n, got m={m}, n={n}")
    if m < 4:
        raise SampleSizeError(f"variance estimate needs at least 4 realisations, got {m}")
    rx = kxx.sum(axis=1) - np.diag(kxx)  # off-diagonal row sums
    ry = kyy.sum(axis=1) - np.diag(kyy)
    s_xx = rx.sum()
    s_yy = ry.sum()
    s_xy = kxy.sum()
    row_xy = kxy.sum(axis=1)
    col_xy = kxy.sum(axis=0)
    # leave-one-out totals after removing row/column a from every block
    s_xx_wo = s_xx - 2.0 * rx
    s_yy_wo = s_yy - 2.0 * ry
    s_xy_wo = s_xy - row_xy - col_xy + np.diag(kxy)
    mm = (m - 1) * (m - 2)
    loo = s_xx_wo / mm + s_yy_wo / mm - 2.0 * s_xy_wo / ((m - 1) * (m - 1))
    stat = float(s_xx / (m * (m - 1)) + s_yy / (n * (n - 1)) - 2.0 * s_xy / (m * n))
    return stat, max(_jackknife_variance(loo), 0.0)


def hsic_jackknife_from_grams(k: np.ndarray, l: np.ndarray) -> tuple[float, float]:
    """Statistic and jackknife variance of hsic_u from the Gram matrices.

    The leave-one-out statistic needs at least 4 rows, so the jackknife
    requires m >= 5.
    """
    m = k.shape[0]
    if l.shape[0] != m:
        raise SampleSizeError(f"variance estimate needs m = n, got {m} and {l.shape[0]}")
    if m < 5:
        raise SampleSizeError(
            f"hsic jackknife needs at least 5 realisations (leave-one-out keeps >= 4), got {m}"
        )
    kt = k.copy()
    lt = l.copy()
    np.fill_diagonal(kt, 0.0)
    np.fill_diagonal(lt, 0.0)
    rk = kt.sum(axis=1)
    rl = lt.sum(axis=1)
    sk = rk.sum()
    sl = rl.sum()
    c = (kt * lt).sum(axis=1)
    t1 = c.sum()
    t3 = float(rk @ rl)
    # leave-one-out pieces, all O(m^2) once
    t1_wo = t1 - 2.0 * c
    sk_wo = sk - 2.0 * rk
    sl_wo = sl - 2.0 * rl
    t3_wo = t3 - (lt @ rk) - (kt @ rl) + c - rk * rl
    mo = m - 1
    loo = (t1_wo + sk_wo * sl_wo / ((mo - 1) * (mo - 2)) - 2.0 * t3_wo / (mo - 2)) / (
        mo * (mo - 3)
    )
    stat = float((t1 + sk * sl / ((m - 1) * (m - 2)) - 2.0 * t3 / (m - 2)) / (m * (m - 3)))
    return stat, max(_jackknife_variance(loo), 0.0)


def mmd_variance(panel_x: SamplePanel, panel_y: SamplePanel, kernel: KernelConfig) -> float:
    """Delete-one jackknife estimate of Var[mmd2_u]; nonnegative."""
    check_same_grid_length(panel_x, panel_y)
    sigma = kernel.resolve(panel_x, panel_y)
    fixed = KernelConfig.fixed(sigma)
    kxx = gram(panel_x, fixed)
    kyy = gram(panel_y, fixed)
    kxy = cross_gram(panel_x, panel_y, fixed)
    return mmd_jackknife_from_grams(kxx, kyy, kxy)[1]


def hsic_variance(
    panel_x: SamplePanel,
    panel_y: SamplePanel,
    kernel_x: KernelConfig,
    kernel_y: KernelConfig,
) -> float:
    """Delete-one jackknife estimate of Var[hsic_u]; nonnegative."""
    if panel_x.m != panel_y.m:
        raise SampleSizeError(
            f"variance estimate needs m = n, got {panel_x.m} and {panel_y.m}"
        )
    k = gram(panel_x, KernelConfig.fixed(kernel_x.resolve(panel_x)))
    l = gram(panel_y, KernelConfig.fixed(kernel_y.resolve(panel_y)))
    return hsic_jackknife_from_grams(k, l)[1]
