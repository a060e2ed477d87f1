"""Gaussian kernel evaluation, Gram matrices, and bandwidth heuristics.

The kernel is k(x, y) = exp(-||x - y||^2 / sigma^2); the bandwidth enters
squared in the denominator with no extra factor of 2. Bandwidths come either
fixed or from the median of pairwise Euclidean distances between realisations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateBandwidthError, DimensionError, InputError, ParameterError
from .panels import SamplePanel

#: bandwidth-selection rules understood by :class:`KernelConfig`
RULES = ("fixed", "median_aggregated", "median_per_sample")


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel with a fixed bandwidth or a data-driven selection rule.

    ``rule`` is one of ``fixed`` (use ``bandwidth`` as given),
    ``median_aggregated`` (median pairwise distance over all panels passed to
    :meth:`resolve`, pooled) or ``median_per_sample`` (median within the single
    panel the kernel applies to).
    """

    bandwidth: float | None = None
    rule: str = "fixed"
    family: str = "gaussian"

    def __post_init__(self) -> None:
        if self.family != "gaussian":
            raise ParameterError(f"unsupported kernel family: {self.family!r}")
        if self.rule not in RULES:
            raise ParameterError(f"unknown bandwidth rule: {self.rule!r}")
        if self.rule == "fixed":
            if self.bandwidth is None:
                raise ParameterError("fixed-bandwidth kernel needs a bandwidth")
            if not np.isfinite(self.bandwidth) or self.bandwidth <= 0:
                raise ParameterError(f"bandwidth must be positive, got {self.bandwidth}")

    @classmethod
    def fixed(cls, sigma: float) -> "KernelConfig":
        return cls(bandwidth=float(sigma), rule="fixed")

    @classmethod
    def median_aggregated(cls) -> "KernelConfig":
        return cls(rule="median_aggregated")

    @classmethod
    def median_per_sample(cls) -> "KernelConfig":
        return cls(rule="median_per_sample")

    def resolve(self, *panels: SamplePanel) -> float:
        """Return the bandwidth this config selects for the given panels."""
        if self.rule == "fixed":
            return float(self.bandwidth)  # type: ignore[arg-type]
        if not panels:
            raise ParameterError(f"rule {self.rule!r} needs at least one panel to resolve")
        if self.rule == "median_per_sample":
            panels = panels[:1]
        sigma = median_heuristic(*panels)
        if not np.isfinite(sigma) or sigma <= 0:
            raise DegenerateBandwidthError(f"resolved bandwidth {sigma} is not usable")
        return sigma


def gaussian_kernel(x, y, sigma: float) -> float:
    """Evaluate exp(-||x - y||^2 / sigma^2) for two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if not np.isfinite(sigma) or sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    d = x - y
    return float(np.exp(-np.dot(d, d) / sigma**2))


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Squared Euclidean distances between rows of ``a`` and rows of ``b``.

    Uses the ||x||^2 + ||y||^2 - 2<x,y> expansion; tiny negatives from
    cancellation are clamped to 0. With ``b`` omitted the result is the
    within-sample matrix with an exactly zero diagonal.
    """
    a = np.asarray(a, dtype=np.float64)
    symmetric = b is None
    b = a if b is None else np.asarray(b, dtype=np.float64)
    aa = np.einsum("ij,ij->i", a, a)
    bb = aa if symmetric else np.einsum("ij,ij->i", b, b)
    sq = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    if symmetric:
        np.fill_diagonal(sq, 0.0)
    return sq


def gram(panel: SamplePanel, kernel: KernelConfig) -> np.ndarray:
    """m x m Gram matrix of kernel evaluations between realisation rows.

    Symmetric with unit diagonal; entries lie in (0, 1].
    """
    sigma = kernel.resolve(panel)
    sq = pairwise_sq_dists(panel.values)
    return np.exp(-sq / sigma**2)


def cross_gram(panel_x: SamplePanel, panel_y: SamplePanel, kernel: KernelConfig) -> np.ndarray:
    """m x n matrix of kernel evaluations between rows of X and rows of Y."""
    if panel_x.n_times != panel_y.n_times:
        raise DimensionError(
            f"panels have different numbers of time points: "
            f"{panel_x.n_times} vs {panel_y.n_times}"
        )
    sigma = kernel.resolve(panel_x, panel_y)
    sq = pairwise_sq_dists(panel_x.values, panel_y.values)
    return np.exp(-sq / sigma**2)


def gram_from_sq_dists(sq: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian Gram matrix from a precomputed squared-distance matrix."""
    if not np.isfinite(sigma) or sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    return np.exp(-sq / sigma**2)


def median_heuristic(*panels: SamplePanel) -> float:
    """Median pairwise Euclidean distance between all rows of the given panels.

    Rows of all panels are pooled, so one panel gives the per-sample flavour
    and two give the aggregated flavour. Distances are plain (not squared) and
    zero distances from duplicate rows stay in the pool; an even pair count is
    resolved by the midpoint of the two central values.
    """
    if not panels:
        raise InputError("median_heuristic needs at least one panel")
    widths = {p.n_times for p in panels}
    if len(widths) > 1:
        raise DimensionError(f"panels have different numbers of time points: {widths}")
    rows = np.vstack([p.values for p in panels])
    if rows.shape[0] < 2:
        raise InputError("median heuristic needs at least 2 rows in total")
    med = float(np.median(pdist(rows)))
    if med <= 0.0:
        raise DegenerateBandwidthError(
            "median pairwise distance is 0 (all rows identical); "
            "supply a fixed bandwidth instead"
        )
    return med
