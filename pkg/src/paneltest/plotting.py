"""Rendering of rejection-rate curves with confidence bands.

Figures are written headlessly and with fixed metadata so repeated runs of
the same experiment produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_VARIANT_LABELS = {
    "mmd_baseline": "MMD (median bandwidth)",
    "mmd_optimised": "MMD (power-optimised)",
    "hsic_baseline": "HSIC (median bandwidth)",
    "hsic_optimised": "HSIC (power-optimised)",
    "subcorr": "SubCorr",
    "subhsic": "SubHSIC",
}

_AXIS_LABELS = {
    "delta_mu": "mean shift",
    "delta_sigma": "variance shift",
    "theta": "rotation angle",
    "m": "sample size",
}


def power_curve(results, path, title: str | None = None) -> Path:
    """Plot one rejection-rate curve (with 95% CI band) per experiment result.

    All results must share the sweep parameter; the file format follows the
    path suffix (.svg or .png).
    """
    if not isinstance(results, (list, tuple)):
        results = [results]
    path = Path(path)
    parameter = results[0].spec.sweep_parameter
    plt.rcParams["svg.hashsalt"] = "paneltest"

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for result in results:
        xs = [p.parameter for p in result.points]
        ys = [p.mu_hat for p in result.points]
        low = [p.ci_low for p in result.points]
        high = [p.ci_high for p in result.points]
        label = _VARIANT_LABELS.get(result.spec.test, result.spec.test)
        (line,) = ax.plot(xs, ys, marker="o", label=label)
        ax.fill_between(xs, low, high, alpha=0.2, color=line.get_color())
    ax.set_xlabel(_AXIS_LABELS.get(parameter, parameter))
    ax.set_ylabel("rejection rate")
    ax.set_ylim(-0.02, 1.02)
    ax.axhline(results[0].spec.alpha, color="grey", linestyle=":", linewidth=1)
    ax.legend(loc="best")
    if title is None:
        title = results[0].spec.name
    ax.set_title(title)
    fig.tight_layout()
    metadata = {"Date": None} if path.suffix == ".svg" else None
    fig.savefig(path, metadata=metadata)
    plt.close(fig)
    return path
