"""SVG figures for shadow rates, volatility paths and forecast fan charts.

Figures are built on bare ``Figure`` objects (no pyplot state). SVG output
is made byte-reproducible by fixing the hash salt and dropping the date
metadata.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "srvar",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (6.4, 3.6),
}

BAND_COLOR = "#4c72b0"


def _save(fig: Figure, path):
    with rc_context(STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")


def _new_figure() -> tuple[Figure, object]:
    with rc_context(STYLE):
        fig = Figure()
        ax = fig.add_subplot()
    return fig, ax


def plot_shadow_rate(x, observed, shadow_median, path, *, bound=None, name="rate", band=None):
    """Observed (dashed) against posterior-median shadow rate (solid)."""
    fig, ax = _new_figure()
    if band is not None:
        ax.fill_between(x, band[0], band[1], color=BAND_COLOR, alpha=0.2, linewidth=0,
                        gid="shadow_band", label="10-90%")
    ax.plot(x, shadow_median, color=BAND_COLOR, linestyle="-", gid="shadow_median",
            label="shadow (median)")
    ax.plot(x, observed, color="black", linestyle="--", gid="observed", label="observed")
    if bound is not None:
        ax.axhline(bound, color="grey", linewidth=0.8, linestyle=":", gid="bound")
    ax.set_xlabel("period")
    ax.set_ylabel(name)
    ax.legend(frameon=False, loc="best")
    _save(fig, path)


def plot_fan_chart(horizons, q_low, q_mid, q_high, path, *, name="rate", bound=None):
    """Median line with a shaded band between the outer quantiles.

    Each band edge is drawn as its own line so the SVG has one path per edge
    (``band_lower``, ``band_upper``).
    """
    horizons = np.asarray(horizons)
    fig, ax = _new_figure()
    ax.fill_between(horizons, q_low, q_high, color=BAND_COLOR, alpha=0.25, linewidth=0,
                    gid="band_fill")
    ax.plot(horizons, q_low, color=BAND_COLOR, linewidth=0.8, gid="band_lower", label="q10")
    ax.plot(horizons, q_high, color=BAND_COLOR, linewidth=0.8, gid="band_upper", label="q90")
    ax.plot(horizons, q_mid, color="black", linewidth=1.5, gid="median", label="median")
    if bound is not None:
        ax.axhline(bound, color="grey", linewidth=0.8, linestyle=":", gid="bound")
    ax.set_xlabel("horizon")
    ax.set_ylabel(name)
    ax.set_xticks(horizons)
    ax.legend(frameon=False, loc="best")
    _save(fig, path)


def plot_volatility(x, vol_mean, variables, path):
    fig, ax = _new_figure()
    for j, name in enumerate(variables):
        ax.plot(x, vol_mean[:, j], label=name, gid=f"vol_{name}")
    ax.set_xlabel("period")
    ax.set_ylabel("exp(h/2)")
    ax.legend(frameon=False, loc="best")
    _save(fig, path)
