"""Risk-curve figures rendered to self-contained SVG files."""

from __future__ import annotations

import matplotlib
from matplotlib.figure import Figure

from .models import Orientation
from .risksim import RiskCurve


def risk_curve_figure(curve: RiskCurve) -> Figure:
    """One polyline per estimator over the lambda grid."""
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    for k, label in enumerate(curve.labels):
        ax.plot(curve.lambda_grid, curve.mean_risk[k], marker="o", markersize=3, label=label)
    if curve.orientation is Orientation.SCALE:
        ax.set_xscale("log")
        ax.set_xlabel("theta2 / theta1")
    else:
        ax.set_xlabel("theta2 - theta1")
    ax.set_ylabel("simulated risk")
    ax.set_title(
        f"{curve.model_kind} model, component {curve.component} "
        f"({curve.replications} replications)"
    )
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def save_figure_svg(fig: Figure, path, hashsalt: str = "restrict-est") -> None:
    """Save with pinned element-id salt and no timestamp, for byte-stable output."""
    with matplotlib.rc_context({"svg.hashsalt": hashsalt}):
        fig.savefig(path, format="svg", metadata={"Date": None})
