"""The three figure kinds rendered from kslearn output files.

Every renderer returns the matplotlib Figure after saving it, so tests
can inspect axes; data series depend only on the input files, rerunning
reproduces them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # batch rendering only
import matplotlib.pyplot as plt
import numpy as np

from .io import (
    SchemaError,
    read_density,
    read_model,
    read_profile_curve,
    read_report,
    read_trajectory,
)

DENSITY_COLOR = "0.82"
TRUTH_STYLE = dict(color="tab:blue", lw=1.8, label="regularized profile")
LEARNED_STYLE = dict(color="tab:red", lw=1.6, ls="--", label="learned profile")


def _density_background(ax, edges, masses):
    # filled area on a secondary axis, normalized to peak 1
    twin = ax.twinx()
    centers = 0.5 * (edges[:-1] + edges[1:])
    peak = masses.max()
    norm = masses / peak if peak > 0 else masses
    twin.fill_between(centers, norm, step="mid", color=DENSITY_COLOR, zorder=0)
    twin.set_ylim(0, 1.05)
    twin.set_yticks([])
    twin.set_zorder(ax.get_zorder() - 1)
    ax.patch.set_visible(False)
    return twin


def _curve_ylim(r, truth, learned, r_from):
    # scale the main panel to the tail of the curves; the inset shows the spike
    tail = r >= r_from
    if not np.any(tail):
        tail = slice(None)
    hi = max(np.max(truth[tail]), np.max(learned[tail]), 0.0)
    lo = min(np.min(learned[tail]), 0.0)
    pad = 0.1 * (hi - lo + 1e-12)
    return lo - pad, hi + pad


def profile_overlay(curve_csv, density_csv, report_json, out, inset_max=None):
    """Learned vs regularized profile with density background and inset.

    The inset window is [0, 3 * r_c] (or the epsilon analogue) unless
    overridden.
    """
    r, truth, learned = read_profile_curve(curve_csv)
    edges, masses = read_density(density_csv)
    report = read_report(report_json)
    if inset_max is None:
        inset_max = 3.0 * float(report["r_c_or_eps"])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    _density_background(ax, edges, masses)
    ax.plot(r, truth, **TRUTH_STYLE)
    ax.plot(r, learned, **LEARNED_STYLE)
    ax.set_xlim(r[0], r[-1])
    ax.set_ylim(*_curve_ylim(r, truth, learned, inset_max))
    ax.set_xlabel("pairwise distance r")
    ax.set_ylabel("profile value")
    ax.legend(loc="upper right", fontsize=9)
    mode = report.get("mode", "")
    chi = report.get("chi", "")
    ax.set_title(f"{mode} d={report.get('d', '?')}, chi={chi}", fontsize=10)
    inset = ax.inset_axes([0.42, 0.38, 0.54, 0.5])
    inset.plot(r, truth, **{**TRUTH_STYLE, "label": None})
    inset.plot(r, learned, **{**LEARNED_STYLE, "label": None})
    inset.set_xlim(0.0, inset_max)
    window = r <= inset_max
    if np.any(window):
        vals = np.concatenate([truth[window], learned[window]])
        pad = 0.08 * (vals.max() - vals.min() + 1e-12)
        inset.set_ylim(vals.min() - pad, vals.max() + pad)
    inset.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    return fig


def _fan_panel(ax, times, frames, title):
    n_frames, n_particles, d = frames.shape
    t_colors = np.repeat(times, n_particles)
    if d == 1:
        xs = np.repeat(times, n_particles)
        ys = frames[:, :, 0].ravel()
        ax.set_xlabel("t")
        ax.set_ylabel("x")
    else:
        xs = frames[:, :, 0].ravel()
        ys = frames[:, :, 1].ravel()
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    sc = ax.scatter(xs, ys, c=t_colors, s=6, cmap="viridis")
    if d > 1:
        for i in range(n_particles):
            ax.plot(frames[:, i, 0], frames[:, i, 1], color="0.6", lw=0.4, zorder=0)
    ax.set_title(title, fontsize=10)
    return sc


def trajectory_fan(traj_csv, out, traj2_csv=None):
    """Particle trajectories colored by time; optionally two panels.

    With a second file the first is labeled "learned" and the second
    "true", keeping the learned/true panel order.
    """
    times, frames = read_trajectory(traj_csv)
    if traj2_csv is None:
        fig, ax = plt.subplots(figsize=(5.2, 4.4))
        sc = _fan_panel(ax, times, frames, "trajectories")
    else:
        times2, frames2 = read_trajectory(traj2_csv)
        fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.2), sharex=True, sharey=True)
        sc = _fan_panel(axes[0], times, frames, "learned")
        _fan_panel(axes[1], times2, frames2, "true")
    fig.colorbar(sc, ax=fig.axes, label="t", shrink=0.85)
    fig.savefig(out, dpi=150)
    return fig


def _model_panel(ax, model, edges, masses, title, truth=None):
    _density_background(ax, edges, masses)
    grid = np.linspace(model.a, model.b, 600)
    if truth is not None:
        r, tr = truth
        ax.plot(r, tr, **TRUTH_STYLE)
    ax.plot(grid, model(grid), **LEARNED_STYLE)
    for bp in model.breakpoints:
        ax.axvline(bp, color="0.55", lw=0.4, ymax=0.06)
    ax.set_xlim(edges[0], edges[-1])
    vals = model(grid)
    pad = 0.1 * (vals.max() - vals.min() + 1e-12)
    ax.set_ylim(min(vals.min(), 0) - pad, vals.max() + pad)
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("pairwise distance r")


def adaptive_compare(model_adaptive, model_uniform, density_csv, out, curve_csv=None):
    """Adaptive (left) vs uniform (right) learned profiles with knot marks."""
    ma = read_model(model_adaptive)
    mu = read_model(model_uniform)
    edges, masses = read_density(density_csv)
    truth = None
    if curve_csv is not None:
        r, tr, _ = read_profile_curve(curve_csv)
        truth = (r, tr)
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.0))
    _model_panel(
        axes[0], ma, edges, masses,
        f"adaptive ({ma.breakpoints.size} knots)", truth,
    )
    _model_panel(
        axes[1], mu, edges, masses,
        f"uniform ({mu.breakpoints.size} knots)", truth,
    )
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    return fig


@dataclass
class FigureSpec:
    """One figure request: kind plus the input files it consumes."""

    kind: str  # "profile-overlay" | "trajectory-fan" | "adaptive-compare"
    inputs: dict = field(default_factory=dict)
    inset_max: float | None = None

    def __post_init__(self):
        if self.kind not in ("profile-overlay", "trajectory-fan", "adaptive-compare"):
            raise SchemaError(f"unknown figure kind {self.kind!r}")


def render(spec: FigureSpec, out):
    """Render one figure spec to an image file."""
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "profile-overlay":
        return profile_overlay(
            spec.inputs["curve"], spec.inputs["density"], spec.inputs["report"],
            out, inset_max=spec.inset_max,
        )
    if spec.kind == "trajectory-fan":
        return trajectory_fan(
            spec.inputs["traj"], out, traj2_csv=spec.inputs.get("traj2")
        )
    return adaptive_compare(
        spec.inputs["model_adaptive"], spec.inputs["model_uniform"],
        spec.inputs["density"], out, curve_csv=spec.inputs.get("curve"),
    )
