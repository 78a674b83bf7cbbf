"""Adaptive refinement of the breakpoint partition.

Each iteration learns the profile on the current partition and on its
full midpoint refinement, compares the two at the midpoint of every
current subinterval, and subdivides only the subintervals whose relative
discrepancy exceeds the tolerance.  Refinement stops when nothing is
flagged, when the iteration cap is reached, or when an optional
breakpoint budget is filled (flagged midpoints with the largest
discrepancies are inserted first).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bspline import Partition, SplineModel, eval_spline, uniform_partition
from .data import TrajectoryDataset
from .learner import learn

DEFAULT_INITIAL_COUNT = 8


@dataclass(frozen=True)
class RefinementRecord:
    """What one refinement iteration saw and decided."""

    iteration: int
    breakpoints: np.ndarray
    midpoints: np.ndarray
    e_rel: np.ndarray
    flagged: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "breakpoints": self.breakpoints.tolist(),
                "midpoints": self.midpoints.tolist(),
                "e_rel": self.e_rel.tolist(),
                "flagged": [bool(f) for f in self.flagged],
            }
        )


@dataclass(frozen=True)
class RefinementResult:
    partition: Partition
    model: SplineModel
    iterations: int
    records: tuple[RefinementRecord, ...] = field(default_factory=tuple)


def midpoint_refine(partition: Partition) -> Partition:
    """Insert the midpoint of every subinterval."""
    pts = partition.breakpoints
    mids = 0.5 * (pts[:-1] + pts[1:])
    merged = np.empty(pts.size + mids.size)
    merged[0::2] = pts
    merged[1::2] = mids
    return Partition(merged, partition.degree)


def _interval_errors(model_prev, model_full, mids) -> np.ndarray:
    v_prev = np.asarray(eval_spline(model_prev, mids), dtype=float)
    v_full = np.asarray(eval_spline(model_full, mids), dtype=float)
    part = model_prev.partition
    grid = np.linspace(part.a, part.b, 512)
    scale = float(np.max(np.abs(eval_spline(model_prev, grid))))
    if scale == 0.0:
        scale = 1.0
    diff = np.abs(v_prev - v_full)
    small = np.abs(v_prev) < 1.0e-12 * scale
    # near-zero reference values fall back to an absolute criterion
    denom = np.where(small, scale, np.abs(v_prev))
    return diff / denom


def refine(
    dataset: TrajectoryDataset,
    tol: float,
    max_iter: int,
    initial: Partition | None = None,
    budget: int | None = None,
    degree: int = 3,
) -> RefinementResult:
    """Adaptively refine the partition and return the final learned model.

    `initial` defaults to a uniform partition of DEFAULT_INITIAL_COUNT
    breakpoints over the observed distance range (a two-point initial
    partition cannot resolve anything useful at cubic degree).  `budget`
    caps the total number of breakpoints.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if initial is None:
        a, b = dataset.distance_range()
        count = DEFAULT_INITIAL_COUNT if budget is None else min(DEFAULT_INITIAL_COUNT, budget)
        initial = uniform_partition(a, b, count, degree)
    part = initial
    model = learn(dataset, part)
    records: list[RefinementRecord] = []
    iterations = 0
    for j in range(1, max_iter + 1):
        iterations = j
        full = midpoint_refine(part)
        model_full = learn(dataset, full)
        pts = part.breakpoints
        mids = 0.5 * (pts[:-1] + pts[1:])
        e_rel = _interval_errors(model, model_full, mids)
        flagged = e_rel > tol
        records.append(
            RefinementRecord(
                iteration=j,
                breakpoints=pts.copy(),
                midpoints=mids,
                e_rel=e_rel,
                flagged=flagged,
            )
        )
        if not np.any(flagged):
            break
        new_pts = mids[flagged]
        exhausted_budget = False
        if budget is not None:
            room = budget - pts.size
            if room <= 0:
                break
            if new_pts.size >= room:
                order = np.argsort(e_rel[flagged])[::-1][:room]
                new_pts = new_pts[np.sort(order)]
                exhausted_budget = True
        part = Partition(np.sort(np.concatenate([pts, new_pts])), degree)
        model = learn(dataset, part)
        if exhausted_budget:
            break
    return RefinementResult(
        partition=part, model=model, iterations=iterations, records=tuple(records)
    )


def write_refinement_log(records, path):
    """One JSON line per refinement iteration."""
    Path(path).write_text("\n".join(r.to_json() for r in records) + "\n")
