"""Trace files and their aggregation into convergence curves.

A trace CSV has the header ``evals,level0_calls,seconds,best_cost`` and one
row per level-0 return. Aggregation evaluates every trace on a common grid
by last-observation-carried-forward and reports median and quartiles, which
is how the per-seed step functions become one comparable curve per strategy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import RunTrace, TraceRecord
from .errors import ConfigurationError, DatasetFormatError

TRACE_HEADER = ["evals", "level0_calls", "seconds", "best_cost"]


def write_trace_csv(path, trace: RunTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for rec in trace.records:
            writer.writerow(
                [rec.cost_evaluations, rec.level0_calls, f"{rec.wall_seconds:.6f}", repr(rec.best_cost)]
            )


def read_trace_csv(path) -> RunTrace:
    trace = RunTrace(seed=-1)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise DatasetFormatError(path, 1, f"expected header {TRACE_HEADER}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise DatasetFormatError(path, line_no, "expected 4 columns")
            try:
                rec = TraceRecord(int(row[0]), int(row[1]), float(row[2]), float(row[3]))
            except ValueError as exc:
                raise DatasetFormatError(path, line_no, str(exc)) from exc
            trace.records.append(rec)
    return trace


@dataclass(frozen=True)
class AggregateCurve:
    """Per-abscissa median (with quartiles) of best cost over many runs."""

    grid: np.ndarray
    median_best: np.ndarray
    p25: np.ndarray
    p75: np.ndarray
    run_count: int


def _step_values(trace: RunTrace, axis: str, grid: np.ndarray) -> np.ndarray:
    """Best cost of one trace at each grid point, carried forward."""
    if axis == "evals":
        xs = np.array([r.cost_evaluations for r in trace.records], dtype=float)
    elif axis == "seconds":
        xs = np.array([r.wall_seconds for r in trace.records], dtype=float)
    else:
        raise ConfigurationError(f"unknown axis {axis!r}")
    ys = np.array([r.best_cost for r in trace.records])
    idx = np.searchsorted(xs, grid, side="right") - 1
    if (idx < 0).any():
        raise ConfigurationError(
            "grid starts before the first record of some trace; raise grid-min"
        )
    return ys[idx]


def aggregate_traces(
    traces: list[RunTrace],
    axis: str = "evals",
    n_points: int = 200,
    grid_min: float | None = None,
    grid_max: float | None = None,
) -> AggregateCurve:
    """Median convergence curve over traces on a shared grid.

    The grid defaults to [max of first-record abscissae, max of last-record
    abscissae], so every run contributes a value at every grid point.
    """
    if not traces:
        raise ConfigurationError("need at least one trace to aggregate")
    for t in traces:
        if not t.records:
            raise ConfigurationError("cannot aggregate an empty trace")

    def _x(rec):
        return rec.cost_evaluations if axis == "evals" else rec.wall_seconds

    lo = max(_x(t.records[0]) for t in traces) if grid_min is None else grid_min
    hi = max(_x(t.records[-1]) for t in traces) if grid_max is None else grid_max
    if hi < lo:
        hi = lo
    grid = np.linspace(float(lo), float(hi), n_points)
    values = np.stack([_step_values(t, axis, grid) for t in traces])
    return AggregateCurve(
        grid=grid,
        median_best=np.median(values, axis=0),
        p25=np.percentile(values, 25, axis=0),
        p75=np.percentile(values, 75, axis=0),
        run_count=len(traces),
    )


def write_curve_csv(path, curve: AggregateCurve, axis: str = "evals") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, "median_best", "p25", "p75"])
        for x, med, lo, hi in zip(curve.grid, curve.median_best, curve.p25, curve.p75):
            writer.writerow([repr(float(x)), repr(float(med)), repr(float(lo)), repr(float(hi))])


def load_trace_dir(trace_dir) -> list[RunTrace]:
    paths = sorted(Path(trace_dir).glob("trace_*.csv"))
    if not paths:
        raise ConfigurationError(f"no trace_*.csv files in {trace_dir}")
    return [read_trace_csv(p) for p in paths]
