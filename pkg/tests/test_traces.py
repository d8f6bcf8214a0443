"""Trace CSV round-trips and aggregation behaviour."""

import numpy as np
import pytest

from partial_reinit.engine import RunTrace
from partial_reinit.errors import ConfigurationError
from partial_reinit.traces import (
    aggregate_traces,
    read_trace_csv,
    write_curve_csv,
    write_trace_csv,
)


def _trace(points, seed=0):
    t = RunTrace(seed=seed)
    for evals, calls, secs, best in points:
        t.record(evals, calls, secs, best)
    return t


class TestCsvRoundTrip:
    def test_exact_floats_survive(self, tmp_path):
        t = _trace([(2, 1, 0.1, 10.123456789012345), (5, 2, 0.2, 1.0000000000000002)])
        path = tmp_path / "trace_0.csv"
        write_trace_csv(path, t)
        loaded = read_trace_csv(path)
        assert len(loaded.records) == 2
        assert loaded.records[0].best_cost == t.records[0].best_cost
        assert loaded.records[1].best_cost == t.records[1].best_cost
        assert loaded.records[1].cost_evaluations == 5


class TestAggregation:
    def test_single_trace_equals_its_step_function(self):
        t = _trace([(1, 1, 0.0, 10.0), (5, 2, 0.0, 4.0), (9, 3, 0.0, 2.0)])
        curve = aggregate_traces([t], n_points=9)
        assert curve.run_count == 1
        # at evals=1 best is 10; from 5 on it is 4; from 9 on it is 2
        assert curve.median_best[0] == 10.0
        assert curve.median_best[-1] == 2.0
        mid = np.searchsorted(curve.grid, 5.0)
        assert curve.median_best[mid] == 4.0

    def test_constant_traces_median(self):
        traces = [_trace([(1, 1, 0.0, c), (10, 2, 0.0, c)]) for c in (1.0, 2.0, 3.0)]
        curve = aggregate_traces(traces, n_points=5)
        assert np.all(curve.median_best == 2.0)
        assert np.all(curve.p25 == 1.5)
        assert np.all(curve.p75 == 2.5)

    def test_median_is_non_increasing(self):
        rng = np.random.default_rng(0)
        traces = []
        for seed in range(20):
            best = 100.0
            pts = []
            evals = 0
            for _ in range(15):
                evals += int(rng.integers(1, 5))
                best *= float(rng.random() * 0.5 + 0.5)
                pts.append((evals, len(pts) + 1, 0.0, best))
            traces.append(_trace(pts, seed))
        curve = aggregate_traces(traces, n_points=100)
        assert np.all(np.diff(curve.median_best) <= 1e-12)
        assert np.all(np.diff(curve.p25) <= 1e-12)
        assert np.all(np.diff(curve.p75) <= 1e-12)

    def test_explicit_grid_bounds(self):
        t = _trace([(2, 1, 0.0, 5.0), (10, 2, 0.0, 1.0)])
        curve = aggregate_traces([t], n_points=3, grid_min=2, grid_max=20)
        assert curve.grid[0] == 2.0
        assert curve.grid[-1] == 20.0
        assert curve.median_best[-1] == 1.0  # carried forward past the last record

    def test_grid_before_first_record_rejected(self):
        t = _trace([(5, 1, 0.0, 5.0)])
        with pytest.raises(ConfigurationError):
            aggregate_traces([t], n_points=3, grid_min=1, grid_max=10)

    def test_empty_input_rejected(self):
        with pytest.raises(ConfigurationError):
            aggregate_traces([])

    def test_curve_csv_written(self, tmp_path):
        t = _trace([(1, 1, 0.0, 3.0), (4, 2, 0.0, 1.5)])
        curve = aggregate_traces([t], n_points=4)
        path = tmp_path / "curve.csv"
        write_curve_csv(path, curve)
        lines = path.read_text().splitlines()
        assert lines[0] == "evals,median_best,p25,p75"
        assert len(lines) == 5
