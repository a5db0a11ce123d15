"""Departure-area metric and batch evaluation."""

import csv

import numpy as np
import pytest

from lanedep import (
    EvaluationReport,
    EventFilterCriteria,
    Side,
    TrajectoryTrace,
    departure_area,
    evaluate_batch,
    write_running_mean_csv,
)
from lanedep.metrics import EventResult
from lanedep.vehicle import ControlledTrajectory


def traj(y, side=Side.LEFT, ts=0.1):
    y = np.asarray(y, dtype=float)
    n = y.size
    return ControlledTrajectory(
        ts=ts,
        t=np.arange(n) * ts,
        y=y,
        steer=np.zeros(n),
        active=np.zeros(n, dtype=bool),
        side=side,
        trigger_time=None,
        deactivated=False,
    )


def departure_trace(d_y=0.6, T=4.0, v=20.0, ts=0.1):
    L = int(round(T / ts)) + 1
    t = np.arange(L) * ts
    x = v * t
    d_x = x[-1]
    y = d_y * 4.0 * x * (d_x - x) / d_x**2
    return TrajectoryTrace(ts=ts, y=y, v=np.full(L, v), rho=np.zeros(L))


# ---------------------------------------------------------------------------
# departure area


def test_zero_offset_gives_zero_area():
    assert departure_area(traj(np.zeros(30))) == 0.0


def test_linear_ramp_area():
    # |y| = t on [0, 1]: the trapezoid rule is exact, S = 0.5
    y = np.arange(11) * 0.1
    assert departure_area(traj(y)) == pytest.approx(0.5, abs=1e-5)
    # mirrored ramp on the right side integrates identically
    assert departure_area(traj(-y, side=Side.RIGHT)) == pytest.approx(0.5, abs=1e-5)


def test_window_ends_at_last_outside_sample():
    # outside on the departure side up to index 4, then settled inside
    y = np.array([0.3, 0.5, 0.4, -0.1, 0.2, -0.05, -0.02, 0.0, 0.0])
    t = np.arange(y.size) * 0.1
    expect = np.trapezoid(np.abs(y[:5]), x=t[:5])
    assert departure_area(traj(y)) == pytest.approx(expect, abs=1e-12)


def test_inside_samples_before_window_end_still_count():
    # dips below the boundary inside the window contribute |y|
    y = np.array([0.4, -0.2, 0.4, 0.0])
    t = np.arange(4) * 0.1
    expect = np.trapezoid(np.abs(y[:3]), x=t[:3])
    assert departure_area(traj(y)) == pytest.approx(expect, abs=1e-12)


def test_never_outside_uses_full_window():
    y = -np.abs(np.sin(np.linspace(0, 3, 25))) - 0.1
    t = np.arange(25) * 0.1
    expect = np.trapezoid(np.abs(y), x=t)
    assert departure_area(traj(y, side=Side.LEFT)) == pytest.approx(expect, abs=1e-12)


def test_side_selects_departure_direction():
    y = np.array([0.5, 0.5, -0.5, -0.5, 0.0])
    t = np.arange(5) * 0.1
    left = departure_area(traj(y, side=Side.LEFT))
    right = departure_area(traj(y, side=Side.RIGHT))
    assert left == pytest.approx(np.trapezoid(np.abs(y[:2]), x=t[:2]), abs=1e-12)
    assert right == pytest.approx(np.trapezoid(np.abs(y[:4]), x=t[:4]), abs=1e-12)


def test_smaller_excursion_never_increases_area():
    y = 0.6 * np.sin(np.linspace(0, np.pi, 40))
    big = departure_area(traj(y))
    small = departure_area(traj(0.4 * y))
    assert small < big


# ---------------------------------------------------------------------------
# batch evaluation


def test_evaluate_batch_pairs_off_and_on():
    traces = [departure_trace(d_y=0.6), departure_trace(d_y=0.7)]
    report = evaluate_batch(traces)
    assert len(report.events) == 2
    assert report.failures == []
    for e in report.events:
        assert e.triggered
        assert e.s_on < e.s_off
        assert e.side is Side.LEFT
    summ = report.summary(Side.LEFT)
    assert summ.n_events == 2
    assert summ.n_triggered == 2
    assert 0.0 < summ.reduction_pct < 100.0
    assert report.summary(Side.RIGHT) is None


def test_evaluate_batch_thread_invariance():
    traces = [departure_trace(d_y=0.4 + 0.05 * i) for i in range(6)]
    seq = evaluate_batch(traces, threads=1)
    par = evaluate_batch(traces, threads=4)
    assert seq.to_dict() == par.to_dict()


def test_evaluate_batch_records_failures_and_continues():
    bad = TrajectoryTrace(ts=0.1, y=np.zeros(3), v=np.full(3, 20.0), rho=np.zeros(3))
    good = departure_trace(d_y=0.6)
    report = evaluate_batch([bad, good], names=["bad", "good"])
    assert [e.name for e in report.events] == ["good"]
    assert len(report.failures) == 1
    assert report.failures[0][0] == "bad"
    doc = report.to_dict()
    assert doc["failures"][0]["name"] == "bad"
    assert "error" in doc["failures"][0]


def test_evaluate_batch_custom_criteria():
    trace = departure_trace(d_y=0.6, T=4.0)
    strict = EventFilterCriteria(min_duration=5.0)
    report = evaluate_batch([trace], criteria=strict)
    assert report.events == []
    assert len(report.failures) == 1


def test_untriggered_events_have_equal_arms():
    trace = departure_trace(d_y=0.15)
    report = evaluate_batch([trace])
    e = report.events[0]
    assert not e.triggered
    assert e.trigger_time is None
    assert e.s_on == e.s_off
    assert report.summary(Side.LEFT).reduction_pct == 0.0


def test_running_means_are_cumulative_averages():
    events = [
        EventResult("a", Side.LEFT, 4.0, 2.0, True, 0.1),
        EventResult("b", Side.LEFT, 2.0, 1.0, True, 0.2),
        EventResult("c", Side.LEFT, 3.0, 3.0, False, None),
        EventResult("d", Side.RIGHT, 8.0, 4.0, True, 0.4),
    ]
    report = EvaluationReport(events=events)
    off, on = report.running_means(Side.LEFT)
    np.testing.assert_allclose(off, [4.0, 3.0, 3.0])
    np.testing.assert_allclose(on, [2.0, 1.5, 2.0])
    off_r, on_r = report.running_means(Side.RIGHT)
    np.testing.assert_allclose(off_r, [8.0])
    assert report.running_means(Side.LEFT)[0].size == 3
    empty = EvaluationReport(events=[])
    assert empty.running_means(Side.LEFT)[0].size == 0


def test_summary_statistics():
    events = [
        EventResult("a", Side.LEFT, 4.0, 2.0, True, 0.1),
        EventResult("b", Side.LEFT, 2.0, 1.0, True, 0.2),
    ]
    summ = EvaluationReport(events=events).summary(Side.LEFT)
    assert summ.mean_s_off == 3.0
    assert summ.mean_s_on == 1.5
    assert summ.std_s_off == pytest.approx(np.std([4.0, 2.0], ddof=1))
    assert summ.reduction_pct == pytest.approx(50.0)
    single = EvaluationReport(events=events[:1]).summary(Side.LEFT)
    assert single.std_s_off == 0.0


def test_report_dict_layout():
    events = [EventResult("a", Side.LEFT, 4.0, 2.0, True, 0.1)]
    doc = EvaluationReport(events=events, failures=[("z", "boom")]).to_dict()
    assert set(doc) == {"summary", "events", "failures"}
    assert set(doc["summary"]) == {"left"}
    assert set(doc["summary"]["left"]) == {
        "n_events", "n_triggered", "mean_s_off", "mean_s_on",
        "std_s_off", "std_s_on", "reduction_pct",
    }
    assert doc["events"][0] == {
        "name": "a", "side": "left", "s_off": 4.0, "s_on": 2.0,
        "triggered": True, "trigger_time": 0.1,
    }


def test_running_mean_csv(tmp_path):
    events = [
        EventResult("a", Side.LEFT, 4.0, 2.0, True, 0.1),
        EventResult("b", Side.LEFT, 2.0, 1.0, True, 0.2),
        EventResult("c", Side.RIGHT, 8.0, 4.0, True, 0.4),
    ]
    path = tmp_path / "running_mean.csv"
    write_running_mean_csv(EvaluationReport(events=events), path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["event_index", "side", "s_off", "s_on",
                       "running_mean_s_off", "running_mean_s_on"]
    assert rows[1] == ["0", "left", "4.0", "2.0", "4.0", "2.0"]
    assert rows[2] == ["1", "left", "2.0", "1.0", "3.0", "1.5"]
    # the index restarts per side, matching the per-side running means
    assert rows[3] == ["0", "right", "8.0", "4.0", "8.0", "4.0"]
    assert len(rows) == 4
