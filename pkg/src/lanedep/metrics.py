"""Departure-area metric and controller-on/off batch evaluation.

The severity of one departure is the time integral S of the absolute
wheel-edge offset |y(t)| over the departure behavior, i.e. from the
event start through the last sample at which the wheel is still beyond
the lane boundary.  For an uncontrolled event this is the full event
window; for a corrected event the behavior ends when the wheel returns
inside the lane, so time spent settling back toward the lane center
does not count as departure area.

Batches are evaluated with both arms paired on identical events and
summarized per departure side by mean areas and the relative reduction
100 (mean S_off - mean S_on) / mean S_off.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LaneDepError
from .traces import (
    EventFilterCriteria,
    Side,
    TrajectoryTrace,
    extract_features,
)
from .vehicle import ControllerGains, ControlledTrajectory, VehicleParams, simulate_event

logger = logging.getLogger(__name__)


def departure_area(traj: ControlledTrajectory) -> float:
    """Trapezoidal integral of |y| over the departure behavior.

    The window runs from the first sample through the last sample whose
    offset is beyond the lane boundary on the departure side; if the
    wheel never leaves the lane the full trajectory window is used.
    """
    y = np.asarray(traj.y, dtype=float)
    t = np.asarray(traj.t, dtype=float)
    outside = traj.side.sign * y > 0
    if np.any(outside):
        end = int(np.nonzero(outside)[0][-1])
    else:
        end = y.size - 1
    return float(np.trapezoid(np.abs(y[: end + 1]), x=t[: end + 1]))


@dataclass
class EventResult:
    """Paired controller-off/on outcome for one event."""

    name: str
    side: Side
    s_off: float
    s_on: float
    triggered: bool
    trigger_time: float | None


@dataclass
class SideSummary:
    """Aggregate statistics for one departure side."""

    n_events: int
    n_triggered: int
    mean_s_off: float
    mean_s_on: float
    std_s_off: float
    std_s_on: float
    reduction_pct: float

    def to_dict(self) -> dict:
        return {
            "n_events": self.n_events,
            "n_triggered": self.n_triggered,
            "mean_s_off": self.mean_s_off,
            "mean_s_on": self.mean_s_on,
            "std_s_off": self.std_s_off,
            "std_s_on": self.std_s_on,
            "reduction_pct": self.reduction_pct,
        }


@dataclass
class EvaluationReport:
    """Batch evaluation outcome."""

    events: list[EventResult]
    failures: list[tuple[str, str]] = field(default_factory=list)

    def for_side(self, side: Side) -> list[EventResult]:
        return [e for e in self.events if e.side is side]

    def running_means(self, side: Side) -> tuple[np.ndarray, np.ndarray]:
        """Cumulative means of (S_off, S_on) over the side's events."""
        ev = self.for_side(side)
        if not ev:
            return np.empty(0), np.empty(0)
        counts = np.arange(1, len(ev) + 1)
        off = np.cumsum([e.s_off for e in ev]) / counts
        on = np.cumsum([e.s_on for e in ev]) / counts
        return off, on

    def summary(self, side: Side) -> SideSummary | None:
        ev = self.for_side(side)
        if not ev:
            return None
        s_off = np.array([e.s_off for e in ev])
        s_on = np.array([e.s_on for e in ev])
        mean_off = float(s_off.mean())
        mean_on = float(s_on.mean())
        reduction = 0.0 if mean_off == 0 else 100.0 * (mean_off - mean_on) / mean_off
        ddof = 1 if len(ev) > 1 else 0
        return SideSummary(
            n_events=len(ev),
            n_triggered=sum(e.triggered for e in ev),
            mean_s_off=mean_off,
            mean_s_on=mean_on,
            std_s_off=float(s_off.std(ddof=ddof)),
            std_s_on=float(s_on.std(ddof=ddof)),
            reduction_pct=reduction,
        )

    def to_dict(self) -> dict:
        doc: dict = {"summary": {}, "events": [], "failures": []}
        for side in (Side.LEFT, Side.RIGHT):
            summ = self.summary(side)
            if summ is not None:
                doc["summary"][side.value] = summ.to_dict()
        for e in self.events:
            doc["events"].append(
                {
                    "name": e.name,
                    "side": e.side.value,
                    "s_off": e.s_off,
                    "s_on": e.s_on,
                    "triggered": e.triggered,
                    "trigger_time": e.trigger_time,
                }
            )
        doc["failures"] = [{"name": n, "error": msg} for n, msg in self.failures]
        return doc


def evaluate_batch(
    traces: list[TrajectoryTrace],
    params: VehicleParams | None = None,
    gains: ControllerGains | None = None,
    names: list[str] | None = None,
    criteria: EventFilterCriteria | None = None,
    substeps: int = 10,
    threads: int = 1,
) -> EvaluationReport:
    """Run both controller arms on every event and collect S pairs.

    Events whose feature extraction fails are recorded under
    ``failures`` and skipped; simulation errors abort, since sampled
    corpora should never produce them.
    """
    params = params or VehicleParams()
    gains = gains or ControllerGains()
    if names is None:
        names = [f"event_{i:05d}" for i in range(len(traces))]

    def one(item: tuple[str, TrajectoryTrace]):
        name, trace = item
        try:
            xi = extract_features(trace, criteria)
        except LaneDepError as exc:
            return name, None, str(exc)
        off = simulate_event(trace, xi, params, gains, controller=False, substeps=substeps)
        on = simulate_event(trace, xi, params, gains, controller=True, substeps=substeps)
        result = EventResult(
            name=name,
            side=trace.side,
            s_off=departure_area(off),
            s_on=departure_area(on),
            triggered=on.triggered,
            trigger_time=on.trigger_time,
        )
        return name, result, None

    items = list(zip(names, traces))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, items))
    else:
        outcomes = [one(item) for item in items]

    report = EvaluationReport(events=[])
    for name, result, err in outcomes:
        if err is not None:
            logger.warning("event %s skipped: %s", name, err)
            report.failures.append((name, err))
        else:
            report.events.append(result)
    return report


def write_running_mean_csv(report: EvaluationReport, path: str | Path) -> None:
    """Per-event areas and running means, one row per evaluated event."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["event_index", "side", "s_off", "s_on", "running_mean_s_off", "running_mean_s_on"]
        )
        for side in (Side.LEFT, Side.RIGHT):
            ev = report.for_side(side)
            off_rm, on_rm = report.running_means(side)
            for i, e in enumerate(ev):
                writer.writerow(
                    [i, side.value, repr(e.s_off), repr(e.s_on), repr(float(off_rm[i])), repr(float(on_rm[i]))]
                )
