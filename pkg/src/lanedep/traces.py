"""Lane-departure event traces and their low-dimensional description.

An event trace is a uniformly sampled record of a single departure:
lateral offset ``y`` of the departure-side wheel edge relative to the
lane edge (m, positive for left departures), longitudinal speed ``v``
(m/s) and lane curvature ``rho`` (1/m).  Each trace is summarized by an
8-component feature vector

    [T, d_y, sigma_y, v_bar, a_bar, sigma_v, rho_0, delta_rho]

obtained from three least-squares fits: a parabolic lateral profile
over travelled distance, a linear speed profile over time and a linear
curvature profile over time.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import (
    DegenerateTrace,
    FilterRejected,
    InvalidFeature,
    InvalidSpeed,
    NonFinite,
)

logger = logging.getLogger(__name__)

FEATURE_NAMES = ("T", "d_y", "sigma_y", "v_bar", "a_bar", "sigma_v", "rho_0", "delta_rho")
TRACE_HEADER = ("t", "y", "v", "rho")


class Side(str, enum.Enum):
    """Departure side; left events have y > 0, right events y < 0."""

    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> float:
        return 1.0 if self is Side.LEFT else -1.0


@dataclass
class TrajectoryTrace:
    """One recorded departure event, sampled every ``ts`` seconds.

    :param ts: sample period in seconds (> 0).
    :param y: wheel-edge lateral offset from the lane edge (m).
    :param v: longitudinal speed (m/s), strictly positive.
    :param rho: lane curvature (1/m).
    :param side: departure side; inferred from y if not given.
    """

    ts: float
    y: np.ndarray
    v: np.ndarray
    rho: np.ndarray
    side: Side = None  # type: ignore[assignment]

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.rho = np.asarray(self.rho, dtype=float)
        if self.ts <= 0:
            raise DegenerateTrace(f"sample period must be positive, got {self.ts}")
        n = self.y.size
        if n < 2:
            raise DegenerateTrace(f"trace needs at least 2 samples, got {n}")
        if self.v.size != n or self.rho.size != n:
            raise DegenerateTrace(
                f"channel lengths differ: y={n} v={self.v.size} rho={self.rho.size}"
            )
        for name, arr in (("y", self.y), ("v", self.v), ("rho", self.rho)):
            if not np.all(np.isfinite(arr)):
                raise NonFinite(f"trace channel {name} contains non-finite values")
        if np.any(self.v <= 0):
            raise InvalidSpeed("longitudinal speed must be strictly positive")
        if self.side is None:
            self.side = infer_side(self.y)

    def __len__(self) -> int:
        return self.y.size

    @property
    def duration(self) -> float:
        """Event duration T = (L - 1) * ts in seconds."""
        return (len(self) - 1) * self.ts

    @property
    def t(self) -> np.ndarray:
        """Sample times starting at zero."""
        return np.arange(len(self)) * self.ts


def infer_side(y: np.ndarray) -> Side:
    """Infer the departure side from the sign of the extremal offset."""
    y = np.asarray(y, dtype=float)
    return Side.LEFT if y[np.argmax(np.abs(y))] >= 0 else Side.RIGHT


@dataclass
class FeatureVector:
    """8-component event description; see module docstring for order."""

    T: float
    d_y: float
    sigma_y: float
    v_bar: float
    a_bar: float
    sigma_v: float
    rho_0: float
    delta_rho: float

    def __post_init__(self):
        vals = self.to_array()
        if not np.all(np.isfinite(vals)):
            raise NonFinite("feature vector contains non-finite values")
        if self.T <= 0:
            raise InvalidFeature(f"duration must be positive, got {self.T}")
        if self.v_bar <= 0:
            raise InvalidFeature(f"mean speed must be positive, got {self.v_bar}")
        if self.sigma_y < 0 or self.sigma_v < 0:
            raise InvalidFeature("noise levels must be non-negative")

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.T, self.d_y, self.sigma_y, self.v_bar,
             self.a_bar, self.sigma_v, self.rho_0, self.delta_rho]
        )

    @classmethod
    def from_array(cls, xi: np.ndarray) -> "FeatureVector":
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (len(FEATURE_NAMES),):
            raise InvalidFeature(f"expected {len(FEATURE_NAMES)} components, got {xi.shape}")
        return cls(*(float(c) for c in xi))

    @property
    def side(self) -> Side:
        """Departure side implied by the sign of the lateral extent."""
        return Side.LEFT if self.d_y >= 0 else Side.RIGHT


@dataclass
class EventFilterCriteria:
    """Corpus acceptance thresholds for extracted events.

    Durations are accepted on the closed interval
    [min_duration, max_duration]; the mean speed must be strictly above
    ``min_mean_speed``.
    """

    min_duration: float = 0.5
    max_duration: float = 10.0
    min_mean_speed: float = 5.0


def longitudinal_positions(trace: TrajectoryTrace) -> np.ndarray:
    """Travelled distance x(t) from trapezoidal integration of v, x(0) = 0."""
    return cumulative_trapezoid(trace.v, dx=trace.ts, initial=0.0)


def fit_lateral(trace: TrajectoryTrace) -> tuple[float, float, float]:
    """Fit the parabolic lateral profile over travelled distance.

    The profile is y(x) = -(4 d_y / d_x^2) (x - d_x/2)^2 + d_y, i.e.
    d_y * phi(x) with basis phi(x) = 4 x (d_x - x) / d_x^2, so the only
    free parameter d_y has the closed-form least-squares solution
    sum(y * phi) / sum(phi^2).

    :returns: (d_x, d_y, sigma_y) with d_x the total travel (m), d_y the
        peak lateral extent (m) and sigma_y the residual standard
        deviation about its mean (ddof = 1).
    """
    if len(trace) < 3:
        raise DegenerateTrace(f"lateral fit needs at least 3 samples, got {len(trace)}")
    x = longitudinal_positions(trace)
    d_x = float(x[-1])
    if d_x <= 0:
        raise DegenerateTrace(f"no forward travel (d_x = {d_x})")
    phi = 4.0 * x * (d_x - x) / d_x**2
    denom = float(phi @ phi)
    if denom <= 0:
        raise DegenerateTrace("degenerate parabola basis")
    d_y = float(phi @ trace.y) / denom
    resid = trace.y - d_y * phi
    sigma_y = float(np.std(resid, ddof=1))
    return d_x, d_y, sigma_y


def fit_velocity(trace: TrajectoryTrace, d_x: float) -> tuple[float, float, float]:
    """Fit the linear speed profile v(t) = a_bar (t - T/2) + v_bar.

    The mean speed is pinned to v_bar = d_x / T; the slope a_bar is the
    least-squares slope against centred time.

    :returns: (v_bar, a_bar, sigma_v) with sigma_v the residual standard
        deviation about its mean (ddof = 1).
    """
    T = trace.duration
    v_bar = d_x / T
    tc = trace.t - T / 2.0
    a_bar = float(tc @ (trace.v - trace.v.mean())) / float(tc @ tc)
    resid = trace.v - (v_bar + a_bar * tc)
    sigma_v = float(np.std(resid, ddof=1))
    return v_bar, a_bar, sigma_v


def fit_curvature(trace: TrajectoryTrace) -> tuple[float, float]:
    """Fit the linear curvature profile rho(t) = (delta_rho / T) t + rho_0.

    Ordinary least squares for intercept and slope; delta_rho is the
    total curvature change slope * T over the event.

    :returns: (rho_0, delta_rho).
    """
    t = trace.t
    tc = t - t.mean()
    denom = float(tc @ tc)
    if denom <= 0:
        raise DegenerateTrace("curvature fit needs a non-degenerate time grid")
    slope = float(tc @ (trace.rho - trace.rho.mean())) / denom
    rho_0 = float(trace.rho.mean() - slope * t.mean())
    return rho_0, slope * trace.duration


def extract_features(
    trace: TrajectoryTrace,
    criteria: EventFilterCriteria | None = None,
) -> FeatureVector:
    """Reduce a trace to its feature vector, applying corpus filters.

    :raises FilterRejected: if the event violates a filter criterion;
        the exception carries the criterion name.
    """
    criteria = criteria or EventFilterCriteria()
    T = trace.duration
    if T < criteria.min_duration:
        raise FilterRejected("min_duration", f"T = {T:.3f} s")
    if T > criteria.max_duration:
        raise FilterRejected("max_duration", f"T = {T:.3f} s")
    d_x, d_y, sigma_y = fit_lateral(trace)
    v_bar = d_x / T
    if v_bar <= criteria.min_mean_speed:
        raise FilterRejected("min_mean_speed", f"v_bar = {v_bar:.3f} m/s")
    v_bar, a_bar, sigma_v = fit_velocity(trace, d_x)
    rho_0, delta_rho = fit_curvature(trace)
    return FeatureVector(T, d_y, sigma_y, v_bar, a_bar, sigma_v, rho_0, delta_rho)


def _fmt(value: float) -> str:
    # repr of a Python float is the shortest exact round-trip form
    return repr(float(value))


def write_trace_csv(path: str | Path, trace: TrajectoryTrace) -> None:
    """Write a trace as CSV with header ``t,y,v,rho``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for t, y, v, rho in zip(trace.t, trace.y, trace.v, trace.rho):
            writer.writerow([_fmt(t), _fmt(y), _fmt(v), _fmt(rho)])


def read_trace_csv(path: str | Path, side: Side | None = None) -> TrajectoryTrace:
    """Read a trace CSV; the sample period is taken from the time column.

    :param side: departure side override; inferred from y when None.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(TRACE_HEADER):
            raise DegenerateTrace(f"{path}: expected header {','.join(TRACE_HEADER)}")
        try:
            rows = np.array([[float(c) for c in row] for row in reader if row])
        except ValueError as exc:
            raise NonFinite(f"{path}: malformed numeric value ({exc})") from None
    if rows.ndim != 2 or rows.shape[0] < 2 or rows.shape[1] != 4:
        raise DegenerateTrace(f"{path}: need at least 2 complete samples")
    t = rows[:, 0]
    steps = np.diff(t)
    ts = float(steps[0])
    if ts <= 0 or not np.allclose(steps, ts, rtol=1e-6, atol=1e-9):
        raise DegenerateTrace(f"{path}: time grid is not uniform")
    return TrajectoryTrace(ts=ts, y=rows[:, 1], v=rows[:, 2], rho=rows[:, 3], side=side)


def write_features_csv(path: str | Path, features) -> None:
    """Write feature vectors as CSV with the pinned 8-column header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_NAMES)
        for xi in features:
            arr = xi.to_array() if isinstance(xi, FeatureVector) else np.asarray(xi)
            writer.writerow([_fmt(c) for c in arr])


def read_features_csv(path: str | Path) -> list[FeatureVector]:
    """Read a feature CSV written by :func:`write_features_csv`."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(FEATURE_NAMES):
            raise InvalidFeature(f"{path}: expected header {','.join(FEATURE_NAMES)}")
        out = []
        for row in reader:
            if not row:
                continue
            out.append(FeatureVector.from_array(np.array([float(c) for c in row])))
    return out


def feature_matrix(features) -> np.ndarray:
    """Stack feature vectors into an (N, 8) array."""
    rows = [xi.to_array() if isinstance(xi, FeatureVector) else np.asarray(xi, dtype=float)
            for xi in features]
    if not rows:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.vstack(rows)
