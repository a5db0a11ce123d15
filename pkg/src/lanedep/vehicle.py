"""Lateral vehicle dynamics and the lane-keeping steering controller.

The vehicle is a linear bicycle model written in lane-error
coordinates x = [e_y, e_y', e_psi, e_psi'] with e_y the offset of the
CG from the lane center and e_psi the heading error to the lane.  The
feedback law

    delta = K_y e_y + K_psi (e_psi + delta_psi_l)

adds a preview term delta_psi_l, the heading change of the lane over a
look-ahead horizon T_lp.  Closed-loop simulation is triggered when a
trace's wheel-edge offset first exceeds the threshold y_s and runs
until the vehicle settles near the lane center or a time cap of twice
the event duration is reached.

Right-side departures are mirrored into the left-side frame (lateral
quantities and curvature change sign), simulated, and mirrored back.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import integrate_closed_loop
from .errors import InvalidSpeed, LaneDepError, UnstableGains
from .traces import FeatureVector, Side, TrajectoryTrace

logger = logging.getLogger(__name__)


@dataclass
class VehicleParams:
    """Bicycle-model parameters (SI units)."""

    c_alpha_f: float = 80_000.0  # front cornering stiffness (N/rad)
    c_alpha_r: float = 80_000.0  # rear cornering stiffness (N/rad)
    l_f: float = 1.43            # CG to front axle (m)
    l_r: float = 1.47            # CG to rear axle (m)
    i_z: float = 3_344.0         # yaw inertia (kg m^2)
    m: float = 1_000.0           # total mass (kg)
    w_l: float = 3.6             # lane width (m)
    w_v: float = 1.9             # vehicle width (m)

    @property
    def edge_margin(self) -> float:
        """CG-to-center offset when a wheel edge sits on the lane edge."""
        return (self.w_l - self.w_v) / 2.0


@dataclass
class ControllerGains:
    """Steering law gains and activation settings."""

    k_y: float = -0.005   # offset gain (rad/m)
    k_psi: float = -0.2   # heading gain (rad/rad)
    t_lp: float = 2.0     # preview horizon (s)
    y_s: float = 0.2      # trigger threshold on the wheel-edge offset (m)
    deact_offset: float = 0.05  # |e_y| band for deactivation (m)
    deact_rate: float = 0.05    # |e_y'| band for deactivation (m/s)


# JSON keys accepted in a vehicle/controller config file
_VEHICLE_KEYS = ("c_alpha_f", "c_alpha_r", "l_f", "l_r", "i_z", "m", "w_l", "w_v")
_GAIN_KEYS = ("t_lp", "k_y", "k_psi", "y_s", "deact_offset", "deact_rate")
CONFIG_KEYS = _VEHICLE_KEYS + _GAIN_KEYS + ("ts",)


def build_state_space(params: VehicleParams, v_x: float):
    """Error-coordinate system matrices at a frozen longitudinal speed.

    :returns: (A (4,4), B (4,), E (4,)) for
        x' = A x + B delta + E psi_dot_l.
    """
    if v_x <= 0:
        raise InvalidSpeed(f"longitudinal speed must be positive, got {v_x}")
    cf, cr = params.c_alpha_f, params.c_alpha_r
    lf, lr = params.l_f, params.l_r
    iz, m = params.i_z, params.m
    A = np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [
                0.0,
                -(2 * cf + 2 * cr) / (m * v_x),
                (2 * cf + 2 * cr) / m,
                -(2 * cf * lf + 2 * cr * lr) / (m * v_x),
            ],
            [0.0, 0.0, 0.0, 1.0],
            [
                0.0,
                -(2 * cf * lf - 2 * cr * lr) / (iz * v_x),
                (2 * cf * lf - 2 * cr * lr) / iz,
                -(2 * cf * lf**2 + 2 * cr * lr**2) / (iz * v_x),
            ],
        ]
    )
    B = np.array([0.0, 2 * cf / m, 0.0, 2 * cf * lf / iz])
    E = np.array(
        [
            0.0,
            -(2 * cf * lf - 2 * cr * lr) / (m * v_x) - v_x,
            0.0,
            -(2 * cf * lf**2 + 2 * cr * lr**2) / (iz * v_x),
        ]
    )
    return A, B, E


def control_law(state: np.ndarray, delta_psi_l: float, gains: ControllerGains) -> float:
    """Steering angle delta = K_y e_y + K_psi (e_psi + delta_psi_l)."""
    return float(gains.k_y * state[0] + gains.k_psi * (state[2] + delta_psi_l))


def closed_loop_matrices(params: VehicleParams, gains: ControllerGains, v_x: float):
    """State and input matrices of the loop closed by the steering law.

    :returns: (A_c, B_c) for x' = A_c x + B_c [psi_dot_l, delta_psi_l]^T.
    """
    A, B, E = build_state_space(params, v_x)
    F = np.array([gains.k_y, 0.0, gains.k_psi, 0.0])
    A_c = A + np.outer(B, F)
    B_c = np.column_stack([E, B * gains.k_psi])
    return A_c, B_c


def closed_loop_eigenvalues(params: VehicleParams, gains: ControllerGains, v_x: float) -> np.ndarray:
    """Eigenvalues of the closed-loop state matrix at speed v_x."""
    A_c, _ = closed_loop_matrices(params, gains, v_x)
    return np.linalg.eigvals(A_c)


def lane_heading_inputs(
    xi: FeatureVector,
    v_x_ts: float,
    t: np.ndarray,
    gains: ControllerGains,
):
    """Lane heading rate and preview heading change at event time t.

    With the event's linear curvature profile rho(t) = rho_0 +
    (delta_rho / T) t and speed frozen at the trigger value, the lane
    heading rate is psi_dot_l(t) = v_x rho(t) and the preview heading
    change over the horizon T_lp integrates to an affine function of t:

        delta_psi_l(t) = (delta_rho T_lp v_x / T) t
                         + delta_rho T_lp^2 v_x / (2 T) + v_x rho_0 T_lp

    :returns: (psi_dot_l(t), delta_psi_l(t)), vectorized over t.
    """
    p0, p1, q0, q1 = _heading_coefficients(xi.rho_0, xi.delta_rho, xi.T, v_x_ts, gains.t_lp)
    t = np.asarray(t, dtype=float)
    return p0 + p1 * t, q0 + q1 * t


def _heading_coefficients(rho_0: float, delta_rho: float, T: float, v_x: float, t_lp: float):
    p0 = v_x * rho_0
    p1 = v_x * delta_rho / T
    q1 = delta_rho * t_lp * v_x / T
    q0 = delta_rho * t_lp**2 * v_x / (2.0 * T) + v_x * rho_0 * t_lp
    return p0, p1, q0, q1


@dataclass
class ControlledTrajectory:
    """Wheel-edge offset trajectory of one simulated event.

    ``y`` is in the trace's own frame (positive toward the departure
    side for left events, negative for right events).  ``active`` marks
    the samples where the controller is engaged; it is a single
    contiguous interval (possibly empty when the event never triggers).
    """

    ts: float
    t: np.ndarray
    y: np.ndarray
    steer: np.ndarray
    active: np.ndarray
    side: Side
    trigger_time: float | None
    deactivated: bool
    final_state: np.ndarray | None = None

    @property
    def triggered(self) -> bool:
        return self.trigger_time is not None


def _passthrough(trace: TrajectoryTrace) -> ControlledTrajectory:
    n = len(trace)
    return ControlledTrajectory(
        ts=trace.ts,
        t=trace.t,
        y=trace.y.copy(),
        steer=np.zeros(n),
        active=np.zeros(n, dtype=bool),
        side=trace.side,
        trigger_time=None,
        deactivated=False,
    )


def simulate_event(
    trace: TrajectoryTrace,
    xi: FeatureVector,
    params: VehicleParams | None = None,
    gains: ControllerGains | None = None,
    controller: bool = True,
    substeps: int = 10,
) -> ControlledTrajectory:
    """Replay an event with the lane-keeping controller on or off.

    With the controller off (or if the trace never crosses the trigger
    threshold) the output is the input trace.  Otherwise the trace is
    followed up to the first sample with |y| > y_s; from there the
    closed loop is integrated with classical RK4 at step ts/substeps,
    output decimated to the trace grid.  The run ends when the vehicle
    is back near the lane center (|e_y| and |e_y'| inside the
    deactivation bands, checked at output samples) or at twice the
    event duration.

    A warning is emitted if the closed loop is unstable at the trigger
    speed; integration proceeds regardless.
    """
    params = params or VehicleParams()
    gains = gains or ControllerGains()
    if not controller:
        return _passthrough(trace)

    sign = trace.side.sign
    yw = sign * trace.y
    over = np.abs(yw) > gains.y_s
    if not np.any(over):
        return _passthrough(trace)
    ti = int(np.argmax(over))
    t_s = ti * trace.ts
    v_x = float(trace.v[ti])

    if ti >= 1:
        v_y = (yw[ti] - yw[ti - 1]) / trace.ts
    else:
        v_y = (yw[ti + 1] - yw[ti]) / trace.ts
    x0 = np.array(
        [yw[ti] + params.edge_margin, v_y, math.atan(v_y / v_x), 0.0]
    )

    A_c, B_c = closed_loop_matrices(params, gains, v_x)
    eig = np.linalg.eigvals(A_c)
    if np.any(eig.real >= 0):
        warnings.warn(
            f"closed loop unstable at v_x = {v_x:.2f} m/s "
            f"(max Re(eig) = {eig.real.max():.3g})",
            UnstableGains,
        )

    T_tr = trace.duration
    p0, p1, q0, q1 = _heading_coefficients(
        sign * xi.rho_0, sign * xi.delta_rho, xi.T, v_x, gains.t_lp
    )
    n_out_max = 2 * (len(trace) - 1) - ti
    states, deactivated = integrate_closed_loop(
        A_c,
        B_c,
        x0,
        t_s,
        trace.ts / substeps,
        substeps,
        n_out_max,
        p0,
        p1,
        q0,
        q1,
        T_tr,
        gains.deact_offset,
        gains.deact_rate,
    )
    n_sim = states.shape[0]
    t_sim = t_s + np.arange(n_sim) * trace.ts
    dpsil = q0 + q1 * np.minimum(t_sim, T_tr)
    steer_sim = gains.k_y * states[:, 0] + gains.k_psi * (states[:, 2] + dpsil)

    t = np.arange(ti + n_sim) * trace.ts
    y = np.concatenate([yw[:ti], states[:, 0] - params.edge_margin])
    steer = np.concatenate([np.zeros(ti), steer_sim])
    active = np.concatenate([np.zeros(ti, dtype=bool), np.ones(n_sim, dtype=bool)])
    return ControlledTrajectory(
        ts=trace.ts,
        t=t,
        y=sign * y,
        steer=sign * steer,
        active=active,
        side=trace.side,
        trigger_time=t_s,
        deactivated=bool(deactivated),
        final_state=states[-1].copy(),
    )


def load_vehicle_config(
    path: str | Path | None,
    overrides: dict[str, float] | None = None,
) -> tuple[VehicleParams, ControllerGains, float]:
    """Load vehicle and controller settings from a JSON config file.

    Recognized keys: c_alpha_f, c_alpha_r, l_f, l_r, i_z, m, w_l, w_v,
    t_lp, k_y, k_psi, y_s, ts (plus the optional deactivation bands
    deact_offset and deact_rate).  Missing keys fall back to defaults;
    ``overrides`` take precedence over file values.

    :returns: (params, gains, ts).
    """
    values: dict[str, float] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise LaneDepError(f"vehicle config file not found: {path}")
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise LaneDepError(f"{path}: invalid JSON ({exc})") from None
        unknown = sorted(set(doc) - set(CONFIG_KEYS))
        if unknown:
            raise LaneDepError(f"{path}: unknown config keys {unknown}")
        values.update({k: float(v) for k, v in doc.items()})
    if overrides:
        unknown = sorted(set(overrides) - set(CONFIG_KEYS))
        if unknown:
            raise LaneDepError(f"unknown config overrides {unknown}")
        values.update({k: float(v) for k, v in overrides.items()})
    params = VehicleParams(**{k: values[k] for k in _VEHICLE_KEYS if k in values})
    gains = ControllerGains(**{k: values[k] for k in _GAIN_KEYS if k in values})
    ts = values.get("ts", 0.1)
    return params, gains, ts
