"""Motion control: unicycle kinematics, waypoint following, vertex servo.

The vertex controller drives a robot onto the apex of an equilateral triangle
using nothing but horizontal pixel coordinates from its rear camera:

1. center the opposite beacon in the image (aligns heading with the outward
   triangle axis),
2. equalize the pixel distances between each base beacon and the opposite
   beacon (nulls lateral offset),
3. drive the common distance to the target disparity d_t (nulls longitudinal
   offset),
4. declare the vertex settled when all three tolerances hold simultaneously.

Because the platform is nonholonomic, step 2 cannot translate sideways
directly: it executes a bounded S-arc (tilt into the error while rolling,
tilt back, re-center). Arcs run open-loop mid-chunk by necessity - the field
of view is so tight (half-width 33.4 deg against beacons at +-30 deg when
settled) that any tilt beyond ~3 deg momentarily hides a side beacon. This
arc quantization, together with pixel quantization, is what leaves the
settled pose with a lateral-dominant residual error, mirroring how a real
camera-guided differential-drive robot behaves.

``building_triangle_step`` is the pure decision law (identical observations
in, identical command out); the multi-tick arc execution and phase sequencing
live in ``run_vertex_maneuver``, which delegates the tick loop to the active
engine kernel (compiled or pure Python).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import engine
from .engine import layout
from .errors import ControllerTimeout
from .geometry import Point, Pose2D, normalize_angle
from .noise import WssParams
from .vision import CameraConfig, LateralDistances, PixelObservation


@dataclass(frozen=True)
class UnicycleState:
    """Pose plus the wheel radius that maps commanded wheel speed to ground speed."""

    pose: Pose2D
    wheel_radius: float = 0.148


@dataclass(frozen=True)
class WheelCommand:
    """Body-frame velocity command: forward speed (m/s) and yaw rate (rad/s)."""

    v: float
    omega: float


class Phase(IntEnum):
    APPROACHING = 0
    INNER_TRIANGLE = 1
    BUILDING_TRIANGLE = 2
    SETTLED = 3


@dataclass
class ControllerPhase:
    """Current maneuver phase plus per-phase sub-state."""

    phase: Phase = Phase.APPROACHING
    waypoint_index: int = 0
    chunk_stage: int = 0  # 0 none, 1 arc out, 2 arc back, 3 re-center


class _SettledType:
    """Singleton sentinel returned by the vertex decision law on completion."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:  # pragma: no cover
        return "SETTLED"


SETTLED = _SettledType()

#: reference wheel speed at which omega_max applies (rad/s)
OMEGA_WHEEL_REF = 5.8


def nominal_speed(omega_wheel: float, wss: WssParams = WssParams()) -> float:
    """Ground speed for a commanded wheel speed: (R + eps) * (1 + SF) * Omega."""
    return (wss.wheel_radius + wss.radius_bias) * (1.0 + wss.scale_factor) * omega_wheel


@dataclass(frozen=True)
class ControllerGains:
    """Waypoint-following gains.

    omega_max scales with the commanded wheel speed (a differential drive's
    yaw rate is bounded by wheel speed), so halving the wheel speed dilates
    the whole trajectory in time instead of only the straight legs.
    """

    v_nom: float = nominal_speed(OMEGA_WHEEL_REF)
    k_omega: float = 4.0
    omega_max: float = 1.5
    capture_radius: float = 0.05
    slow_angle: float = math.pi / 4.0

    @classmethod
    def for_wheel_speed(cls, omega_wheel: float, wss: WssParams = WssParams(), **kw):
        scale = omega_wheel / OMEGA_WHEEL_REF
        return cls(
            v_nom=nominal_speed(omega_wheel, wss), omega_max=1.5 * scale, **kw
        )


@dataclass(frozen=True)
class VertexControllerConfig:
    """Gains, tolerances and chunk sizing for the vertex servo."""

    camera: CameraConfig = field(default_factory=CameraConfig)
    d_t: float = 280.0
    tol_eq_px: float = 2.0
    tol_center_px: float = 3.0
    coarse_center_px: float = 60.0
    k_center: float = 0.02  # rad/s per px
    k_range: float = 0.004  # m/s per px
    v_slow: float = 0.25
    turn_rate: float = 1.0
    v_chunk: float = 0.25
    chunk_delta_per_px: float = 0.05  # rad of tilt per px of disparity imbalance
    chunk_delta_min: float = 0.06
    chunk_delta_max: float = 0.35
    omega_search: float = 0.8
    control_period_s: float = 0.1
    t_max_s: float = 120.0

    def recenter_exit_px(self) -> float:
        # quantized pixels cannot resolve below 1 px; unquantized runs may
        # polish the center column much tighter so tight disparity tolerances
        # remain reachable (a heading offset leaks into the disparities).
        if self.camera.quantize:
            return 1.0
        return min(1.0, 0.5 * self.tol_eq_px)


def clamp(x: float, lo: float, hi: float) -> float:
    if x > hi:
        return hi
    if x < lo:
        return lo
    return x


def step_unicycle(pose: Pose2D, cmd: WheelCommand, dt: float) -> Pose2D:
    """Forward-Euler unicycle step: translate along the current heading, then yaw.

    The displacement is exactly parallel to the pre-step heading (no side
    slip); the heading is normalized to (-pi, pi] afterwards.
    """
    return Pose2D(
        pose.x + cmd.v * math.cos(pose.heading) * dt,
        pose.y + cmd.v * math.sin(pose.heading) * dt,
        normalize_angle(pose.heading + cmd.omega * dt),
    )


def waypoint_follow(pose: Pose2D, waypoint: Point, gains: ControllerGains) -> WheelCommand:
    """Proportional bearing controller toward a waypoint.

    Full speed when roughly aligned; speed scales with cos(error) beyond
    slow_angle; zero command inside the capture radius.
    """
    dx = waypoint[0] - pose.x
    dy = waypoint[1] - pose.y
    if math.hypot(dx, dy) <= gains.capture_radius:
        return WheelCommand(0.0, 0.0)
    err = normalize_angle(math.atan2(dy, dx) - pose.heading)
    omega = clamp(gains.k_omega * err, -gains.omega_max, gains.omega_max)
    if abs(err) <= gains.slow_angle:
        v = gains.v_nom
    else:
        v = gains.v_nom * max(0.0, math.cos(err))
    return WheelCommand(v, omega)


def building_triangle_step(
    distances: LateralDistances,
    center_obs: PixelObservation,
    config: VertexControllerConfig,
) -> WheelCommand | _SettledType:
    """Pure decision law of the vertex servo (one control instant).

    ``distances.d_m1`` is the pixel distance of the image-left base marker
    from the center marker, ``d_m2`` the image-right one. In the rear view a
    marker with a larger column lies toward the robot's right.

    Priority ladder: recover sight of the center marker, coarse-center it,
    equalize the two disparities (initiating a lateral S-arc toward the
    larger-disparity side), drive the disparity magnitude to d_t, fine-center,
    and finally report SETTLED when every tolerance holds at once.
    """
    if not center_obs.visible:
        return WheelCommand(0.0, config.omega_search)
    e_c = center_obs.u - config.camera.principal_u  # type: ignore[operator]
    d1 = distances.d_m1
    d2 = distances.d_m2
    d_t = distances.d_t
    if abs(e_c) > config.coarse_center_px:
        return WheelCommand(
            0.0, clamp(config.k_center * e_c, -config.turn_rate, config.turn_rate)
        )
    if abs(d1 - d2) > config.tol_eq_px:
        e_eq = abs(d1 - d2)
        v_sign = 1.0 if 0.5 * (d1 + d2) >= d_t else -1.0
        dir_left = d1 > d2
        omega_sign = (1.0 if dir_left else -1.0) * v_sign
        return WheelCommand(v_sign * config.v_chunk, omega_sign * config.turn_rate)
    if max(abs(d1 - d_t), abs(d2 - d_t)) > config.tol_eq_px:
        s = 0.5 * (d1 + d2) - d_t
        v = clamp(config.k_range * s, -config.v_slow, config.v_slow)
        omega = clamp(
            config.k_center * e_c, -0.5 * config.turn_rate, 0.5 * config.turn_rate
        )
        return WheelCommand(v, omega)
    if abs(e_c) > config.tol_center_px:
        return WheelCommand(
            0.0, clamp(config.k_center * e_c, -config.turn_rate, config.turn_rate)
        )
    return SETTLED


@dataclass
class ManeuverResult:
    """Outcome of one vertex maneuver."""

    final_pose: Pose2D
    settle_time: float
    trajectory: np.ndarray  # rows of (t, x, y, heading, phase), decimated
    ticks: int


def run_vertex_maneuver(
    start_pose: Pose2D,
    beacons: tuple[Point, Point, Point],
    path: list[Point],
    config: VertexControllerConfig,
    gains: ControllerGains,
    dt: float = 0.01,
    seed: int | None = None,
    record_trajectory: bool = False,
) -> ManeuverResult:
    """Execute one full vertex maneuver and return the settled pose.

    Args:
        start_pose: mover pose at maneuver start.
        beacons: (base1, base2, opposite) beacon positions; the target vertex
            is the apex over base1-base2 away from the opposite beacon.
        path: transit waypoints ending at the target vertex (the planner's
            inner path). The vertex servo takes over on the final leg as soon
            as all three beacons appear in the rear image.
        config: vertex servo configuration.
        gains: waypoint-following gains for the transit legs.
        dt: physics step (s).
        seed: optional start-pose jitter seed (2 cm / 0.05 rad), modelling
            trial-to-trial variation.
        record_trajectory: keep a decimated (t, x, y, heading, phase) log.

    Raises:
        ControllerTimeout: the servo did not settle within config.t_max_s.
    """
    pose = start_pose
    if seed is not None:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        pose = Pose2D(
            pose.x + 0.02 * rng.standard_normal(),
            pose.y + 0.02 * rng.standard_normal(),
            normalize_angle(pose.heading + 0.05 * rng.standard_normal()),
        )

    (b1, b2, b3) = beacons
    state0 = np.array([pose.x, pose.y, pose.heading], dtype=np.float64)
    beacon_arr = np.array(
        [b1[0], b1[1], b2[0], b2[1], b3[0], b3[1]], dtype=np.float64
    )
    path_x = np.array([p[0] for p in path], dtype=np.float64)
    path_y = np.array([p[1] for p in path], dtype=np.float64)

    control_ticks = max(1, int(round(config.control_period_s / dt)))
    max_ticks = int(round(config.t_max_s / dt))
    stride = control_ticks if record_trajectory else 0

    params = np.zeros(layout.MP_COUNT, dtype=np.float64)
    cam = config.camera
    params[layout.MP_FOCAL] = cam.focal_px
    params[layout.MP_PRINCIPAL] = cam.principal_u
    params[layout.MP_WIDTH] = float(cam.image_width)
    params[layout.MP_MAXRANGE] = cam.max_range
    params[layout.MP_QUANTIZE] = 1.0 if cam.quantize else 0.0
    params[layout.MP_TARGET_D] = config.d_t
    params[layout.MP_TOL_EQ] = config.tol_eq_px
    params[layout.MP_TOL_CENTER] = config.tol_center_px
    params[layout.MP_COARSE] = config.coarse_center_px
    params[layout.MP_K_CENTER] = config.k_center
    params[layout.MP_K_RANGE] = config.k_range
    params[layout.MP_V_SLOW] = config.v_slow
    params[layout.MP_TURN_RATE] = config.turn_rate
    params[layout.MP_V_CHUNK] = config.v_chunk
    params[layout.MP_DELTA_PER_PX] = config.chunk_delta_per_px
    params[layout.MP_DELTA_MIN] = config.chunk_delta_min
    params[layout.MP_DELTA_MAX] = config.chunk_delta_max
    params[layout.MP_OMEGA_SEARCH] = config.omega_search
    params[layout.MP_RECENTER_EXIT] = config.recenter_exit_px()
    params[layout.MP_V_NOM] = gains.v_nom
    params[layout.MP_K_OMEGA] = gains.k_omega
    params[layout.MP_OMEGA_MAX] = gains.omega_max
    params[layout.MP_CAPTURE] = gains.capture_radius
    params[layout.MP_SLOW_ANGLE] = gains.slow_angle
    params[layout.MP_DT] = dt
    params[layout.MP_CONTROL_TICKS] = float(control_ticks)
    params[layout.MP_MAX_TICKS] = float(max_ticks)
    params[layout.MP_TRAJ_STRIDE] = float(stride)

    n_rows = (max_ticks // stride + 2) if stride else 0
    traj = np.zeros(n_rows * 5, dtype=np.float64)

    status, xf, yf, thf, ticks, nrec = engine.maneuver_rollout(
        state0, beacon_arr, path_x, path_y, params, traj
    )
    if status != 0:
        raise ControllerTimeout(
            f"vertex servo did not settle within {config.t_max_s:.0f} s "
            f"(beacons at {beacons})"
        )
    trajectory = traj[: nrec * 5].reshape(nrec, 5) if stride else np.zeros((0, 5))
    return ManeuverResult(
        final_pose=Pose2D(xf, yf, thf),
        settle_time=ticks * dt,
        trajectory=trajectory,
        ticks=ticks,
    )
