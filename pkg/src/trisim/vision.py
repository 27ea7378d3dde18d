"""Synthetic monocular camera: 1-D horizontal projection of point markers.

The vertex controller only consumes horizontal pixel coordinates, so the
camera model is deliberately one-dimensional: a pinhole projecting a world
point onto an image column

    u = principal_u + focal_px * X / Z

where Z is the target's depth along the optical axis and X its lateral offset
measured toward the *left* of the viewing direction (the image reads like a
mirror, which is the natural presentation for a rear-view camera). A marker is
visible iff it lies strictly in front of the camera, within max_range, and its
column lands inside the image.

Pixel quantization (floor(u + 0.5), i.e. half-up rounding) is the only
measurement noise this camera has, and it is the mechanism that puts a floor
under the controller's longitudinal precision. It can be disabled per config
for calibration experiments.

The default focal length couples to the default target disparity: a robot
sitting on the apex of an equilateral triangle sees the two base markers
+-30 degrees off-axis, so focal_px = d_t / tan(30deg) makes the settled
disparity exactly d_t (280 px) inside a 640 px image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import VisibilityError
from .geometry import Point, Pose2D

#: settled lateral pixel distance for the default camera (pixels)
DEFAULT_TARGET_DISPARITY = 280.0
#: focal length coupling: d_t / tan(30 deg) = d_t * sqrt(3)
DEFAULT_FOCAL_PX = DEFAULT_TARGET_DISPARITY * math.sqrt(3.0)


@dataclass(frozen=True)
class CameraConfig:
    focal_px: float = DEFAULT_FOCAL_PX
    image_width: int = 640
    principal_u: float = 320.0
    max_range: float = 10.0
    mount: str = "rear"  # "front" or "rear" (optical axis along -heading)
    quantize: bool = True


@dataclass(frozen=True)
class PixelObservation:
    """Horizontal image coordinate of one marker. u is None when not visible."""

    u: float | None
    visible: bool


@dataclass(frozen=True)
class LateralDistances:
    """Pixel distances from the two side markers to the center marker."""

    d_m1: float
    d_m2: float
    d_t: float


def camera_for_target_disparity(d_t: float, **overrides) -> CameraConfig:
    """CameraConfig whose focal length makes the settled disparity equal d_t."""
    return CameraConfig(focal_px=d_t * math.sqrt(3.0), **overrides)


def project_marker(
    camera_pose: Pose2D, config: CameraConfig, target: Point
) -> PixelObservation:
    """Project a world point into the camera's image row.

    Args:
        camera_pose: pose of the robot carrying the camera.
        config: intrinsics, mount side, and quantization flag.
        target: world point of the marker.

    Returns:
        PixelObservation with the (possibly quantized) column, or an
        invisible observation when the marker is behind the camera, beyond
        max_range, or outside the image.
    """
    view = camera_pose.heading if config.mount == "front" else camera_pose.heading + math.pi
    cv = math.cos(view)
    sv = math.sin(view)
    dx = target[0] - camera_pose.x
    dy = target[1] - camera_pose.y
    depth = cv * dx + sv * dy
    if depth <= 0.0 or depth > config.max_range:
        return PixelObservation(None, False)
    lateral = -sv * dx + cv * dy
    u = config.principal_u + config.focal_px * lateral / depth
    if config.quantize:
        u = math.floor(u + 0.5)
    if u < 0.0 or u >= config.image_width:
        return PixelObservation(None, False)
    return PixelObservation(float(u), True)


def lateral_distances(
    center: PixelObservation,
    left: PixelObservation,
    right: PixelObservation,
    d_t: float = DEFAULT_TARGET_DISPARITY,
) -> LateralDistances:
    """Pixel-count distances from each side marker to the center marker.

    Raises:
        VisibilityError: if any of the three markers is not visible.
    """
    if not (center.visible and left.visible and right.visible):
        missing = [
            name
            for name, obs in (("center", center), ("left", left), ("right", right))
            if not obs.visible
        ]
        raise VisibilityError(f"markers not visible: {', '.join(missing)}")
    return LateralDistances(
        d_m1=abs(left.u - center.u),  # type: ignore[operator]
        d_m2=abs(right.u - center.u),  # type: ignore[operator]
        d_t=d_t,
    )


def observe_beacons(
    pose: Pose2D,
    beacon1: Point,
    beacon2: Point,
    beacon3: Point,
    config: CameraConfig,
) -> tuple[PixelObservation, PixelObservation, PixelObservation]:
    """Project the two base beacons and the opposite (center) beacon."""
    return (
        project_marker(pose, config, beacon1),
        project_marker(pose, config, beacon2),
        project_marker(pose, config, beacon3),
    )
