"""Planar geometry for triangular-lattice formations.

World frame: +x east, +y north, headings in radians measured counterclockwise
from +x and normalized to (-pi, pi]. A formation occupies vertices of a
triangular lattice with side length L; moving one robot onto the apex of a
base formed by two stationary robots advances the formation by half a lattice
spacing per step.

All functions here are pure and operate on plain tuples, so they are safe to
call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import GeometryError

Point = tuple[float, float]

#: default tolerance for exact-geometry assertions (meters)
TOL_GEOM = 1e-9
#: tolerance for treating measured robot positions as a valid formation (meters)
TOL_FORM = 0.1

_TWO_PI = 2.0 * math.pi
_SQRT3_2 = math.sqrt(3.0) / 2.0


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = a - _TWO_PI * math.floor((a + math.pi) / _TWO_PI)
    if w <= -math.pi:
        w += _TWO_PI
    return w


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position plus heading (radians, CCW from +x)."""

    x: float
    y: float
    heading: float = 0.0

    @property
    def position(self) -> Point:
        return (self.x, self.y)


def dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _rot90(v: Point) -> Point:
    """Rotate a vector +90 degrees (CCW)."""
    return (-v[1], v[0])


@dataclass(frozen=True)
class Triangle:
    """Three vertices, in order. Equilaterality is checked on demand, not construction."""

    vertices: tuple[Point, Point, Point]

    def side_lengths(self) -> tuple[float, float, float]:
        a, b, c = self.vertices
        return (dist(a, b), dist(b, c), dist(c, a))

    def is_equilateral(self, side: float | None = None, tol: float = TOL_FORM) -> bool:
        lengths = self.side_lengths()
        ref = side if side is not None else sum(lengths) / 3.0
        return all(abs(l - ref) <= tol for l in lengths)

    def centroid(self) -> Point:
        a, b, c = self.vertices
        return ((a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0)


def third_vertex(a: Point, b: Point, side: str = "left") -> Point:
    """Apex completing an equilateral triangle on the base a->b.

    Args:
        a, b: base endpoints.
        side: "left" or "right" of the directed base a->b.

    Returns:
        The apex point, at |b - a| from both endpoints.

    Raises:
        GeometryError: if the base is degenerate or side is unknown.
    """
    base = _sub(b, a)
    norm = math.hypot(base[0], base[1])
    if norm <= TOL_GEOM:
        raise GeometryError("degenerate base: endpoints coincide")
    if side == "left":
        off = _rot90(base)
    elif side == "right":
        off = (base[1], -base[0])
    else:
        raise GeometryError(f"unknown side {side!r} (expected 'left' or 'right')")
    mx = (a[0] + b[0]) / 2.0
    my = (a[1] + b[1]) / 2.0
    return (mx + _SQRT3_2 * off[0], my + _SQRT3_2 * off[1])


def apex_away_from(a: Point, b: Point, opposite: Point) -> Point:
    """Apex on the base a->b lying on the far side from `opposite`.

    This is the geometric core of a formation step: the new vertex mirrors the
    opposite beacon across the base line.
    """
    left = third_vertex(a, b, "left")
    right = third_vertex(a, b, "right")
    return left if dist(left, opposite) >= dist(right, opposite) else right


@dataclass(frozen=True)
class TriangleFrame:
    """Local frame of a triangle under construction.

    Origin sits at the base midpoint; +lon points from the base toward the
    apex (the direction the mover faces when settled); +lat runs along the
    base from the first endpoint to the second. The two axes are orthonormal.
    """

    origin: Point
    lat_axis: Point
    lon_axis: Point

    @classmethod
    def from_base(cls, a: Point, b: Point, apex: Point) -> "TriangleFrame":
        base = _sub(b, a)
        norm = math.hypot(base[0], base[1])
        if norm <= TOL_GEOM:
            raise GeometryError("degenerate base: endpoints coincide")
        lat = (base[0] / norm, base[1] / norm)
        origin = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
        lon = _rot90(lat)
        # flip +lon onto the apex side
        toward = _sub(apex, origin)
        if lon[0] * toward[0] + lon[1] * toward[1] < 0.0:
            lon = (-lon[0], -lon[1])
        return cls(origin, lat, lon)

    def to_frame(self, p: Point) -> tuple[float, float]:
        """World point -> (lat, lon) coordinates."""
        d = _sub(p, self.origin)
        return (
            d[0] * self.lat_axis[0] + d[1] * self.lat_axis[1],
            d[0] * self.lon_axis[0] + d[1] * self.lon_axis[1],
        )

    def from_frame(self, lat: float, lon: float) -> Point:
        """(lat, lon) coordinates -> world point."""
        return (
            self.origin[0] + lat * self.lat_axis[0] + lon * self.lon_axis[0],
            self.origin[1] + lat * self.lat_axis[1] + lon * self.lon_axis[1],
        )


_DIRECTIONS: dict[str, Point] = {
    "right": (1.0, 0.0),
    "left": (-1.0, 0.0),
    "up": (0.0, 1.0),
    "down": (0.0, -1.0),
}


def ideal_vertex_lattice(
    start: Triangle | Sequence[Point],
    steps: Iterable[tuple[int, str | Point]],
) -> list[Point]:
    """Advance an ideal (error-free) marching triangle and return new vertices.

    Each step relocates one vertex of the current triangle onto an apex built
    on the base of the two stationary vertices, choosing the apex whose
    displacement from the mover's old position best aligns with the requested
    direction.

    Args:
        start: the initial triangle (or 3 points).
        steps: iterable of (mover_index, direction); mover_index indexes the
            *current* triangle (0..2), direction is one of "left"/"right"/
            "up"/"down" or an (dx, dy) vector.

    Returns:
        The per-step list of newly created vertices.

    Raises:
        GeometryError: bad mover index, or no apex lies in the requested
            direction (unreachable step).
    """
    if isinstance(start, Triangle):
        pos = list(start.vertices)
    else:
        pos = [tuple(p) for p in start]
    if len(pos) != 3:
        raise GeometryError("marching lattice needs exactly 3 vertices")

    created: list[Point] = []
    for mover, direction in steps:
        if not 0 <= mover <= 2:
            raise GeometryError(f"mover index {mover} out of range 0..2")
        if isinstance(direction, str):
            try:
                d = _DIRECTIONS[direction]
            except KeyError:
                raise GeometryError(f"unknown direction {direction!r}") from None
        else:
            dn = math.hypot(direction[0], direction[1])
            if dn <= TOL_GEOM:
                raise GeometryError("zero-length direction vector")
            d = (direction[0] / dn, direction[1] / dn)

        old = pos[mover]
        stay = [pos[i] for i in range(3) if i != mover]
        best: Point | None = None
        best_score = 0.0
        for side in ("left", "right"):
            apex = third_vertex(stay[0], stay[1], side)
            if any(dist(apex, p) <= TOL_FORM for p in pos):
                continue  # occupied (or the mover's own spot: not a move)
            disp = _sub(apex, old)
            dn = math.hypot(disp[0], disp[1])
            score = (disp[0] * d[0] + disp[1] * d[1]) / dn
            if score > best_score:
                best_score = score
                best = apex
        if best is None:
            raise GeometryError(
                f"no lattice step in direction {direction!r} for vertex {mover}"
            )
        pos[mover] = best
        created.append(best)
    return created


def snap_formation(
    positions: Sequence[Point], side: float, tol: float = 0.005
) -> list[Point]:
    """Snap near-lattice positions onto the exact triangular lattice.

    Scenario files carry rounded coordinates (e.g. 1.30 for an exact apex
    height of 1.2990381...). This fits a lattice through the first robot,
    oriented by the robot pair whose spacing is closest to `side`, and snaps
    every robot to its nearest lattice point.

    Raises:
        GeometryError: fewer than 2 robots, or a residual exceeds `tol`.
    """
    pts = [tuple(p) for p in positions]
    if len(pts) < 2:
        raise GeometryError("need at least two robots to orient a lattice")

    # orientation from the most side-like pair
    best_pair = None
    best_err = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            err = abs(dist(pts[i], pts[j]) - side)
            if err < best_err:
                best_err = err
                best_pair = (i, j)
    i, j = best_pair  # type: ignore[misc]
    ang = math.atan2(pts[j][1] - pts[i][1], pts[j][0] - pts[i][0])

    e1 = (side * math.cos(ang), side * math.sin(ang))
    e2 = (
        side * math.cos(ang + math.pi / 3.0),
        side * math.sin(ang + math.pi / 3.0),
    )
    det = e1[0] * e2[1] - e1[1] * e2[0]
    anchor = pts[0]

    snapped: list[Point] = []
    for p in pts:
        d = _sub(p, anchor)
        m = (d[0] * e2[1] - d[1] * e2[0]) / det
        n = (-d[0] * e1[1] + d[1] * e1[0]) / det
        mi, ni = round(m), round(n)
        q = (anchor[0] + mi * e1[0] + ni * e2[0], anchor[1] + mi * e1[1] + ni * e2[1])
        if dist(p, q) > tol:
            raise GeometryError(
                f"robot at {p} is {dist(p, q):.4f} m off the lattice (tol {tol})"
            )
        snapped.append(q)
    return snapped
