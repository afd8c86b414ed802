"""Paint programs, trapezoidal time parameterization, simulated execution.

A PaintProgram is the command script for one painting: dip the brush, hover
to a stroke start, lower, draw the stroke, raise, re-dip on the configured
budget. Parameterization gives every linear leg its own rest-to-rest
trapezoidal (or triangular) speed profile, so the geometric path is exactly
the commanded polyline and the kinematic limits hold leg by leg.

Conventions: the canvas normal is the world z axis and the robot works the
low-z side, so hover points sit z_hover below the plane depth; the brush
approaches the cup from above along y (vertical).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .canvas import CanvasPose, MetricStrokeSet, Vec3, canvas_to_pixels
from .errors import OutOfWorkspace


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned reachable box plus the known paint cup position."""

    min_corner: Vec3
    max_corner: Vec3
    cup: Vec3

    def __post_init__(self):
        if not self.contains(self.cup):
            raise OutOfWorkspace(f"cup {self.cup} outside bounds")

    def contains(self, point) -> bool:
        return all(self.min_corner[i] <= point[i] <= self.max_corner[i]
                   for i in range(3))

    @property
    def bounds(self) -> tuple[Vec3, Vec3]:
        return (self.min_corner, self.max_corner)


@dataclass(frozen=True)
class DipAt:
    point: Vec3  # cup position


@dataclass(frozen=True)
class HoverTo:
    point: Vec3  # hover point above the next stroke start


@dataclass(frozen=True)
class Lower:
    point: Vec3  # stroke start, on the canvas plane


@dataclass(frozen=True)
class StrokeThrough:
    polyline: tuple[Vec3, ...]


@dataclass(frozen=True)
class Raise:
    pass


Command = Union[DipAt, HoverTo, Lower, StrokeThrough, Raise]


@dataclass
class PaintProgram:
    commands: list[Command]
    z_hover: float
    dip_clearance: float

    def dip_count(self) -> int:
        return sum(1 for c in self.commands if isinstance(c, DipAt))


def _hover_point(p: Vec3, z_hover: float) -> Vec3:
    return (p[0], p[1], p[2] - z_hover)


def build_program(strokes: MetricStrokeSet, ws: Workspace,
                  strokes_per_dip: int = 1, z_hover: float = 0.02,
                  dip_clearance: float = 0.05) -> PaintProgram:
    """Expand ordered metric strokes into the dip/hover/stroke script.

    Every stroke gets hover-lower-stroke-raise; a dip precedes stroke 0 and
    recurs every strokes_per_dip strokes. All stroke points, hover points,
    and the cup approach must be inside the workspace.
    """
    if strokes_per_dip < 1:
        raise ValueError("strokes_per_dip must be >= 1")
    if z_hover <= 0 or dip_clearance <= 0:
        raise ValueError("z_hover and dip_clearance must be > 0")
    above_cup = (ws.cup[0], ws.cup[1] + dip_clearance, ws.cup[2])
    if not ws.contains(above_cup):
        raise OutOfWorkspace(f"cup approach {above_cup} outside bounds")
    commands: list[Command] = []
    for i, stroke in enumerate(strokes.strokes):
        pts = [tuple(map(float, p)) for p in np.asarray(stroke)]
        if not pts:
            continue
        for p in pts:
            if not ws.contains(p):
                raise OutOfWorkspace(f"stroke point {p} outside bounds")
        for endpoint in (pts[0], pts[-1]):
            hover = _hover_point(endpoint, z_hover)
            if not ws.contains(hover):
                raise OutOfWorkspace(f"hover point {hover} outside bounds")
        if i % strokes_per_dip == 0:
            commands.append(DipAt(ws.cup))
        commands.append(HoverTo(_hover_point(pts[0], z_hover)))
        commands.append(Lower(pts[0]))
        commands.append(StrokeThrough(tuple(pts)))
        commands.append(Raise())
    return PaintProgram(commands=commands, z_hover=z_hover,
                        dip_clearance=dip_clearance)


@dataclass(frozen=True)
class Leg:
    """One rest-to-rest linear move; p0 -> p1 over [t0, t1]."""

    t0: float
    t1: float
    p0: Vec3
    p1: Vec3
    pen_down: bool


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray  # (n, 3)
    pen: np.ndarray  # (n,) bool
    v_max: float
    a_max: float
    legs: list[Leg] = field(default_factory=list)

    def duration(self) -> float:
        return float(self.times[-1]) if len(self.times) else 0.0


def segment_duration(length: float, v_max: float, a_max: float) -> float:
    """Closed-form rest-to-rest time over a straight segment."""
    if length <= 0:
        return 0.0
    if length >= v_max * v_max / a_max:
        return length / v_max + v_max / a_max  # trapezoid
    return 2.0 * math.sqrt(length / a_max)  # triangular


def _progress(tau: float, length: float, v_max: float, a_max: float,
              total: float) -> float:
    """Distance traveled at time tau into a rest-to-rest profile."""
    if tau <= 0:
        return 0.0
    if tau >= total:
        return length
    if length >= v_max * v_max / a_max:
        t_acc = v_max / a_max
        if tau < t_acc:
            return 0.5 * a_max * tau * tau
        if tau <= total - t_acc:
            return 0.5 * v_max * t_acc + v_max * (tau - t_acc)
        rem = total - tau
        return length - 0.5 * a_max * rem * rem
    half = total / 2.0
    if tau <= half:
        return 0.5 * a_max * tau * tau
    rem = total - tau
    return length - 0.5 * a_max * rem * rem


def _expand_legs(program: PaintProgram) -> list[tuple[Vec3, Vec3, bool]]:
    """Flatten commands to (start, end, pen_down) linear moves."""
    moves: list[tuple[Vec3, Vec3, bool]] = []
    current: Optional[Vec3] = None

    def goto(target: Vec3, pen: bool) -> None:
        nonlocal current
        if current is None:
            current = target
            return
        if target != current:
            moves.append((current, target, pen))
            current = target

    for cmd in program.commands:
        if isinstance(cmd, DipAt):
            above = (cmd.point[0], cmd.point[1] + program.dip_clearance,
                     cmd.point[2])
            goto(above, False)
            goto(cmd.point, False)
            goto(above, False)
        elif isinstance(cmd, (HoverTo, Lower)):
            goto(cmd.point, False)
        elif isinstance(cmd, StrokeThrough):
            before = len(moves)
            for p in cmd.polyline:
                goto(p, True)
            if len(moves) == before and current is not None:
                # Single-point stroke: a zero-length contact leg marks the
                # dot so it still paints and survives pen fidelity checks.
                moves.append((current, current, True))
        elif isinstance(cmd, Raise):
            if current is not None:
                goto(_hover_point(current, program.z_hover), False)
    return moves


def time_parameterize(program: PaintProgram, v_max: float, a_max: float,
                      sample_dt: float) -> Trajectory:
    """Timestamp the program with per-leg trapezoidal speed profiles.

    Waypoints are sampled every sample_dt within each leg plus the exact
    leg endpoints; pen_down marks instants of brush contact, so both
    endpoints of a stroke leg are contact samples. The total duration is
    the sum of per-leg closed forms by construction.
    """
    if v_max <= 0 or a_max <= 0 or sample_dt <= 0:
        raise ValueError("v_max, a_max, sample_dt must be > 0")
    moves = _expand_legs(program)
    times: list[float] = []
    points: list[Vec3] = []
    pen_flags: list[bool] = []
    legs: list[Leg] = []
    t = 0.0

    def emit(time_s: float, point: Vec3, pen: bool) -> None:
        times.append(time_s)
        points.append(point)
        pen_flags.append(pen)

    for p0, p1, pen in moves:
        vec = np.asarray(p1, dtype=np.float64) - np.asarray(p0)
        length = float(np.linalg.norm(vec))
        if length == 0.0:
            if pen:  # dot contact: no time passes, the brush touches once
                if not times:
                    emit(0.0, p0, True)
                else:
                    pen_flags[-1] = True
                legs.append(Leg(t0=t, t1=t, p0=p0, p1=p1, pen_down=True))
            continue
        total = segment_duration(length, v_max, a_max)
        if not times:
            emit(0.0, p0, pen)
        elif pen and not pen_flags[-1]:
            pen_flags[-1] = True  # contact begins at this shared waypoint
        direction = vec / length
        k = 1
        while True:
            tau = k * sample_dt
            if tau >= total or total - tau <= sample_dt * 1e-6:
                break
            dist = _progress(tau, length, v_max, a_max, total)
            emit(t + tau, tuple(np.asarray(p0) + direction * dist), pen)
            k += 1
        emit(t + total, p1, pen)
        legs.append(Leg(t0=t, t1=t + total, p0=p0, p1=p1, pen_down=pen))
        t += total

    return Trajectory(times=np.asarray(times, dtype=np.float64),
                      points=np.asarray(points, dtype=np.float64).reshape(
                          -1, 3),
                      pen=np.asarray(pen_flags, dtype=bool),
                      v_max=v_max, a_max=a_max, legs=legs)


def bresenham_line(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Integer 8-connected line from (x0, y0) to (x1, y1), inclusive."""
    points = []
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            return points
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy


def dilate_disk(bits: np.ndarray, radius: int) -> np.ndarray:
    """Morphological dilation by a Euclidean disk of integer radius."""
    if radius <= 0:
        return bits.copy()
    h, w = bits.shape
    out = np.zeros_like(bits)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy > radius * radius:
                continue
            ys0, ys1 = max(0, dy), min(h, h + dy)
            xs0, xs1 = max(0, dx), min(w, w + dx)
            out[ys0:ys1, xs0:xs1] |= bits[max(0, -dy):h - max(0, dy),
                                          max(0, -dx):w - max(0, dx)]
    return out


def simulate_execution(traj: Trajectory, pose: CanvasPose,
                       brush_radius_px: int, image_width: int,
                       image_height: int) -> np.ndarray:
    """Rasterize the pen-down path back into image space.

    Each pen-down leg (or, lacking leg records, each consecutive pen-down
    waypoint pair) is projected to pixels, drawn as an 8-connected line,
    and the union is dilated by the brush disk.
    """
    if traj.legs:
        segments = [(leg.p0, leg.p1) for leg in traj.legs if leg.pen_down]
    else:
        segments = [(traj.points[i], traj.points[i + 1])
                    for i in range(len(traj.points) - 1)
                    if traj.pen[i] and traj.pen[i + 1]]
    bits = np.zeros((image_height, image_width), dtype=bool)
    for p0, p1 in segments:
        px = canvas_to_pixels(np.asarray([p0, p1]), image_width,
                              image_height, pose)
        x0, y0 = int(round(px[0, 0])), int(round(px[0, 1]))
        x1, y1 = int(round(px[1, 0])), int(round(px[1, 1]))
        for x, y in bresenham_line(x0, y0, x1, y1):
            if 0 <= y < image_height and 0 <= x < image_width:
                bits[y, x] = True
    return dilate_disk(bits, brush_radius_px)


def trajectory_to_text(traj: Trajectory) -> str:
    """Newline-delimited (t, x, y, z, pen) records, 9-decimal fixed point."""
    lines = []
    for t, (x, y, z), pen in zip(traj.times, traj.points, traj.pen):
        lines.append(f"{t:.9f}\t{x:.9f}\t{y:.9f}\t{z:.9f}\t{int(pen)}")
    return "\n".join(lines) + "\n"


def trajectory_from_text(text: str, v_max: float = 0.0,
                         a_max: float = 0.0) -> Trajectory:
    times, points, pens = [], [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        t, x, y, z, pen = line.split("\t")
        times.append(float(t))
        points.append((float(x), float(y), float(z)))
        pens.append(bool(int(pen)))
    return Trajectory(times=np.asarray(times), points=np.asarray(points),
                      pen=np.asarray(pens, dtype=bool),
                      v_max=v_max, a_max=a_max, legs=[])
