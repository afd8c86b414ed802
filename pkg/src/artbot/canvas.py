"""Canvas pose and the pixel-to-world stroke transform.

World frame: x lateral, y vertical (up), z depth toward the canvas. The
canvas is a vertical rectangle at a fixed depth; yaw rotates it about its
own normal (the depth axis), so a posed canvas is an in-plane 2-D rotation
of the upright one and every canvas point shares the center's z. Image
pixels map onto the canvas with uniform scale (aspect preserved), image
center on canvas center, and the image row axis flipped (pixel rows grow
downward, world y grows upward).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCanvas, OutOfWorkspace
from .strokes import StrokeSet

Vec3 = tuple[float, float, float]
Bounds = tuple[Vec3, Vec3]


@dataclass(frozen=True)
class CanvasPose:
    """Placed canvas: center (m), yaw about the normal (rad), size (m)."""

    center: Vec3
    yaw: float
    width: float
    height: float

    def corners(self) -> list[Vec3]:
        """The four canvas corner points in world coordinates."""
        return [_plane_to_world(su * self.width / 2, sv * self.height / 2,
                                self)
                for su, sv in ((-1, -1), (1, -1), (1, 1), (-1, 1))]


@dataclass(frozen=True)
class PoseConfig:
    """Nominal pose plus uniform noise amplitudes for the provider."""

    center: Vec3
    yaw: float
    width: float
    height: float
    noise_pos: float = 0.0
    noise_yaw: float = 0.0


def pose_provider(config: PoseConfig, bounds: Bounds,
                  noise_seed: int = 0) -> CanvasPose:
    """Perturbed canvas pose, validated against the workspace box.

    Noise is uniform in +-noise_pos per axis and +-noise_yaw, drawn from a
    generator seeded with noise_seed, so a fixed seed gives a fixed pose
    and zero amplitudes reproduce the nominal pose exactly. The center and
    all four corners must sit inside `bounds` or OutOfWorkspace is raised.
    """
    rng = random.Random(noise_seed)
    cx, cy, cz = config.center
    if config.noise_pos:
        cx += rng.uniform(-config.noise_pos, config.noise_pos)
        cy += rng.uniform(-config.noise_pos, config.noise_pos)
        cz += rng.uniform(-config.noise_pos, config.noise_pos)
    yaw = config.yaw
    if config.noise_yaw:
        yaw += rng.uniform(-config.noise_yaw, config.noise_yaw)
    pose = CanvasPose(center=(cx, cy, cz), yaw=yaw,
                      width=config.width, height=config.height)
    lo, hi = bounds
    for point in [pose.center] + pose.corners():
        for axis in range(3):
            if not lo[axis] <= point[axis] <= hi[axis]:
                raise OutOfWorkspace(
                    f"canvas point {point} outside workspace {bounds}")
    return pose


def _plane_to_world(u: float, v: float, pose: CanvasPose) -> Vec3:
    """In-plane offsets (u right, v up, meters) to a world point."""
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    cx, cy, cz = pose.center
    return (cx + c * u - s * v, cy + s * u + c * v, cz)


@dataclass
class MetricStrokeSet:
    """Strokes as world-coordinate polylines (meters), one (n, 3) array each.

    Keeps the source image dimensions and pose so points can be projected
    back to pixels.
    """

    strokes: list[np.ndarray] = field(default_factory=list)
    image_width: int = 0
    image_height: int = 0
    pose: CanvasPose | None = None


def _scale(pose: CanvasPose, image_width: int, image_height: int) -> float:
    if pose.width <= 0 or pose.height <= 0:
        raise DegenerateCanvas(f"{pose.width}x{pose.height} m")
    if image_width <= 0 or image_height <= 0:
        raise DegenerateCanvas(f"{image_width}x{image_height} px")
    return min(pose.width / image_width, pose.height / image_height)


def pixels_to_canvas(strokeset: StrokeSet, image_width: int,
                     image_height: int, pose: CanvasPose) -> MetricStrokeSet:
    """Map pixel strokes onto the posed canvas plane.

    Scale is min(canvas_w / image_w, canvas_h / image_h), identical on both
    axes; the image center lands on the canvas center, the image axes are
    rotated by yaw within the plane, and every point gets the plane's
    constant depth. Pixels outside the image raise ValueError.
    """
    s = _scale(pose, image_width, image_height)
    c, sn = math.cos(pose.yaw), math.sin(pose.yaw)
    cx, cy, cz = pose.center
    out = []
    for stroke in strokeset.strokes:
        pts = np.asarray(stroke, dtype=np.float64).reshape(-1, 2)
        if ((pts[:, 0] < 0) | (pts[:, 0] >= image_width)
                | (pts[:, 1] < 0) | (pts[:, 1] >= image_height)).any():
            raise ValueError("stroke pixel outside image dimensions")
        u = (pts[:, 0] - image_width / 2.0) * s
        v = (image_height / 2.0 - pts[:, 1]) * s
        world = np.empty((len(pts), 3), dtype=np.float64)
        world[:, 0] = cx + c * u - sn * v
        world[:, 1] = cy + sn * u + c * v
        world[:, 2] = cz
        out.append(world)
    return MetricStrokeSet(strokes=out, image_width=image_width,
                           image_height=image_height, pose=pose)


def canvas_to_pixels(points: np.ndarray, image_width: int, image_height: int,
                     pose: CanvasPose) -> np.ndarray:
    """Inverse of pixels_to_canvas for (n, 3) world points, exact up to
    floating error; returns (n, 2) float pixel coordinates."""
    s = _scale(pose, image_width, image_height)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    c, sn = math.cos(pose.yaw), math.sin(pose.yaw)
    cx, cy, _ = pose.center
    dx = pts[:, 0] - cx
    dy = pts[:, 1] - cy
    u = c * dx + sn * dy
    v = -sn * dx + c * dy
    px = u / s + image_width / 2.0
    py = image_height / 2.0 - v / s
    return np.stack([px, py], axis=1)
