"""Canvas pose and pixel-to-meter transform tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

from artbot.canvas import (
    CanvasPose,
    PoseConfig,
    canvas_to_pixels,
    pixels_to_canvas,
    pose_provider,
)
from artbot.errors import DegenerateCanvas, OutOfWorkspace
from artbot.strokes import StrokeSet

# Matches the Fig. 1 work area footprint: 2.53 m wide, 2.57 m deep.
WORK_BOUNDS = ((-1.265, 0.0, 0.0), (1.265, 2.0, 2.57))


def base_config(**overrides):
    params = dict(center=(0.0, 1.0, 1.2), yaw=0.0, width=0.5, height=0.4,
                  noise_pos=0.0, noise_yaw=0.0)
    params.update(overrides)
    return PoseConfig(**params)


def test_pose_provider_zero_noise_identity():
    pose = pose_provider(base_config(), WORK_BOUNDS, noise_seed=7)
    assert pose.center == (0.0, 1.0, 1.2)
    assert pose.yaw == 0.0
    assert (pose.width, pose.height) == (0.5, 0.4)


def test_pose_provider_seed_determinism():
    config = base_config(noise_pos=0.02, noise_yaw=0.1)
    a = pose_provider(config, WORK_BOUNDS, noise_seed=123)
    b = pose_provider(config, WORK_BOUNDS, noise_seed=123)
    assert a == b
    c = pose_provider(config, WORK_BOUNDS, noise_seed=124)
    assert a != c


def test_pose_provider_noise_bounded():
    config = base_config(noise_pos=0.02, noise_yaw=0.1)
    for seed in range(40):
        pose = pose_provider(config, WORK_BOUNDS, noise_seed=seed)
        assert abs(pose.center[0] - 0.0) <= 0.02
        assert abs(pose.center[1] - 1.0) <= 0.02
        assert abs(pose.center[2] - 1.2) <= 0.02
        assert abs(pose.yaw - 0.0) <= 0.1


def test_pose_provider_out_of_workspace():
    # Center beyond the 2.53 m lateral extent.
    config = base_config(center=(1.6, 1.0, 1.2))
    with pytest.raises(OutOfWorkspace):
        pose_provider(config, WORK_BOUNDS, noise_seed=0)
    # Center inside but the top corners rise past the workspace ceiling.
    high = base_config(center=(0.0, 1.9, 1.2))
    with pytest.raises(OutOfWorkspace):
        pose_provider(high, WORK_BOUNDS, noise_seed=0)


def square_pose(yaw=0.0, center=(0.0, 1.0, 1.2), side=0.4):
    return CanvasPose(center=center, yaw=yaw, width=side, height=side)


def test_center_pixel_maps_to_canvas_center():
    pose = square_pose()
    metric = pixels_to_canvas(StrokeSet(strokes=[[(50, 50)]]), 100, 100,
                              pose)
    np.testing.assert_allclose(metric.strokes[0][0], (0.0, 1.0, 1.2),
                               atol=1e-12)


def test_corner_pixel_maps_to_canvas_corner():
    pose = square_pose()
    metric = pixels_to_canvas(StrokeSet(strokes=[[(0, 0)]]), 100, 100,
                              pose)
    # Pixel (0,0) is the top-left: -x and +y of center, depth fixed.
    np.testing.assert_allclose(metric.strokes[0][0], (-0.2, 1.2, 1.2),
                               atol=1e-12)


def test_yaw_quarter_turn_rotation():
    # Hand-computed: u=(px-w/2)*s, v=(h/2-py)*s; at yaw pi/2
    # x = cx - v, y = cy + u.
    pose = square_pose(yaw=math.pi / 2)
    s = 0.4 / 100
    cases = [((60, 50), (10 * s, 0.0)), ((50, 40), (0.0, 10 * s)),
             ((75, 30), (25 * s, 20 * s))]
    for (px, py), (u, v) in cases:
        metric = pixels_to_canvas(StrokeSet(strokes=[[(px, py)]]),
                                  100, 100, pose)
        np.testing.assert_allclose(metric.strokes[0][0],
                                   (0.0 - v, 1.0 + u, 1.2), atol=1e-12)


def test_round_trip_precision():
    rng = np.random.default_rng(42)
    for trial in range(20):
        pose = CanvasPose(center=(rng.uniform(-0.5, 0.5),
                                  rng.uniform(0.5, 1.5),
                                  rng.uniform(0.8, 1.6)),
                          yaw=rng.uniform(-math.pi, math.pi),
                          width=0.5, height=0.4)
        pixels = [(int(x), int(y))
                  for x, y in zip(rng.integers(0, 512, 50),
                                  rng.integers(0, 384, 50))]
        metric = pixels_to_canvas(StrokeSet(strokes=[pixels]), 512, 384,
                                  pose)
        back = canvas_to_pixels(metric.strokes[0], 512, 384, pose)
        err = np.abs(back - np.asarray(pixels, dtype=float))
        assert err.max() < 1e-6


def test_segment_length_ratio_equals_scale():
    pose = CanvasPose(center=(0.1, 1.0, 1.3), yaw=0.7, width=0.5,
                      height=0.4)
    s = min(0.5 / 512, 0.4 / 384)
    rng = np.random.default_rng(3)
    pts = [(int(x), int(y)) for x, y in zip(rng.integers(0, 512, 40),
                                            rng.integers(0, 384, 40))]
    metric = pixels_to_canvas(StrokeSet(strokes=[pts]), 512, 384, pose)
    world = metric.strokes[0]
    pix = np.asarray(pts, dtype=float)
    for i in range(len(pts) - 1):
        pixel_len = np.linalg.norm(pix[i + 1] - pix[i])
        if pixel_len == 0:
            continue
        metric_len = np.linalg.norm(world[i + 1] - world[i])
        assert abs(metric_len / pixel_len - s) < 1e-9 * s


def test_points_constant_z_and_inside_canvas():
    pose = CanvasPose(center=(0.0, 1.0, 1.2), yaw=0.3, width=0.5,
                      height=0.4)
    rng = np.random.default_rng(9)
    pts = [(int(x), int(y)) for x, y in zip(rng.integers(0, 512, 100),
                                            rng.integers(0, 384, 100))]
    metric = pixels_to_canvas(StrokeSet(strokes=[pts]), 512, 384, pose)
    world = metric.strokes[0]
    assert np.allclose(world[:, 2], 1.2)
    # In-plane offsets never exceed the canvas half-extents.
    dx = world[:, 0] - 0.0
    dy = world[:, 1] - 1.0
    u = np.cos(0.3) * dx + np.sin(0.3) * dy
    v = -np.sin(0.3) * dx + np.cos(0.3) * dy
    assert np.all(np.abs(u) <= 0.25 + 1e-12)
    assert np.all(np.abs(v) <= 0.20 + 1e-12)


def test_metric_strokeset_carries_source():
    pose = square_pose()
    metric = pixels_to_canvas(StrokeSet(strokes=[[(1, 1)]]), 100, 100, pose)
    assert metric.image_width == 100
    assert metric.image_height == 100
    assert metric.pose == pose


def test_degenerate_canvas():
    pose = CanvasPose(center=(0.0, 1.0, 1.2), yaw=0.0, width=0.0,
                      height=0.4)
    with pytest.raises(DegenerateCanvas):
        pixels_to_canvas(StrokeSet(strokes=[[(0, 0)]]), 100, 100, pose)


def test_pixels_outside_image_rejected():
    pose = square_pose()
    with pytest.raises(ValueError):
        pixels_to_canvas(StrokeSet(strokes=[[(100, 5)]]), 100, 100, pose)
    with pytest.raises(ValueError):
        pixels_to_canvas(StrokeSet(strokes=[[(-1, 5)]]), 100, 100, pose)
