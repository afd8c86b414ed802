"""Skeletonization, stroke tracing, ordering, and simplification tests."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from glyph_corpus import corpus_rasters
from artbot.errors import NotThin
from artbot.strokes import (
    Skeleton,
    StrokeSet,
    binarize,
    is_thin,
    label_components,
    order_strokes,
    rasterize_strokes,
    simplify,
    skeletonize,
    strokes_from_text,
    strokes_to_svg,
    strokes_to_text,
    trace_strokes,
)


def bits_from_rows(rows):
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


def test_binarize_threshold():
    gray = np.array([[0, 127, 128, 255]], dtype=np.uint8)
    assert binarize(gray).tolist() == [[True, True, False, False]]
    boolean = np.array([[True, False]])
    assert binarize(boolean).tolist() == [[True, False]]


def test_label_components():
    bits = bits_from_rows([
        "##..#",
        "##..#",
        ".....",
        "#....",
    ])
    count, labels = label_components(bits)
    assert count == 3
    assert labels[0, 0] == labels[1, 1]  # 8-connected block
    assert labels[0, 4] != labels[0, 0]


def test_skeletonize_filled_rectangle():
    bits = np.zeros((30, 50), dtype=bool)
    bits[5:25, 5:45] = True
    skel = skeletonize(bits)
    assert is_thin(skel.bits)
    assert skel.bits.sum() > 0
    assert (skel.bits & ~bits).sum() == 0
    assert label_components(skel.bits)[0] == 1


def test_skeletonize_preserves_isolated_square():
    # The parallel rule alone would erase a lone 2x2 block entirely.
    bits = np.zeros((8, 8), dtype=bool)
    bits[3:5, 3:5] = True
    skel = skeletonize(bits)
    assert skel.bits.sum() >= 1
    assert is_thin(skel.bits)
    assert label_components(skel.bits)[0] == 1


def test_skeletonize_blank_and_single_pixel():
    blank = skeletonize(np.zeros((10, 10), dtype=bool))
    assert blank.bits.sum() == 0
    single = np.zeros((10, 10), dtype=bool)
    single[4, 7] = True
    skel = skeletonize(single)
    assert skel.bits.sum() == 1
    assert skel.bits[4, 7]


def test_skeletonize_corpus_properties():
    checked = 0
    for glyph, bits in corpus_rasters():
        skel = skeletonize(bits)
        assert is_thin(skel.bits), glyph
        assert (skel.bits & ~bits).sum() == 0, glyph
        assert label_components(bits)[0] == label_components(skel.bits)[0], \
            glyph
        again = skeletonize(skel.bits)
        assert np.array_equal(again.bits, skel.bits), glyph
        checked += 1
    assert checked >= 20


def test_trace_round_trip_on_corpus():
    for glyph, bits in corpus_rasters():
        skel = skeletonize(bits)
        traced = trace_strokes(skel)
        back = rasterize_strokes(traced, skel.width, skel.height)
        assert np.array_equal(back, skel.bits), glyph


def test_trace_requires_thin_input():
    fat = np.ones((4, 4), dtype=bool)
    with pytest.raises(NotThin):
        trace_strokes(Skeleton(width=4, height=4, bits=fat))


def test_trace_isolated_pixel():
    bits = np.zeros((5, 5), dtype=bool)
    bits[2, 3] = True
    traced = trace_strokes(Skeleton(width=5, height=5, bits=bits))
    assert traced.strokes == [[(3, 2)]]


def test_trace_straight_line():
    bits = np.zeros((5, 9), dtype=bool)
    bits[2, 1:8] = True
    traced = trace_strokes(Skeleton(width=9, height=5, bits=bits))
    assert len(traced.strokes) == 1
    stroke = traced.strokes[0]
    assert stroke[0] in [(1, 2), (7, 2)]
    assert len(stroke) == 7


def test_trace_cycle_closed():
    # Diamond ring: every pixel has exactly two 8-neighbors.
    bits = bits_from_rows([
        "..#..",
        ".#.#.",
        "#...#",
        ".#.#.",
        "..#..",
    ])
    traced = trace_strokes(Skeleton(width=5, height=5, bits=bits))
    assert len(traced.strokes) == 1
    stroke = traced.strokes[0]
    assert stroke[0] == stroke[-1]
    assert len(stroke) == 9  # 8 ring pixels plus the repeated start


def test_trace_junction_replicated():
    # An X: the center has degree 4; each arm is junction-free.
    bits = bits_from_rows([
        "#...#",
        ".#.#.",
        "..#..",
        ".#.#.",
        "#...#",
    ])
    traced = trace_strokes(Skeleton(width=5, height=5, bits=bits))
    assert len(traced.strokes) == 4
    for stroke in traced.strokes:
        assert (2, 2) in (stroke[0], stroke[-1])
        assert len(stroke) == 3


def travel(strokes, start=(0.0, 0.0)):
    total, cur = 0.0, start
    for stroke in strokes:
        total += math.dist(cur, stroke[0])
        cur = stroke[-1]
    return total


def test_order_strokes_never_worse_than_input():
    rng = random.Random(5)
    for trial in range(50):
        strokes = []
        for _ in range(rng.randint(1, 12)):
            x0, y0 = rng.randint(0, 99), rng.randint(0, 99)
            pts = [(x0, y0)]
            for _ in range(rng.randint(1, 6)):
                x0 += rng.randint(-3, 3)
                y0 += rng.randint(-3, 3)
                pts.append((x0, y0))
            strokes.append(pts)
        ordered = order_strokes(StrokeSet(strokes=[list(s) for s in strokes]))
        assert travel(ordered.strokes) <= travel(strokes) + 1e-9
        # Same multiset of strokes, possibly reversed.
        canon = sorted(tuple(s) if tuple(s) <= tuple(reversed(s))
                       else tuple(reversed(s)) for s in strokes)
        canon2 = sorted(tuple(s) if tuple(s) <= tuple(reversed(s))
                        else tuple(reversed(s)) for s in ordered.strokes)
        assert canon == canon2


def test_order_strokes_deterministic_and_empty():
    strokes = [[(5, 5), (6, 6)], [(1, 1), (2, 2)]]
    a = order_strokes(StrokeSet(strokes=[list(s) for s in strokes]))
    b = order_strokes(StrokeSet(strokes=[list(s) for s in strokes]))
    assert a.strokes == b.strokes
    assert a.strokes[0][0] == (1, 1)   # nearest endpoint to origin first
    assert order_strokes(StrokeSet()).strokes == []


def brute_force_deviation(original, simplified):
    """Max distance from any original vertex to the simplified polyline."""
    def seg_dist(p, a, b):
        ax, ay = a
        bx, by = b
        px, py = p
        dx, dy = bx - ax, by - ay
        denom = dx * dx + dy * dy
        if denom == 0:
            return math.dist(p, a)
        t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
        return math.dist(p, (ax + t * dx, ay + t * dy))

    worst = 0.0
    for p in original:
        best = min(seg_dist(p, simplified[i], simplified[i + 1])
                   for i in range(len(simplified) - 1))
        worst = max(worst, best)
    return worst


def test_simplify_zero_epsilon_is_identity():
    strokes = [[(0, 0), (1, 0), (2, 0), (3, 0)]]
    out = simplify(StrokeSet(strokes=[list(s) for s in strokes]), 0.0)
    assert out.strokes == strokes


def test_simplify_negative_epsilon_rejected():
    with pytest.raises(ValueError):
        simplify(StrokeSet(), -0.1)


def test_simplify_collinear_collapses():
    stroke = [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]
    out = simplify(StrokeSet(strokes=[list(stroke)]), 0.5)
    assert out.strokes == [[(0, 0), (4, 0)]]


def test_simplify_deviation_bound_random():
    rng = random.Random(17)
    for trial in range(60):
        pts = [(rng.uniform(0, 50), rng.uniform(0, 50))
               for _ in range(rng.randint(2, 40))]
        for eps in (0.25, 1.0, 3.0):
            out = simplify(StrokeSet(strokes=[list(pts)]), eps)
            simplified = out.strokes[0]
            assert simplified[0] == pts[0]
            assert simplified[-1] == pts[-1]
            assert brute_force_deviation(pts, simplified) <= eps + 1e-9


def test_simplify_closed_stroke_keeps_closure():
    ring = [(0, 0), (4, 0), (4, 4), (0, 4), (0, 0)]
    out = simplify(StrokeSet(strokes=[list(ring)]), 0.5)
    assert out.strokes[0][0] == out.strokes[0][-1]
    assert len(out.strokes[0]) >= 4


def test_corpus_simplify_deviation():
    for glyph, bits in corpus_rasters():
        skel = skeletonize(bits)
        traced = trace_strokes(skel)
        slim = simplify(traced, 0.75)
        for before, after in zip(traced.strokes, slim.strokes):
            assert brute_force_deviation(before, after) <= 0.75 + 1e-9


def test_strokes_svg_and_text_round_trip():
    strokes = StrokeSet(strokes=[[(1, 2), (3, 4)], [(5, 6)]])
    svg = strokes_to_svg(strokes, 10, 10)
    assert svg.startswith("<svg")
    assert "polyline" in svg
    assert "circle" in svg  # single points become dots
    text = strokes_to_text(strokes)
    assert strokes_from_text(text).strokes == strokes.strokes
