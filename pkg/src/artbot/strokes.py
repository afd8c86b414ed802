"""Skeletonization and stroke planning over binary glyph rasters.

The thinning stage is the classic two-subiteration parallel algorithm of
Zhang and Suen, with two deterministic amendments:

- an annihilation guard: when one parallel subiteration would delete an
  entire 8-connected component (possible for tiny isolated blobs), the
  lexicographically first pixel of that component is retained, so the
  component count is preserved exactly;
- a cleanup sweep that erodes any residual fully-inked 2x2 block by
  deleting simple pixels (pixels whose removal does not change local
  connectivity) in raster-scan order, so the output is strictly thin.

Stroke tracing walks the thin skeleton as a graph: pixels are vertices,
8-adjacency gives edges, and maximal junction-free paths become strokes.
Coordinates are (x, y) pixel tuples with x = column, y = row.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NotThin

Point = tuple[int, int]

# Fixed clockwise neighbor order starting north; shared by tracing and
# transition counts so every scan is deterministic.
_NEIGHBOR_OFFSETS = ((0, -1), (1, -1), (1, 0), (1, 1),
                     (0, 1), (-1, 1), (-1, 0), (-1, -1))


def binarize(image: np.ndarray, threshold: int = 128) -> np.ndarray:
    """Grayscale (or boolean) image to ink bits: ink iff intensity < threshold."""
    arr = np.asarray(image)
    if arr.dtype == bool:
        return arr.copy()
    return arr < threshold


@dataclass(frozen=True)
class Skeleton:
    width: int
    height: int
    bits: np.ndarray


@dataclass
class StrokeSet:
    """Ordered polylines in pixel coordinates.

    Closed strokes (traced cycles) repeat their start point at the end.
    """

    strokes: list[list[Point]] = field(default_factory=list)

    def total_points(self) -> int:
        return sum(len(s) for s in self.strokes)


def _neighbor_stack(padded: np.ndarray) -> list[np.ndarray]:
    """The eight neighbor planes P2..P9 (clockwise from north)."""
    return [padded[:-2, 1:-1], padded[:-2, 2:], padded[1:-1, 2:],
            padded[2:, 2:], padded[2:, 1:-1], padded[2:, :-2],
            padded[1:-1, :-2], padded[:-2, :-2]]


def label_components(bits: np.ndarray) -> tuple[int, np.ndarray]:
    """8-connected component labels; returns (count, label array, 0 = empty)."""
    labels = np.zeros(bits.shape, dtype=np.int32)
    count = 0
    h, w = bits.shape
    for sy, sx in zip(*np.nonzero(bits)):
        if labels[sy, sx]:
            continue
        count += 1
        queue = deque([(int(sy), int(sx))])
        labels[sy, sx] = count
        while queue:
            y, x = queue.popleft()
            for dx, dy in _NEIGHBOR_OFFSETS:
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] \
                        and not labels[ny, nx]:
                    labels[ny, nx] = count
                    queue.append((ny, nx))
    return count, labels


def _transitions(neighborhood: list[bool]) -> int:
    """0->1 transitions in the circular P2..P9 sequence."""
    total = 0
    for i in range(8):
        if not neighborhood[i] and neighborhood[(i + 1) % 8]:
            total += 1
    return total


def _pixel_neighborhood(bits: np.ndarray, x: int, y: int) -> list[bool]:
    h, w = bits.shape
    out = []
    for dx, dy in _NEIGHBOR_OFFSETS:
        ny, nx = y + dy, x + dx
        out.append(bool(bits[ny, nx]) if 0 <= ny < h and 0 <= nx < w
                   else False)
    return out


def _is_simple(bits: np.ndarray, x: int, y: int) -> bool:
    """Deletable without changing local 8-connectivity (one ink run)."""
    nb = _pixel_neighborhood(bits, x, y)
    return sum(nb) > 1 and _transitions(nb) == 1


def _guard_annihilation(img: np.ndarray, delete: np.ndarray) -> np.ndarray:
    """Unmark one pixel per component that the mask would erase whole.

    The parallel rule can delete every pixel of a small isolated blob
    (e.g. an exact 2x2 square) in a single subiteration; retaining the
    lexicographically first pixel keeps the component alive until later
    passes reduce it normally.
    """
    padded = np.pad(delete, 1)
    neighbors_deleted = np.ones(img.shape, dtype=bool)
    padded_img = np.pad(img, 1)
    for plane_del, plane_ink in zip(_neighbor_stack(padded),
                                    _neighbor_stack(padded_img)):
        neighbors_deleted &= (~plane_ink) | plane_del
    at_risk = delete & neighbors_deleted
    if not at_risk.any():
        return delete
    _, labels = label_components(img)
    for comp in np.unique(labels[at_risk]):
        members = labels == comp
        if (delete & members).sum() == members.sum():
            ys, xs = np.nonzero(members)
            delete = delete.copy()
            delete[ys[0], xs[0]] = False
    return delete


def _thinning_pass(img: np.ndarray, step: int) -> np.ndarray:
    """One Zhang-Suen subiteration; returns the deletion mask."""
    padded = np.pad(img, 1)
    p = _neighbor_stack(padded)
    count = np.zeros(img.shape, dtype=np.uint8)
    for plane in p:
        count += plane
    transitions = np.zeros(img.shape, dtype=np.uint8)
    for i in range(8):
        transitions += (~p[i]) & p[(i + 1) % 8]
    if step == 0:
        c1 = ~(p[0] & p[2] & p[4])  # P2*P4*P6 == 0
        c2 = ~(p[2] & p[4] & p[6])  # P4*P6*P8 == 0
    else:
        c1 = ~(p[0] & p[2] & p[6])  # P2*P4*P8 == 0
        c2 = ~(p[0] & p[4] & p[6])  # P2*P6*P8 == 0
    return img & (count >= 2) & (count <= 6) & (transitions == 1) & c1 & c2


def _square_blocks(bits: np.ndarray) -> np.ndarray:
    """Mask of top-left corners of fully inked 2x2 blocks."""
    return bits[:-1, :-1] & bits[:-1, 1:] & bits[1:, :-1] & bits[1:, 1:]


def _cleanup_squares(img: np.ndarray) -> np.ndarray:
    """Erode residual 2x2 blocks by deleting simple pixels, scan order."""
    img = img.copy()
    while True:
        corners = _square_blocks(img)
        if not corners.any():
            return img
        deleted = False
        for cy, cx in zip(*np.nonzero(corners)):
            block = ((cy, cx), (cy, cx + 1), (cy + 1, cx), (cy + 1, cx + 1))
            if not all(img[y, x] for y, x in block):
                continue  # an earlier deletion already broke this block
            for y, x in block:
                if _is_simple(img, x, y):
                    img[y, x] = False
                    deleted = True
                    break
        if not deleted:
            return img  # pathological block with no simple pixel


def skeletonize(binary: np.ndarray) -> Skeleton:
    """Thin ink regions to 8-connected unit-width curves.

    Iterates the two-subiteration parallel thinning to a fixed point, then
    erodes any surviving 2x2 blocks. Component count is preserved and the
    result is idempotent under re-application.
    """
    img = np.ascontiguousarray(binary, dtype=bool).copy()
    while True:
        changed = False
        for step in (0, 1):
            delete = _thinning_pass(img, step)
            if delete.any():
                delete = _guard_annihilation(img, delete)
            if delete.any():
                img &= ~delete
                changed = True
        if not changed:
            break
    img = _cleanup_squares(img)
    h, w = img.shape
    return Skeleton(width=w, height=h, bits=img)


def is_thin(bits: np.ndarray) -> bool:
    return not _square_blocks(bits).any()


def _ink_neighbors(bits: np.ndarray, p: Point) -> list[Point]:
    x, y = p
    h, w = bits.shape
    out = []
    for dx, dy in _NEIGHBOR_OFFSETS:
        nx, ny = x + dx, y + dy
        if 0 <= ny < h and 0 <= nx < w and bits[ny, nx]:
            out.append((nx, ny))
    return out


def trace_strokes(skeleton: Skeleton) -> StrokeSet:
    """Decompose a thin skeleton into maximal junction-free polylines.

    Vertices with degree != 2 (endpoints, junctions, isolated pixels) are
    nodes; every edge-disjoint walk between nodes becomes one stroke, with
    junction pixels replicated into each incident stroke. Components that
    are pure cycles come out as closed polylines (start point repeated).
    """
    bits = skeleton.bits
    if not is_thin(bits):
        raise NotThin("skeleton contains a fully inked 2x2 block")
    pixels = [(int(x), int(y)) for y, x in zip(*np.nonzero(bits))]
    degree = {p: len(_ink_neighbors(bits, p)) for p in pixels}
    nodes = [p for p in pixels if degree[p] != 2]
    visited: set[tuple[Point, Point]] = set()
    covered: set[Point] = set()
    strokes: list[list[Point]] = []

    def walk(start: Point, first: Point) -> list[Point]:
        path = [start, first]
        visited.add((start, first))
        visited.add((first, start))
        prev, cur = start, first
        while degree[cur] == 2 and cur != start:
            a, b = _ink_neighbors(bits, cur)
            nxt = b if a == prev else a
            visited.add((cur, nxt))
            visited.add((nxt, cur))
            path.append(nxt)
            prev, cur = cur, nxt
        return path

    for node in nodes:
        covered.add(node)
        if degree[node] == 0:
            strokes.append([node])
            continue
        for nb in _ink_neighbors(bits, node):
            if (node, nb) in visited:
                continue
            path = walk(node, nb)
            covered.update(path)
            strokes.append(path)

    for p in pixels:  # remaining pixels belong to pure cycles
        if p in covered:
            continue
        nb = _ink_neighbors(bits, p)[0]
        path = walk(p, nb)
        covered.update(path)
        strokes.append(path)

    return StrokeSet(strokes=strokes)


def rasterize_strokes(strokeset: StrokeSet, width: int,
                      height: int) -> np.ndarray:
    """Stroke vertices back onto a binary grid (round-trip check helper)."""
    bits = np.zeros((height, width), dtype=bool)
    for stroke in strokeset.strokes:
        for x, y in stroke:
            bits[y, x] = True
    return bits


def _dist(a: Point, b: Point) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def _travel(strokes: list[list[Point]], start: Point) -> float:
    total = 0.0
    cur = start
    for s in strokes:
        total += _dist(cur, s[0])
        cur = s[-1]
    return total


def order_strokes(strokeset: StrokeSet,
                  start: Point = (0, 0)) -> StrokeSet:
    """Reorder (and possibly reverse) strokes to cut pen-up travel.

    Greedy nearest-endpoint ordering from `start`; if the greedy tour ends
    up longer than the input order, the input order is returned, so the
    result never travels farther than the given ordering.
    """
    remaining = list(range(len(strokeset.strokes)))
    ordered: list[list[Point]] = []
    cur = start
    while remaining:
        best = None
        for idx in remaining:
            s = strokeset.strokes[idx]
            for reverse in (False, True):
                head = s[-1] if reverse else s[0]
                key = (_dist(cur, head), idx, reverse)
                if best is None or key < best:
                    best = key
        _, idx, reverse = best
        s = strokeset.strokes[idx]
        ordered.append(list(reversed(s)) if reverse else list(s))
        cur = ordered[-1][-1]
        remaining.remove(idx)
    if _travel(ordered, start) <= _travel(strokeset.strokes, start):
        return StrokeSet(strokes=ordered)
    return StrokeSet(strokes=[list(s) for s in strokeset.strokes])


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    dx, dy = bx - ax, by - ay
    if dx == 0.0 and dy == 0.0:
        return float(np.hypot(px - ax, py - ay))
    t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return float(np.hypot(px - (ax + t * dx), py - (ay + t * dy)))


def _rdp(points: list[Point], epsilon: float) -> list[Point]:
    """Iterative Ramer-Douglas-Peucker keeping endpoint indices."""
    keep = [False] * len(points)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        worst, worst_d = lo, -1.0
        for i in range(lo + 1, hi):
            d = _point_segment_distance(points[i], points[lo], points[hi])
            if d > worst_d:
                worst, worst_d = i, d
        if worst_d > epsilon:
            keep[worst] = True
            stack.append((lo, worst))
            stack.append((worst, hi))
    return [p for p, k in zip(points, keep) if k]


def simplify(strokeset: StrokeSet, epsilon_px: float) -> StrokeSet:
    """Per-stroke polyline simplification within epsilon_px deviation.

    Endpoints are always retained; epsilon 0 returns every stroke
    unchanged (identity, not collinear merging).
    """
    if epsilon_px < 0:
        raise ValueError("epsilon_px must be >= 0")
    if epsilon_px == 0:
        return StrokeSet(strokes=[list(s) for s in strokeset.strokes])
    out = []
    for stroke in strokeset.strokes:
        if len(stroke) <= 2:
            out.append(list(stroke))
        else:
            out.append(_rdp(stroke, epsilon_px))
    return StrokeSet(strokes=out)


_SVG_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                "#17becf", "#e377c2", "#8c564b")


def strokes_to_svg(strokeset: StrokeSet, width: int, height: int) -> str:
    """SVG document with one polyline per stroke, palette-cycled colors."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i, stroke in enumerate(strokeset.strokes):
        color = _SVG_PALETTE[i % len(_SVG_PALETTE)]
        pts = " ".join(f"{x},{y}" for x, y in stroke)
        if len(stroke) == 1:
            x, y = stroke[0]
            parts.append(f'<circle cx="{x}" cy="{y}" r="0.5" '
                         f'fill="{color}"/>')
        else:
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def strokes_to_text(strokeset: StrokeSet) -> str:
    """One stroke per line as space-separated x,y pairs."""
    return "\n".join(" ".join(f"{x},{y}" for x, y in stroke)
                     for stroke in strokeset.strokes) + "\n"


def strokes_from_text(text: str) -> StrokeSet:
    strokes = []
    for line in text.splitlines():
        if not line.strip():
            continue
        pts = []
        for pair in line.split():
            xs, ys = pair.split(",")
            pts.append((int(xs), int(ys)))
        strokes.append(pts)
    return StrokeSet(strokes=strokes)
