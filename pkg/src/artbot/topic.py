"""Topic selection: trending keyword -> translated glyphs -> binary raster.

External lookups go through two small client interfaces so the default
build stays hermetic: the bundled fixtures are plain text snapshots and the
clients are pure functions of their files. A live HTTP adapter can slot in
behind the same interfaces without touching the pipeline.

Rendering centers the glyph string on a white background at the largest
size that keeps a configurable ink-free border margin, and is bit-for-bit
deterministic for a fixed (topic, dimensions, font) triple.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from datetime import date as Date
from importlib import resources
from typing import Optional, Protocol

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from .errors import (
    CanvasTooSmall,
    NoTrendData,
    TranslationUnavailable,
    UnrenderableGlyph,
)

MARGIN_FRACTION = 0.05  # ink-free border, fraction of each dimension


def fixture_path(name: str):
    return resources.files("artbot") / "fixtures" / name


def default_font_path() -> str:
    return str(fixture_path("fonts/painterglyphs.ttf"))


@dataclass(frozen=True)
class Topic:
    """A day's winning keyword and its glyph translation."""

    keyword_source: str
    keyword_glyphs: str
    date: Date


class TrendClient(Protocol):
    def fetch_top_keyword(self, date: Date) -> str: ...


class TranslationClient(Protocol):
    def translate(self, text: str) -> str: ...


class FileTrendClient:
    """Keyword rankings from a (date, rank, keyword) fixture file."""

    def __init__(self, path=None):
        self.path = path or fixture_path("trends.txt")
        self._by_date: dict[Date, list[tuple[int, str]]] = {}
        for line in self._read_lines():
            day, rank, keyword = line.split("\t")
            self._by_date.setdefault(Date.fromisoformat(day), []).append(
                (int(rank), keyword))

    def _read_lines(self):
        text = (self.path.read_text(encoding="utf-8")
                if hasattr(self.path, "read_text")
                else open(self.path, encoding="utf-8").read())
        for line in text.splitlines():
            if line.strip() and not line.startswith("#"):
                yield line

    def fetch_top_keyword(self, date: Date) -> str:
        if date not in self._by_date:
            raise NoTrendData(date.isoformat())
        return min(self._by_date[date])[1]


class FileTranslationClient:
    """Keyword translations from a (source, glyphs) fixture file."""

    def __init__(self, path=None):
        self.path = path or fixture_path("translations.txt")
        text = (self.path.read_text(encoding="utf-8")
                if hasattr(self.path, "read_text")
                else open(self.path, encoding="utf-8").read())
        self._table: dict[str, str] = {}
        for line in text.splitlines():
            if line.strip() and not line.startswith("#"):
                source, glyphs = line.split("\t")
                self._table[source] = glyphs

    def translate(self, text: str) -> str:
        if text not in self._table:
            raise TranslationUnavailable(text)
        return self._table[text]


def select_topic(date: Date, trends: TrendClient,
                 translator: TranslationClient) -> Topic:
    """Top keyword of the day plus its glyph translation."""
    keyword = trends.fetch_top_keyword(date)
    glyphs = translator.translate(keyword)
    if not glyphs:
        raise TranslationUnavailable(f"empty translation for {keyword!r}")
    return Topic(keyword_source=keyword, keyword_glyphs=glyphs, date=date)


@dataclass(frozen=True)
class GlyphRaster:
    """Binary image, True = ink. Shape (height, width), row-major."""

    width: int
    height: int
    bits: np.ndarray
    dpi_hint: Optional[int] = None

    def ink_count(self) -> int:
        return int(self.bits.sum())


def ink_bbox(bits: np.ndarray) -> Optional[tuple[int, int, int, int]]:
    """Inclusive (x0, y0, x1, y1) of ink pixels, or None for a blank image."""
    ys, xs = np.nonzero(bits)
    if len(xs) == 0:
        return None
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


@functools.lru_cache(maxsize=8)
def _font_codepoints(font_path: str) -> frozenset[int]:
    return frozenset(TTFont(font_path).getBestCmap())


def _render_tight_mask(font_path: str, size: int,
                       text: str) -> Optional[np.ndarray]:
    """Text rendered at `size`, cropped to its exact ink bounding box.

    Returns None when the render leaves no pixel above the ink threshold,
    which happens for real glyphs at very small sizes (anti-aliasing keeps
    every sample below half intensity)."""
    font = ImageFont.truetype(font_path, size)
    pad = size
    img = Image.new("L", (size * (len(text) + 2) + 2 * pad, size * 3), 0)
    ImageDraw.Draw(img).text((pad, pad), text, fill=255, font=font)
    bits = np.asarray(img) > 127
    box = ink_bbox(bits)
    if box is None:
        return None
    x0, y0, x1, y1 = box
    return bits[y0:y1 + 1, x0:x1 + 1]


def render_topic(topic: Topic, width_px: int, height_px: int,
                 font_ref: Optional[str] = None) -> GlyphRaster:
    """Rasterize the topic glyphs, centered, margin-preserving, maximal.

    A binary search over font sizes finds the largest rendering whose exact
    ink extents fit the inner box left by the border margin; the tight ink
    mask is then pasted centered. Glyphs missing from the font's character
    map raise UnrenderableGlyph rather than rendering replacement boxes.
    """
    if width_px < 64 or height_px < 64:
        raise CanvasTooSmall(f"{width_px}x{height_px} below 64x64 minimum")
    text = topic.keyword_glyphs
    if not text.strip():
        raise UnrenderableGlyph("empty glyph string")
    font_path = font_ref or default_font_path()
    cmap = _font_codepoints(font_path)
    missing = {c for c in text if not c.isspace() and ord(c) not in cmap}
    if missing:
        raise UnrenderableGlyph(
            "glyphs not in font: " + ", ".join(sorted(missing)))

    margin_x = int(np.ceil(width_px * MARGIN_FRACTION))
    margin_y = int(np.ceil(height_px * MARGIN_FRACTION))
    box_w = width_px - 2 * margin_x
    box_h = height_px - 2 * margin_y

    def fits(size: int) -> bool:
        mask = _render_tight_mask(font_path, size, text)
        if mask is None:
            return True  # no ink occupies no space
        return mask.shape[1] <= box_w and mask.shape[0] <= box_h

    lo, hi = 4, max(8, min(box_h * 2, box_w * 2 // max(1, len(text))))
    if not fits(lo):
        raise CanvasTooSmall(f"glyphs cannot fit {width_px}x{height_px}")
    size_cap = 4 * (box_w + box_h)
    while fits(hi):
        lo = hi
        hi *= 2
        if hi > size_cap:
            # Ink would have overflowed the box long before this size.
            raise UnrenderableGlyph(f"{text!r} renders blank at any size")
    while hi - lo > 1:  # invariant: fits(lo), not fits(hi)
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid

    mask = _render_tight_mask(font_path, lo, text)
    if mask is None:
        raise CanvasTooSmall(
            f"glyphs render blank inside {width_px}x{height_px}")
    h, w = mask.shape
    bits = np.zeros((height_px, width_px), dtype=bool)
    x0 = (width_px - w) // 2
    y0 = (height_px - h) // 2
    bits[y0:y0 + h, x0:x0 + w] = mask
    return GlyphRaster(width=width_px, height=height_px, bits=bits)


def save_raster_png(bits: np.ndarray, path) -> None:
    """Write a binary image as 1-bit PNG, ink black on white."""
    img = Image.fromarray(np.where(bits, 0, 255).astype(np.uint8)).convert("1")
    img.save(path, format="PNG")


def load_raster_png(path) -> np.ndarray:
    """Read a PNG back to a binary ink array (dark pixels = ink)."""
    img = Image.open(path).convert("L")
    return np.asarray(img) < 128
