"""Rasterization of shaped Arabic text into grayscale line images.

``render_line`` shapes the input (contextual presentation forms + visual
reordering), verifies every glyph exists in the font's character map, and
draws black ink on a white background, returning a tight crop with a
4-pixel margin.  Rendering is deterministic for a given font file and
size.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from invizo.imaging.raster import RasterImage
from invizo.synthesis.shaping import shape_text, visual_order

RENDER_MARGIN = 4
_INK_THRESHOLD = 192

_FONT_SEARCH_PATHS = (
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/local/share/fonts/DejaVuSans.ttf",
)


class FontError(Exception):
    """The font file is missing or cannot be loaded."""


class GlyphError(Exception):
    """The font cannot display some characters of the text.

    ``missing`` lists the offending source characters.
    """

    def __init__(self, missing: list[str]):
        self.missing = missing
        joined = ", ".join(f"U+{ord(c):04X} {c!r}" for c in missing)
        super().__init__(f"font lacks glyphs for: {joined}")


def default_font_path() -> str:
    """Locate a bundled sans font with Arabic coverage (DejaVu Sans)."""
    for candidate in _FONT_SEARCH_PATHS:
        if Path(candidate).is_file():
            return candidate
    try:
        import matplotlib

        candidate = (
            Path(matplotlib.get_data_path()) / "fonts" / "ttf" / "DejaVuSans.ttf"
        )
        if candidate.is_file():
            return str(candidate)
    except ImportError:
        pass
    raise FontError("no default font found; pass an explicit font path")


@lru_cache(maxsize=8)
def _font_charmap(font_path: str) -> frozenset[int]:
    try:
        font = TTFont(font_path, lazy=True)
        cmap = font.getBestCmap()
        font.close()
    except Exception as exc:  # fontTools raises several types here
        raise FontError(f"cannot read font {font_path}: {exc}") from exc
    return frozenset(cmap)


@lru_cache(maxsize=32)
def _load_font(font_path: str, px_size: int) -> ImageFont.FreeTypeFont:
    if not Path(font_path).is_file():
        raise FontError(f"font file not found: {font_path}")
    try:
        return ImageFont.truetype(font_path, px_size)
    except OSError as exc:
        raise FontError(f"cannot load font {font_path}: {exc}") from exc


def _check_glyphs(text: str, shaped: str, font_path: str) -> None:
    charmap = _font_charmap(font_path)
    missing: list[str] = []
    for src, form in zip(text, shaped):
        if src.isspace():
            continue
        if ord(form) not in charmap and src not in missing:
            missing.append(src)
    if missing:
        raise GlyphError(missing)


def _blank(px_height: int) -> RasterImage:
    return RasterImage.blank(2 * RENDER_MARGIN, px_height, value=255)


def render_line(
    text: str, font_path: str | None = None, px_height: int = 48
) -> RasterImage:
    """Draw one line of Arabic text as black-on-white grayscale.

    The glyph size is ``px_height``; the output is the tight bounding box
    of the ink plus a 4-pixel white margin on every side, so the returned
    height tracks the actual ink extent.  Whitespace-only input yields a
    blank image of height ``px_height``.

    Raises ``FontError`` for unusable fonts and ``GlyphError`` when the
    font lacks a needed glyph.
    """
    if px_height <= 0:
        raise ValueError(f"px_height must be positive, got {px_height}")
    path = font_path if font_path is not None else default_font_path()
    font = _load_font(path, px_height)

    if not text.strip():
        return _blank(px_height)

    shaped = shape_text(text)
    _check_glyphs(text, shaped, path)
    visual = visual_order(shaped)

    # Generous canvas: glyphs can overshoot the em box in both axes.
    canvas_w = px_height * (2 * len(visual) + 2)
    canvas_h = px_height * 3
    canvas = Image.new("L", (canvas_w, canvas_h), color=255)
    draw = ImageDraw.Draw(canvas)
    draw.text((px_height, px_height), visual, font=font, fill=0)

    pixels = np.asarray(canvas, dtype=np.uint8)
    ink_rows = np.where((pixels < _INK_THRESHOLD).any(axis=1))[0]
    ink_cols = np.where((pixels < _INK_THRESHOLD).any(axis=0))[0]
    if ink_rows.size == 0:
        return _blank(px_height)
    top, bottom = int(ink_rows[0]), int(ink_rows[-1])
    left, right = int(ink_cols[0]), int(ink_cols[-1])
    crop = pixels[top : bottom + 1, left : right + 1]

    h, w = crop.shape
    out = np.full(
        (h + 2 * RENDER_MARGIN, w + 2 * RENDER_MARGIN), 255, dtype=np.uint8
    )
    out[RENDER_MARGIN : RENDER_MARGIN + h, RENDER_MARGIN : RENDER_MARGIN + w] = crop
    return RasterImage(out)
