"""Assembly of word images into fixed-size recognizer input lines.

The recognizer consumes a fixed 1024x64 canvas.  ``compose_line`` lays
word images out right-to-left (Arabic reading order: the first word sits
at the right edge), scales everything to a common height, and either
left-pads short lines with background or uniformly shrinks long lines to
fit, centring them vertically.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from invizo.imaging.raster import RasterImage, resize_bilinear

LINE_WIDTH = 1024
LINE_HEIGHT = 64
BACKGROUND = 255

MIN_SEQUENCE_DIGITS = 1
MAX_SEQUENCE_DIGITS = 8


def _scale_to_height(image: RasterImage, height: int) -> np.ndarray:
    pixels = image.pixels
    if pixels.ndim == 3:
        raise ValueError("compose_line expects grayscale word images")
    h, w = pixels.shape
    if h == height:
        return pixels
    new_w = max(1, int(round(w * height / h)))
    return resize_bilinear(RasterImage(pixels), new_w, height).pixels


def compose_line(
    words: Sequence[RasterImage],
    width: int = LINE_WIDTH,
    height: int = LINE_HEIGHT,
) -> RasterImage:
    """Compose word images into one ``height x width`` grayscale line.

    Words are placed right to left in the order given.  Lines narrower
    than ``width`` are padded on the left with background; wider lines
    are scaled down uniformly to exactly ``width`` and centred
    vertically.  The output shape is always ``(height, width)``.
    """
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    canvas = np.full((height, width), BACKGROUND, dtype=np.uint8)
    scaled = [_scale_to_height(w, height) for w in words]
    scaled = [s for s in scaled if s.shape[1] > 0]
    if not scaled:
        return RasterImage(canvas)

    # Visual order is last word leftmost; build the strip left-to-right.
    strip = np.concatenate(list(reversed(scaled)), axis=1)
    total = strip.shape[1]
    if total <= width:
        canvas[:, width - total :] = strip
    else:
        scale = width / total
        new_h = max(1, int(round(height * scale)))
        shrunk = resize_bilinear(RasterImage(strip), width, new_h).pixels
        top = (height - new_h) // 2
        canvas[top : top + new_h, :] = shrunk
    return RasterImage(canvas)


def compose_digit_sequence(
    bank: Sequence[tuple[RasterImage, str]],
    n: int,
    rng: np.random.Generator,
    width: int = LINE_WIDTH,
    height: int = LINE_HEIGHT,
) -> tuple[RasterImage, str]:
    """Build a synthetic numeral line from a bank of single-digit images.

    Samples ``n`` digits uniformly with replacement (``1 <= n <= 8``),
    composes them right to left like any line, and returns the image with
    its logical-order label (most significant digit first).
    """
    if not MIN_SEQUENCE_DIGITS <= n <= MAX_SEQUENCE_DIGITS:
        raise ValueError(
            f"sequence length must be in "
            f"[{MIN_SEQUENCE_DIGITS}, {MAX_SEQUENCE_DIGITS}], got {n}"
        )
    if not bank:
        raise ValueError("digit bank is empty")
    picks = [bank[int(i)] for i in rng.integers(0, len(bank), size=n)]
    images = [img for img, _ in picks]
    label = "".join(lbl for _, lbl in picks)
    # A numeral reads left to right even in Arabic context: the first
    # (most significant) digit is leftmost, so feed the words reversed.
    return compose_line(list(reversed(images)), width, height), label
