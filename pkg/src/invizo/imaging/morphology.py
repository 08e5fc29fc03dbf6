"""Binary morphology with the fixed 3x3 all-ones structuring element."""

from __future__ import annotations

import numpy as np

from .raster import RasterImage, ImagingError, invert

# Border rule: neighborhoods are restricted to in-frame pixels.  Equivalently,
# out-of-bounds counts as the neutral element of each operation (foreground
# for erosion, background for dilation), which is the only convention under
# which erode(invert(I)) == invert(dilate(I)) holds on the full frame.


def _as_binary(img: RasterImage) -> np.ndarray:
    if img.channels != 1:
        raise ImagingError("morphology expects a single-channel image")
    px = img.pixels
    vals = np.unique(px)
    if not np.all(np.isin(vals, (0, 255))):
        raise ImagingError("morphology expects a binary image with values in {0, 255}")
    return px == 255


def _neighborhood_stack(fg: np.ndarray, pad_value: bool) -> np.ndarray:
    padded = np.pad(fg, 1, mode="constant", constant_values=pad_value)
    h, w = fg.shape
    return np.stack(
        [padded[dy : dy + h, dx : dx + w] for dy in range(3) for dx in range(3)]
    )


def erode(img: RasterImage) -> RasterImage:
    """A pixel survives only if every in-frame neighbor (3x3) is foreground."""
    fg = _as_binary(img)
    out = np.all(_neighborhood_stack(fg, True), axis=0)
    return RasterImage(np.where(out, 255, 0).astype(np.uint8))


def dilate(img: RasterImage) -> RasterImage:
    """A pixel turns foreground if any in-frame neighbor (3x3) is foreground."""
    fg = _as_binary(img)
    out = np.any(_neighborhood_stack(fg, False), axis=0)
    return RasterImage(np.where(out, 255, 0).astype(np.uint8))


def open_image(img: RasterImage) -> RasterImage:
    """Opening: erosion followed by dilation.  Removes speckle smaller than
    the structuring element while leaving larger solid shapes intact."""
    return dilate(erode(img))


def open_ink(img: RasterImage) -> RasterImage:
    """Opening applied to the dark (ink=0) structures of a binarized page."""
    return invert(open_image(invert(img)))
