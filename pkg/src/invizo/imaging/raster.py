"""Raster image container and basic pixel-level operations."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image


class ImagingError(Exception):
    pass


@dataclass
class RasterImage:
    """Uint8 raster, row-major, 1 channel (grayscale) or 3 channels (RGB)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            raise ImagingError(f"pixels must be uint8, got {px.dtype}")
        if px.ndim == 3 and px.shape[2] == 1:
            px = px[:, :, 0]
        if px.ndim not in (2, 3):
            raise ImagingError(f"pixels must be HxW or HxWx3, got shape {px.shape}")
        if px.ndim == 3 and px.shape[2] != 3:
            raise ImagingError(f"channel count must be 1 or 3, got {px.shape[2]}")
        self.pixels = px

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    def copy(self) -> "RasterImage":
        return RasterImage(self.pixels.copy())

    @staticmethod
    def blank(width: int, height: int, value: int = 255, channels: int = 1) -> "RasterImage":
        shape = (height, width) if channels == 1 else (height, width, channels)
        return RasterImage(np.full(shape, value, dtype=np.uint8))


# ---------------------------------------------------------------------------
# file i/o
# ---------------------------------------------------------------------------

def read_image(path: str) -> RasterImage:
    """Load a PNG or PGM file.  Anything not grayscale comes back as RGB."""
    if not os.path.exists(path):
        raise ImagingError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "1", "I;16"):
                arr = np.asarray(im.convert("L"), dtype=np.uint8)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except ImagingError:
        raise
    except Exception as exc:
        raise ImagingError(f"cannot decode {path}: {exc}") from exc
    return RasterImage(arr)


def write_image(img: RasterImage, path: str) -> None:
    """Write PNG or PGM depending on the file extension."""
    ext = os.path.splitext(path)[1].lower()
    pil = Image.fromarray(img.pixels)
    if ext == ".pgm" and img.channels != 1:
        raise ImagingError("PGM output requires a single-channel image")
    if ext not in (".png", ".pgm"):
        raise ImagingError(f"unsupported output format: {ext!r}")
    pil.save(path)


def decode_png_bytes(data: bytes) -> RasterImage:
    import io

    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.mode in ("L", "1"):
                arr = np.asarray(im.convert("L"), dtype=np.uint8)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise ImagingError(f"cannot decode image bytes: {exc}") from exc
    return RasterImage(arr)


def encode_png_bytes(img: RasterImage) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(img.pixels).save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# pixel ops
# ---------------------------------------------------------------------------

def to_grayscale(img: RasterImage) -> RasterImage:
    """ITU-R 601 luma: 0.299 R + 0.587 G + 0.114 B, rounded."""
    if img.channels == 1:
        return img.copy()
    rgb = img.pixels.astype(np.float64)
    gray = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return RasterImage(np.round(gray).clip(0, 255).astype(np.uint8))


def invert(img: RasterImage) -> RasterImage:
    return RasterImage((255 - img.pixels.astype(np.int16)).astype(np.uint8))


def resize_bilinear(img: RasterImage, width: int, height: int) -> RasterImage:
    """Resize with bilinear sampling (half-pixel center convention)."""
    if width < 1 or height < 1:
        raise ImagingError(f"bad target size {width}x{height}")
    src = img.pixels.astype(np.float64)
    h, w = src.shape[:2]
    if (w, h) == (width, height):
        return img.copy()
    sx = w / width
    sy = h / height
    xs = (np.arange(width) + 0.5) * sx - 0.5
    ys = (np.arange(height) + 0.5) * sy - 0.5
    gx, gy = np.meshgrid(xs, ys)
    if src.ndim == 2:
        out = _bilinear_clamped(src, gx, gy)
    else:
        out = np.stack([_bilinear_clamped(src[:, :, c], gx, gy) for c in range(3)], axis=2)
    return RasterImage(np.round(out).clip(0, 255).astype(np.uint8))


def _bilinear_clamped(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear sample with coordinates clamped to the image rectangle."""
    h, w = plane.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = plane[y0, x0] * (1 - fx) + plane[y0, x1] * fx
    bot = plane[y1, x0] * (1 - fx) + plane[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def sample_bilinear(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray, fill: float) -> np.ndarray:
    """Bilinear sample at float coords; anything outside the image reads `fill`.

    A small tolerance keeps samples that land on the boundary minus float
    noise (e.g. coming out of a homography solve) from reading as outside.
    """
    h, w = plane.shape
    eps = 1e-9
    inside = (xs >= -eps) & (xs <= w - 1 + eps) & (ys >= -eps) & (ys <= h - 1 + eps)
    out = np.full(xs.shape, float(fill))
    if np.any(inside):
        out[inside] = _bilinear_clamped(plane, xs[inside], ys[inside])
    return out
