"""Perspective extraction of quad regions into axis-aligned crops."""

from __future__ import annotations

import numpy as np

from ..imaging import RasterImage, sample_bilinear
from .homography import dlt_homography, RegistrationError

BACKGROUND = 255.0


class DegenerateRegion(RegistrationError):
    """Quad too small (or self-crossed) to produce a crop."""


def _quad_area(quad: np.ndarray) -> float:
    x, y = quad[:, 0], quad[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def warp_extract(img: RasterImage, quad) -> RasterImage:
    """Resample the quad region into an upright rectangle.

    The quad lists its corners clockwise starting top-left, in continuous
    corner coordinates; the output size is the rounded mean of opposing edge
    lengths.  Samples falling outside the source read as background (255).
    """
    q = np.asarray(quad, dtype=np.float64).reshape(4, 2)
    if _quad_area(q) < 4.0:
        raise DegenerateRegion(f"quad area {_quad_area(q):.2f} px^2 is below 4")
    top = np.linalg.norm(q[1] - q[0])
    bottom = np.linalg.norm(q[2] - q[3])
    left = np.linalg.norm(q[3] - q[0])
    right = np.linalg.norm(q[2] - q[1])
    out_w = max(1, int(round((top + bottom) / 2.0)))
    out_h = max(1, int(round((left + right) / 2.0)))
    rect = np.array([[0.0, 0.0], [out_w, 0.0], [out_w, out_h], [0.0, out_h]])
    h = dlt_homography(rect, q)
    if h is None:
        raise DegenerateRegion("quad does not admit a rectangle mapping")

    js, is_ = np.meshgrid(np.arange(out_w), np.arange(out_h))
    centers = np.stack([js + 0.5, is_ + 0.5], axis=-1).reshape(-1, 2)
    homog = np.column_stack([centers, np.ones(len(centers))]) @ h.T
    src = homog[:, :2] / homog[:, 2:3]
    xs = src[:, 0].reshape(out_h, out_w) - 0.5
    ys = src[:, 1].reshape(out_h, out_w) - 0.5

    if img.channels == 1:
        out = sample_bilinear(img.pixels.astype(np.float64), xs, ys, BACKGROUND)
        return RasterImage(np.round(out).clip(0, 255).astype(np.uint8))
    planes = [
        sample_bilinear(img.pixels[:, :, c].astype(np.float64), xs, ys, BACKGROUND)
        for c in range(3)
    ]
    return RasterImage(np.round(np.stack(planes, axis=2)).clip(0, 255).astype(np.uint8))
