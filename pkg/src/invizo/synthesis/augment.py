"""Photometric and geometric degradations for synthetic line images.

``augment`` applies an ``AugmentSpec`` in one fixed order:

1. ruled/dotted paper background
2. rotation about the image centre
3. directional motion blur
4. low-resolution round trip (downscale then upscale)
5. additive Gaussian noise
6. impulse ("salt and pepper") noise

Every stage preserves the image dimensions, and a given ``(image, spec)``
pair always produces the same output: all randomness comes from a
generator seeded with ``spec.seed``.

Impulse noise flips each corrupted pixel to the extreme *opposite* its
current half of the range (bright pixels to 0, dark pixels to 255), so a
corruption is always visible regardless of the underlying content.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from invizo.imaging.raster import RasterImage

BACKGROUND = 255


@dataclass(frozen=True)
class AugmentSpec:
    """Degradation settings; zero/None values disable a stage."""

    seed: int = 0
    background: str | None = None  # None, "lined", or "dotted"
    background_spacing: int = 16
    background_intensity: int = 180
    rotation_deg: float = 0.0
    motion_blur_len: int = 0
    motion_blur_deg: float = 0.0
    lowres_factor: float = 1.0
    noise_std: float = 0.0
    salt_pepper_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.background not in (None, "lined", "dotted"):
            raise ValueError(f"unknown background style {self.background!r}")
        if self.background_spacing <= 0:
            raise ValueError("background_spacing must be positive")
        if not 0 <= self.background_intensity <= 255:
            raise ValueError("background_intensity must be in [0, 255]")
        if self.motion_blur_len < 0:
            raise ValueError("motion_blur_len must be non-negative")
        if self.lowres_factor < 1.0:
            raise ValueError("lowres_factor must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if not 0.0 <= self.salt_pepper_rate <= 1.0:
            raise ValueError("salt_pepper_rate must be in [0, 1]")


def _apply_background(pixels: np.ndarray, spec: AugmentSpec) -> np.ndarray:
    h, w = pixels.shape
    overlay = np.full((h, w), BACKGROUND, dtype=np.uint8)
    step = spec.background_spacing
    value = spec.background_intensity
    if spec.background == "lined":
        overlay[step // 2 :: step, :] = value
    else:  # dotted
        overlay[step // 2 :: step, step // 2 :: step] = value
    # Ink wins over ruling: keep the darker of the two layers.
    return np.minimum(pixels, overlay)


def _rotate(pixels: np.ndarray, degrees: float) -> np.ndarray:
    h, w = pixels.shape
    theta = np.deg2rad(degrees)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = np.mgrid[0:h, 0:w]
    # Inverse map: rotate output coordinates by -theta around the centre.
    dx = xs - cx
    dy = ys - cy
    src_x = cos_t * dx + sin_t * dy + cx
    src_y = -sin_t * dx + cos_t * dy + cy
    out = ndimage.map_coordinates(
        pixels.astype(np.float64),
        [src_y, src_x],
        order=1,
        mode="constant",
        cval=BACKGROUND,
    )
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def _motion_kernel(length: int, degrees: float) -> np.ndarray:
    kernel = np.zeros((length, length), dtype=np.float64)
    centre = (length - 1) / 2.0
    theta = np.deg2rad(degrees)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    # Splat the line through the centre with bilinear weights.
    for t in np.linspace(-centre, centre, 2 * length - 1):
        x = centre + t * cos_t
        y = centre + t * sin_t
        x0, y0 = int(np.floor(x)), int(np.floor(y))
        fx, fy = x - x0, y - y0
        for dy_i, dx_i, wgt in (
            (0, 0, (1 - fx) * (1 - fy)),
            (0, 1, fx * (1 - fy)),
            (1, 0, (1 - fx) * fy),
            (1, 1, fx * fy),
        ):
            yy, xx = y0 + dy_i, x0 + dx_i
            if 0 <= yy < length and 0 <= xx < length:
                kernel[yy, xx] += wgt
    total = kernel.sum()
    if total <= 0:
        kernel[int(centre), int(centre)] = 1.0
        total = 1.0
    return kernel / total


def _motion_blur(pixels: np.ndarray, length: int, degrees: float) -> np.ndarray:
    kernel = _motion_kernel(length, degrees)
    out = ndimage.convolve(pixels.astype(np.float64), kernel, mode="nearest")
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def _lowres(pixels: np.ndarray, factor: float) -> np.ndarray:
    from invizo.imaging.raster import resize_bilinear

    h, w = pixels.shape
    small_w = max(1, int(round(w / factor)))
    small_h = max(1, int(round(h / factor)))
    small = resize_bilinear(RasterImage(pixels), small_w, small_h)
    return resize_bilinear(small, w, h).pixels


def _gaussian_noise(
    pixels: np.ndarray, std: float, rng: np.random.Generator
) -> np.ndarray:
    noisy = pixels.astype(np.float64) + rng.normal(0.0, std, size=pixels.shape)
    return np.clip(np.round(noisy), 0, 255).astype(np.uint8)


def _salt_pepper(
    pixels: np.ndarray, rate: float, rng: np.random.Generator
) -> np.ndarray:
    hit = rng.random(pixels.shape) < rate
    flipped = np.where(pixels > 127, 0, 255).astype(np.uint8)
    return np.where(hit, flipped, pixels)


def augment(image: RasterImage, spec: AugmentSpec) -> RasterImage:
    """Apply the configured degradations in fixed order; new image out."""
    pixels = image.pixels
    if pixels.ndim != 2:
        raise ValueError("augment expects a grayscale image")
    rng = np.random.default_rng(spec.seed)
    out = pixels.copy()
    if spec.background is not None:
        out = _apply_background(out, spec)
    if spec.rotation_deg != 0.0:
        out = _rotate(out, spec.rotation_deg)
    if spec.motion_blur_len > 1:
        out = _motion_blur(out, spec.motion_blur_len, spec.motion_blur_deg)
    if spec.lowres_factor > 1.0:
        out = _lowres(out, spec.lowres_factor)
    if spec.noise_std > 0.0:
        out = _gaussian_noise(out, spec.noise_std, rng)
    if spec.salt_pepper_rate > 0.0:
        out = _salt_pepper(out, spec.salt_pepper_rate, rng)
    return RasterImage(out)
