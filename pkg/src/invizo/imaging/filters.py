"""Denoising, blurring and binarization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import RasterImage, ImagingError

# fast non-local means defaults, chosen to tame scan noise without washing out strokes
FNLM_PATCH_RADIUS = 3
FNLM_SEARCH_RADIUS = 10
FNLM_H = 10.0

OTSU_FALLBACK_THRESHOLD = 127


# ---------------------------------------------------------------------------
# gaussian blur
# ---------------------------------------------------------------------------

def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ImagingError(f"sigma must be positive, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur_array(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur on a float plane, reflected borders."""
    from scipy.ndimage import convolve1d

    k = gaussian_kernel_1d(sigma)
    out = plane.astype(np.float64)
    out = convolve1d(out, k, axis=1, mode="mirror")
    out = convolve1d(out, k, axis=0, mode="mirror")
    return out


def gaussian_blur(img: RasterImage, sigma: float) -> RasterImage:
    """Gaussian blur; channels are filtered independently."""
    px = img.pixels.astype(np.float64)
    if img.channels == 1:
        out = gaussian_blur_array(px, sigma)
    else:
        out = np.stack([gaussian_blur_array(px[:, :, c], sigma) for c in range(3)], axis=2)
    return RasterImage(np.round(out).clip(0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# fast non-local means
# ---------------------------------------------------------------------------

def _box_sum(arr: np.ndarray, radius: int) -> np.ndarray:
    """Sum over a (2r+1)^2 window via integral image; input must carry r of padding."""
    c = np.cumsum(np.cumsum(arr, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    size = 2 * radius + 1
    h = arr.shape[0] - 2 * radius
    w = arr.shape[1] - 2 * radius
    return (
        c[size : size + h, size : size + w]
        - c[size : size + h, 0:w]
        - c[0:h, size : size + w]
        + c[0:h, 0:w]
    )


def _fnlm_weights(gray: np.ndarray, patch_radius: int, search_radius: int, h: float):
    """Yield (dy, dx, weights, shifted_values, valid_mask) for every search offset.

    Weights use K(x, y) = exp(-d2(x, y) / h^2) where d2 is the mean squared
    patch difference normalized by 2 (two independent noise realizations per
    pair), so h is on the scale of the per-pixel noise level.
    """
    H, W = gray.shape
    pr, sr = patch_radius, search_radius
    n_patch = (2 * pr + 1) ** 2
    pad = np.pad(gray, pr + sr, mode="reflect")
    denom = 2.0 * n_patch * h * h
    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            a = pad[sr : sr + H + 2 * pr, sr : sr + W + 2 * pr]
            b = pad[sr + dy : sr + dy + H + 2 * pr, sr + dx : sr + dx + W + 2 * pr]
            ssd = _box_sum((a - b) ** 2, pr)
            w = np.exp(-ssd / denom)
            # the search window is clamped to the frame: neighbors that would
            # fall outside contribute nothing
            valid = np.zeros((H, W), dtype=bool)
            y0, y1 = max(0, -dy), H - max(0, dy)
            x0, x1 = max(0, -dx), W - max(0, dx)
            if y0 < y1 and x0 < x1:
                valid[y0:y1, x0:x1] = True
            shifted = np.zeros((H, W))
            if y0 < y1 and x0 < x1:
                shifted[y0:y1, x0:x1] = gray[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
            yield dy, dx, np.where(valid, w, 0.0), shifted, valid


def fnlm_denoise(
    img: RasterImage,
    patch_radius: int = FNLM_PATCH_RADIUS,
    search_radius: int = FNLM_SEARCH_RADIUS,
    h: float = FNLM_H,
) -> RasterImage:
    """Fast non-local means: each pixel becomes a patch-similarity-weighted
    average over its search window."""
    if img.channels != 1:
        raise ImagingError("fnlm_denoise expects a grayscale image")
    gray = img.pixels.astype(np.float64)
    num = np.zeros_like(gray)
    den = np.zeros_like(gray)
    for _, _, w, shifted, _ in _fnlm_weights(gray, patch_radius, search_radius, h):
        num += w * shifted
        den += w
    out = num / den
    return RasterImage(np.round(out).clip(0, 255).astype(np.uint8))


def fnlm_normalized_weight_sum(
    img: RasterImage,
    patch_radius: int = FNLM_PATCH_RADIUS,
    search_radius: int = FNLM_SEARCH_RADIUS,
    h: float = FNLM_H,
) -> np.ndarray:
    """Re-accumulate K(x,y)/C(x) over the window; should be 1 everywhere.

    Exists so tests can check the kernel normalization independently of the
    averaging pass.
    """
    gray = img.pixels.astype(np.float64)
    den = np.zeros_like(gray)
    weights = []
    for _, _, w, _, _ in _fnlm_weights(gray, patch_radius, search_radius, h):
        den += w
        weights.append(w)
    total = np.zeros_like(gray)
    for w in weights:
        total += w / den
    return total


# ---------------------------------------------------------------------------
# binarization
# ---------------------------------------------------------------------------

@dataclass
class BinarizeResult:
    image: RasterImage
    threshold: int
    used_fallback: bool = False


def otsu_threshold(gray: np.ndarray) -> tuple[int, bool]:
    """Maximum between-class-variance threshold on the 256-bin histogram.

    Returns (threshold, used_fallback); a constant image has no separating
    threshold, in which case 127 is reported with the fallback flag set.
    """
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    p = hist / total
    omega0 = np.cumsum(p)
    mu_t = np.cumsum(p * np.arange(256))
    mu_total = mu_t[-1]
    best_t, best_var = None, 0.0
    for t in range(1, 256):
        w0 = omega0[t - 1]
        w1 = 1.0 - w0
        if w0 <= 0.0 or w1 <= 0.0:
            continue
        mu0 = mu_t[t - 1] / w0
        mu1 = (mu_total - mu_t[t - 1]) / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var + 1e-12:
            best_var = var
            best_t = t
    if best_t is None:
        return OTSU_FALLBACK_THRESHOLD, True
    return best_t, False


def binarize(img: RasterImage, threshold: int | None = None) -> BinarizeResult:
    """Threshold to {0, 255}.  threshold=None selects it by Otsu's method.

    Pixels >= threshold map to 255.  Dark ink on a light page therefore ends
    up as ink=0 on background=255.
    """
    if img.channels != 1:
        raise ImagingError("binarize expects a grayscale image")
    gray = img.pixels
    fallback = False
    if threshold is None:
        threshold, fallback = otsu_threshold(gray)
    elif not (0 <= threshold <= 255):
        raise ImagingError(f"threshold out of range: {threshold}")
    out = np.where(gray >= threshold, 255, 0).astype(np.uint8)
    return BinarizeResult(RasterImage(out), int(threshold), fallback)
