"""128-dimensional gradient-histogram descriptors for detected keypoints."""

from __future__ import annotations

import numpy as np

from ..imaging import RasterImage, to_grayscale
from .keypoints import Keypoint, build_gaussian_pyramid, SCALES_PER_OCTAVE, SIGMA_BASE

DESCR_GRID = 4          # spatial bins per side
DESCR_ORI_BINS = 8
DESCR_SCALE_FACTOR = 3.0  # histogram cell width in units of keypoint scale
DESCR_CLIP = 0.2
_EPS = 1e-12


def _descriptor_for(image: np.ndarray, x: float, y: float, sigma: float, orientation: float):
    """Build one 4x4x8 histogram, or None when the window leaves the image."""
    h, w = image.shape
    cos_t = np.cos(-orientation)
    sin_t = np.sin(-orientation)
    hist_width = DESCR_SCALE_FACTOR * sigma
    radius = int(round(hist_width * np.sqrt(2.0) * (DESCR_GRID + 1.0) * 0.5))
    xi, yi = int(round(x)), int(round(y))
    if xi - radius < 1 or xi + radius >= w - 1 or yi - radius < 1 or yi + radius >= h - 1:
        return None

    cols, rows = np.meshgrid(np.arange(-radius, radius + 1), np.arange(-radius, radius + 1))
    # rotate offsets into the keypoint frame and express them in cell units
    col_rot = (cols * cos_t - rows * sin_t) / hist_width
    row_rot = (cols * sin_t + rows * cos_t) / hist_width
    rbin = row_rot + DESCR_GRID / 2.0 - 0.5
    cbin = col_rot + DESCR_GRID / 2.0 - 0.5
    inside = (rbin > -1.0) & (rbin < DESCR_GRID) & (cbin > -1.0) & (cbin < DESCR_GRID)

    ys = yi + rows
    xs = xi + cols
    dx = image[ys, xs + 1] - image[ys, xs - 1]
    dy = image[ys + 1, xs] - image[ys - 1, xs]
    mag = np.hypot(dx, dy)
    ang = np.arctan2(dy, dx) + orientation  # gradient angle relative to keypoint
    weight = np.exp(-(row_rot**2 + col_rot**2) / (0.5 * DESCR_GRID**2))

    rb = rbin[inside].ravel()
    cb = cbin[inside].ravel()
    m = (mag * weight)[inside].ravel()
    ob = (ang[inside].ravel() % (2 * np.pi)) / (2 * np.pi / DESCR_ORI_BINS)

    if rb.size == 0:
        return None

    hist = np.zeros((DESCR_GRID + 2, DESCR_GRID + 2, DESCR_ORI_BINS))
    r0 = np.floor(rb).astype(int)
    c0 = np.floor(cb).astype(int)
    o0 = np.floor(ob).astype(int)
    fr = rb - r0
    fc = cb - c0
    fo = ob - o0
    for dr in (0, 1):
        wr = m * (fr if dr else 1 - fr)
        for dc in (0, 1):
            wc = wr * (fc if dc else 1 - fc)
            for do in (0, 1):
                wo = wc * (fo if do else 1 - fo)
                np.add.at(
                    hist,
                    (r0 + dr + 1, c0 + dc + 1, (o0 + do) % DESCR_ORI_BINS),
                    wo,
                )
    vec = hist[1:-1, 1:-1, :].ravel()
    norm = np.linalg.norm(vec)
    if norm < _EPS:
        return None
    vec = np.minimum(vec / norm, DESCR_CLIP)
    norm = np.linalg.norm(vec)
    if norm < _EPS:
        return None
    return vec / norm


def compute_descriptors(
    img: RasterImage, keypoints: list[Keypoint]
) -> tuple[np.ndarray, list[int]]:
    """Descriptors for `keypoints` (as produced by detect_keypoints on the
    same image).

    Keypoints whose sampling window exits the image, or that sit on flat
    texture, are skipped; the returned index list maps descriptor row i back
    to keypoints[index[i]].
    """
    gray = to_grayscale(img).pixels.astype(np.float64) / 255.0
    gaussians = build_gaussian_pyramid(gray)
    vecs: list[np.ndarray] = []
    kept: list[int] = []
    for i, kp in enumerate(keypoints):
        if kp.octave >= len(gaussians):
            continue
        octave_imgs = gaussians[kp.octave]
        layer = min(max(kp.layer, 0), len(octave_imgs) - 1)
        image = octave_imgs[layer]
        factor = float(2**kp.octave)
        vec = _descriptor_for(
            image,
            kp.x / factor,
            kp.y / factor,
            kp.scale / factor,
            kp.orientation,
        )
        if vec is None:
            continue
        vecs.append(vec)
        kept.append(i)
    if not vecs:
        return np.zeros((0, DESCR_GRID * DESCR_GRID * DESCR_ORI_BINS)), []
    return np.stack(vecs), kept
