"""Scale-space keypoint detection on a difference-of-Gaussians pyramid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..imaging import RasterImage, to_grayscale
from ..imaging.filters import gaussian_blur_array

SIGMA_BASE = 1.6
SCALES_PER_OCTAVE = 3
ASSUMED_INPUT_BLUR = 0.5
CONTRAST_THRESH = 0.03  # on intensities normalized to [0, 1]
EDGE_RATIO = 10.0
DETECTION_BORDER = 5
MIN_IMAGE_DIM = 32
MAX_REFINE_STEPS = 5

ORI_BINS = 36
ORI_SIGMA_FACTOR = 1.5
ORI_RADIUS_FACTOR = 3.0


@dataclass
class Keypoint:
    """Detected feature: position and scale in full-resolution pixel
    coordinates, orientation in radians.  octave/layer record where in the
    pyramid it was found."""

    x: float
    y: float
    scale: float
    orientation: float
    response: float = 0.0
    octave: int = 0
    layer: int = 1


def _num_octaves(h: int, w: int) -> int:
    return max(1, int(math.floor(math.log2(min(h, w) / 8.0))) + 1)


def build_gaussian_pyramid(gray01: np.ndarray) -> list[list[np.ndarray]]:
    """Per octave, SCALES_PER_OCTAVE + 3 progressively blurred images."""
    k = 2.0 ** (1.0 / SCALES_PER_OCTAVE)
    sigmas = [SIGMA_BASE * k**i for i in range(SCALES_PER_OCTAVE + 3)]
    first = math.sqrt(max(SIGMA_BASE**2 - ASSUMED_INPUT_BLUR**2, 0.01))
    img = gaussian_blur_array(gray01.astype(np.float64), first)
    octaves: list[list[np.ndarray]] = []
    for _ in range(_num_octaves(*gray01.shape)):
        layers = [img]
        for i in range(1, len(sigmas)):
            inc = math.sqrt(sigmas[i] ** 2 - sigmas[i - 1] ** 2)
            layers.append(gaussian_blur_array(layers[-1], inc))
        octaves.append(layers)
        img = layers[SCALES_PER_OCTAVE][::2, ::2]
        if min(img.shape) < 8:
            break
    return octaves


def build_dog_pyramid(gaussians: list[list[np.ndarray]]) -> list[list[np.ndarray]]:
    return [[o[i + 1] - o[i] for i in range(len(o) - 1)] for o in gaussians]


def _extrema_candidates(dogs: list[np.ndarray], layer: int, border: int):
    """Integer positions where dog[layer] beats all 26 neighbors."""
    prev, cur, nxt = dogs[layer - 1], dogs[layer], dogs[layer + 1]
    h, w = cur.shape
    if h <= 2 * border or w <= 2 * border:
        return np.empty(0, int), np.empty(0, int)
    c = cur[1:-1, 1:-1]
    neighbors = []
    for plane_i, plane in enumerate((prev, cur, nxt)):
        for dy in range(3):
            for dx in range(3):
                if plane_i == 1 and dy == 1 and dx == 1:
                    continue
                neighbors.append(plane[dy : dy + h - 2, dx : dx + w - 2])
    stack = np.stack(neighbors)
    pre = 0.8 * CONTRAST_THRESH
    hits = ((c > stack.max(axis=0)) & (c >= pre)) | ((c < stack.min(axis=0)) & (c <= -pre))
    ys, xs = np.nonzero(hits)
    ys = ys + 1
    xs = xs + 1
    keep = (
        (ys >= border)
        & (ys < h - border)
        & (xs >= border)
        & (xs < w - border)
    )
    return ys[keep], xs[keep]


def _refine_extremum(dogs: list[np.ndarray], layer: int, y: int, x: int):
    """Quadratic sub-pixel localization; returns None when it diverges."""
    h, w = dogs[0].shape
    n_layers = len(dogs)
    for _ in range(MAX_REFINE_STEPS):
        prev, cur, nxt = dogs[layer - 1], dogs[layer], dogs[layer + 1]
        g = 0.5 * np.array(
            [
                cur[y, x + 1] - cur[y, x - 1],
                cur[y + 1, x] - cur[y - 1, x],
                nxt[y, x] - prev[y, x],
            ]
        )
        dxx = cur[y, x + 1] - 2 * cur[y, x] + cur[y, x - 1]
        dyy = cur[y + 1, x] - 2 * cur[y, x] + cur[y - 1, x]
        dss = nxt[y, x] - 2 * cur[y, x] + prev[y, x]
        dxy = 0.25 * (cur[y + 1, x + 1] - cur[y + 1, x - 1] - cur[y - 1, x + 1] + cur[y - 1, x - 1])
        dxs = 0.25 * (nxt[y, x + 1] - nxt[y, x - 1] - prev[y, x + 1] + prev[y, x - 1])
        dys = 0.25 * (nxt[y + 1, x] - nxt[y - 1, x] - prev[y + 1, x] + prev[y - 1, x])
        hess = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
        try:
            offset = -np.linalg.solve(hess, g)
        except np.linalg.LinAlgError:
            return None
        if np.all(np.abs(offset) < 0.5):
            value = cur[y, x] + 0.5 * float(g @ offset)
            return x, y, layer, offset, value, (dxx, dyy, dxy)
        x += int(round(float(offset[0])))
        y += int(round(float(offset[1])))
        layer += int(round(float(offset[2])))
        if (
            layer < 1
            or layer > n_layers - 2
            or x < DETECTION_BORDER
            or x >= w - DETECTION_BORDER
            or y < DETECTION_BORDER
            or y >= h - DETECTION_BORDER
        ):
            return None
    return None


def _passes_edge_test(dxx: float, dyy: float, dxy: float) -> bool:
    tr = dxx + dyy
    det = dxx * dyy - dxy * dxy
    if det <= 0:
        return False
    r = EDGE_RATIO
    return tr * tr / det < (r + 1.0) ** 2 / r


def _dominant_orientation(image: np.ndarray, x: int, y: int, sigma_oct: float) -> float:
    """Peak of the Gaussian-weighted gradient-orientation histogram."""
    sig = ORI_SIGMA_FACTOR * sigma_oct
    radius = max(1, int(round(ORI_RADIUS_FACTOR * sig)))
    h, w = image.shape
    x0, x1 = max(1, x - radius), min(w - 2, x + radius)
    y0, y1 = max(1, y - radius), min(h - 2, y + radius)
    if x1 < x0 or y1 < y0:
        return 0.0
    xs, ys = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    dx = image[ys, xs + 1] - image[ys, xs - 1]
    dy = image[ys + 1, xs] - image[ys - 1, xs]
    mag = np.hypot(dx, dy)
    ang = np.arctan2(dy, dx)  # image coordinates, y down
    weight = np.exp(-((xs - x) ** 2 + (ys - y) ** 2) / (2.0 * sig * sig)) * mag
    bins = np.round(ang / (2.0 * np.pi / ORI_BINS)).astype(int) % ORI_BINS
    hist = np.zeros(ORI_BINS)
    np.add.at(hist, bins.ravel(), weight.ravel())
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    for _ in range(2):
        hist = np.convolve(np.concatenate([hist[-2:], hist, hist[:2]]), kernel, mode="valid")
    peak = int(np.argmax(hist))
    left = hist[(peak - 1) % ORI_BINS]
    right = hist[(peak + 1) % ORI_BINS]
    denom = left - 2.0 * hist[peak] + right
    shift = 0.0 if abs(denom) < 1e-12 else 0.5 * (left - right) / denom
    angle = (peak + shift) * (2.0 * np.pi / ORI_BINS)
    return float(angle % (2.0 * np.pi))


def detect_keypoints(img: RasterImage) -> list[Keypoint]:
    """Find scale-space extrema.  Images smaller than 32 px per side yield
    an empty list.  Output is sorted by (octave, y, x) and deterministic."""
    if min(img.width, img.height) < MIN_IMAGE_DIM:
        return []
    gray = to_grayscale(img).pixels.astype(np.float64) / 255.0
    gaussians = build_gaussian_pyramid(gray)
    dog = build_dog_pyramid(gaussians)
    found: list[Keypoint] = []
    seen: set[tuple[int, int, int, int]] = set()
    for o, dogs in enumerate(dog):
        for layer in range(1, len(dogs) - 1):
            ys, xs = _extrema_candidates(dogs, layer, DETECTION_BORDER)
            for y0, x0 in zip(ys.tolist(), xs.tolist()):
                ref = _refine_extremum(dogs, layer, y0, x0)
                if ref is None:
                    continue
                x, y, l, offset, value, hess2 = ref
                if abs(value) < CONTRAST_THRESH:
                    continue
                if not _passes_edge_test(*hess2):
                    continue
                key = (o, l, y, x)
                if key in seen:
                    continue
                seen.add(key)
                sigma_oct = SIGMA_BASE * 2.0 ** ((l + float(offset[2])) / SCALES_PER_OCTAVE)
                ori = _dominant_orientation(gaussians[o][l], x, y, sigma_oct)
                scale_factor = float(2**o)
                found.append(
                    Keypoint(
                        x=(x + float(offset[0])) * scale_factor,
                        y=(y + float(offset[1])) * scale_factor,
                        scale=sigma_oct * scale_factor,
                        orientation=ori,
                        response=abs(value),
                        octave=o,
                        layer=l,
                    )
                )
    found.sort(key=lambda kp: (kp.octave, kp.y, kp.x))
    return found
