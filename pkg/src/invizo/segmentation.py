"""Text-region segmentation.

Two detector backends share the LineBox output shape: a probability-map
post-processor (for maps produced by an external detection model) and a
classical projection-profile line splitter for use inside already-located
field crops.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imaging import RasterImage

APPROX_BINARY_K = 50.0
BIN_THRESH = 0.3
BOX_THRESH = 0.6
UNCLIP_RATIO = 1.5
MIN_AREA_PX = 16

INK_DENSITY_THRESH = 0.02
SMOOTH_WINDOW = 5
MIN_LINE_GAP = 3
LINE_EXPAND_PX = 2


class SegmentationError(Exception):
    pass


@dataclass
class ProbabilityMap:
    """Float32 per-pixel text probability in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise SegmentationError(f"probability map must be 2-D, got shape {v.shape}")
        if v.size and (float(v.min()) < 0.0 or float(v.max()) > 1.0):
            raise SegmentationError("probability values must lie in [0, 1]")
        self.values = v

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @staticmethod
    def from_file(path: str) -> "ProbabilityMap":
        """Read the raw format: uint32 width, uint32 height (little endian),
        then width*height float32 little endian, row-major."""
        with open(path, "rb") as fh:
            header = fh.read(8)
            if len(header) != 8:
                raise SegmentationError(f"{path}: truncated header")
            w, h = struct.unpack("<II", header)
            data = fh.read()
        expected = w * h * 4
        if len(data) != expected:
            raise SegmentationError(
                f"{path}: expected {expected} payload bytes for {w}x{h}, got {len(data)}"
            )
        values = np.frombuffer(data, dtype="<f4").reshape(h, w)
        return ProbabilityMap(values.copy())

    def to_file(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<II", self.width, self.height))
            fh.write(self.values.astype("<f4").tobytes())


@dataclass
class LineBox:
    """One detected text region: a 4-point quad plus a confidence score."""

    quad: list[tuple[float, float]]
    score: float = 1.0


# ---------------------------------------------------------------------------
# differentiable-binarization style post-processing
# ---------------------------------------------------------------------------

def approx_binary_map(prob: ProbabilityMap, k: float = APPROX_BINARY_K, thresh: float = BIN_THRESH) -> np.ndarray:
    """Soft binarization 1 / (1 + exp(-k (P - thresh)))."""
    p = prob.values.astype(np.float64)
    return 1.0 / (1.0 + np.exp(-k * (p - thresh)))


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone chain; returns hull vertices counter-clockwise (y up)."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _min_area_rect(points: np.ndarray) -> tuple[np.ndarray, float, float, float]:
    """Minimum-area enclosing rotated rectangle.

    Returns (corners[4, 2], width, height, angle); the optimum is aligned
    with one of the hull edges, so each edge direction is tried in turn.
    """
    hull = _convex_hull(points)
    if len(hull) == 1:
        p = hull[0]
        return np.array([p, p, p, p], dtype=np.float64), 0.0, 0.0, 0.0
    best = None
    n = len(hull)
    for i in range(n):
        e = hull[(i + 1) % n] - hull[i]
        norm = float(np.hypot(e[0], e[1]))
        if norm < 1e-12:
            continue
        ux, uy = e[0] / norm, e[1] / norm
        rot = np.array([[ux, uy], [-uy, ux]])
        proj = hull @ rot.T
        lo = proj.min(axis=0)
        hi = proj.max(axis=0)
        w, h = float(hi[0] - lo[0]), float(hi[1] - lo[1])
        area = w * h
        if best is None or area < best[0] - 1e-12:
            corners_local = np.array(
                [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
            )
            corners = corners_local @ rot
            best = (area, corners, w, h, float(np.arctan2(uy, ux)))
    assert best is not None
    return best[1], best[2], best[3], best[4]


def _expand_rect(corners: np.ndarray, delta: float) -> np.ndarray:
    """Push each rectangle side outward by delta (same center and angle)."""
    center = corners.mean(axis=0)
    out = np.empty_like(corners)
    for i in range(4):
        prev_edge = corners[i] - corners[i - 1]
        next_edge = corners[(i + 1) % 4] - corners[i]
        # unit directions away from the center along both incident edges
        d = np.zeros(2)
        for e in (prev_edge, next_edge):
            n = float(np.hypot(e[0], e[1]))
            if n > 1e-12:
                d = d + e / n * np.sign(np.dot(corners[i] - center, e / n))
        out[i] = corners[i] + delta * d
    return out


def box_formation(
    prob: ProbabilityMap,
    bin_thresh: float = BIN_THRESH,
    box_thresh: float = BOX_THRESH,
    unclip_ratio: float = UNCLIP_RATIO,
    min_area_px: int = MIN_AREA_PX,
) -> list[LineBox]:
    """Turn a probability map into scored, unclipped text boxes.

    Pixels at or above bin_thresh form 8-connected components; each scores
    the mean probability over its pixels.  Components below box_thresh or
    smaller than min_area_px are dropped.  Survivors get their minimum-area
    rotated rectangle, pushed outward by area * unclip_ratio / perimeter.
    Output is ordered top-to-bottom, ties right-to-left.
    """
    p = prob.values
    mask = p >= bin_thresh
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    boxes: list[LineBox] = []
    h, w = p.shape
    for idx in range(1, count + 1):
        comp = labels == idx
        area_px = int(comp.sum())
        if area_px < min_area_px:
            continue
        score = float(p[comp].mean())
        if score < box_thresh:
            continue
        ys, xs = np.nonzero(comp)
        # treat each pixel as a unit square: corners, not centers
        pts = np.concatenate(
            [
                np.stack([xs, ys], axis=1),
                np.stack([xs + 1, ys], axis=1),
                np.stack([xs, ys + 1], axis=1),
                np.stack([xs + 1, ys + 1], axis=1),
            ]
        ).astype(np.float64)
        corners, rw, rh, _ = _min_area_rect(pts)
        rect_area = rw * rh
        perimeter = 2.0 * (rw + rh)
        if perimeter > 1e-9:
            delta = rect_area * unclip_ratio / perimeter
            corners = _expand_rect(corners, delta)
        corners[:, 0] = np.clip(corners[:, 0], 0.0, float(w))
        corners[:, 1] = np.clip(corners[:, 1], 0.0, float(h))
        boxes.append(LineBox([(float(x), float(y)) for x, y in corners], score))
    boxes.sort(
        key=lambda b: (
            sum(pt[1] for pt in b.quad) / 4.0,
            -sum(pt[0] for pt in b.quad) / 4.0,
        )
    )
    return boxes


# ---------------------------------------------------------------------------
# projection-profile line segmentation
# ---------------------------------------------------------------------------

def segment_lines_projection(
    img: RasterImage,
    ink_thresh: float = INK_DENSITY_THRESH,
    smooth_window: int = SMOOTH_WINDOW,
    min_gap: int = MIN_LINE_GAP,
    expand_px: int = LINE_EXPAND_PX,
) -> list[LineBox]:
    """Split a binarized crop (ink=0 on 255) into horizontal line bands.

    Row ink density is smoothed, rows above ink_thresh become active, and
    active runs separated by fewer than min_gap quiet rows merge.  Each band
    yields the tight ink bounding box expanded by expand_px and clamped.
    """
    if img.channels != 1:
        raise SegmentationError("line segmentation expects a grayscale image")
    ink = img.pixels == 0
    h, w = ink.shape
    if h == 0 or w == 0:
        return []
    density = ink.mean(axis=1).astype(np.float64)
    if smooth_window > 1:
        kernel = np.ones(smooth_window)
        num = np.convolve(density, kernel, mode="same")
        den = np.convolve(np.ones(h), kernel, mode="same")
        density = num / den
    active = density > ink_thresh
    runs: list[list[int]] = []
    r = 0
    while r < h:
        if active[r]:
            r0 = r
            while r < h and active[r]:
                r += 1
            runs.append([r0, r - 1])
        else:
            r += 1
    # a gap shorter than min_gap does not separate lines
    merged: list[list[int]] = []
    for run in runs:
        if merged and run[0] - merged[-1][1] - 1 < min_gap:
            merged[-1][1] = run[1]
        else:
            merged.append(run)
    boxes: list[LineBox] = []
    for r0, r1 in merged:
        band = ink[r0 : r1 + 1]
        ys, xs = np.nonzero(band)
        if xs.size == 0:
            continue
        y0 = max(0, r0 + int(ys.min()) - expand_px)
        y1 = min(h, r0 + int(ys.max()) + 1 + expand_px)
        x0 = max(0, int(xs.min()) - expand_px)
        x1 = min(w, int(xs.max()) + 1 + expand_px)
        quad = [(float(x0), float(y0)), (float(x1), float(y0)), (float(x1), float(y1)), (float(x0), float(y1))]
        boxes.append(LineBox(quad, 1.0))
    return boxes
