import math
import struct

import numpy as np
import pytest

from invizo.imaging import RasterImage
from invizo.metrics import polygon_iou
from invizo.segmentation import (
    ProbabilityMap,
    LineBox,
    SegmentationError,
    approx_binary_map,
    box_formation,
    segment_lines_projection,
)


# ---------------------------------------------------------------------------
# probability map container and file format
# ---------------------------------------------------------------------------

def test_prob_map_validates_range():
    with pytest.raises(SegmentationError):
        ProbabilityMap(np.array([[0.5, 1.2]], dtype=np.float32))
    with pytest.raises(SegmentationError):
        ProbabilityMap(np.array([[-0.1]], dtype=np.float32))


def test_prob_map_requires_2d():
    with pytest.raises(SegmentationError):
        ProbabilityMap(np.zeros((2, 2, 2), dtype=np.float32))


def test_prob_map_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    pm = ProbabilityMap(rng.random((12, 20)).astype(np.float32))
    p = str(tmp_path / "m.bin")
    pm.to_file(p)
    back = ProbabilityMap.from_file(p)
    assert back.width == 20 and back.height == 12
    assert np.array_equal(back.values, pm.values)


def test_prob_map_file_layout(tmp_path):
    # hand-built file: 3 wide, 2 high, row-major float32 little endian
    vals = [0.0, 0.25, 0.5, 0.75, 1.0, 0.125]
    raw = struct.pack("<II", 3, 2) + struct.pack("<6f", *vals)
    p = tmp_path / "hand.bin"
    p.write_bytes(raw)
    pm = ProbabilityMap.from_file(str(p))
    assert pm.values.shape == (2, 3)
    assert pm.values[0, 1] == pytest.approx(0.25)
    assert pm.values[1, 2] == pytest.approx(0.125)


def test_prob_map_truncated_file(tmp_path):
    p = tmp_path / "short.bin"
    p.write_bytes(struct.pack("<II", 4, 4) + b"\x00" * 10)
    with pytest.raises(SegmentationError):
        ProbabilityMap.from_file(str(p))


# ---------------------------------------------------------------------------
# approximate binary map
# ---------------------------------------------------------------------------

def test_abm_midpoint_is_half():
    pm = ProbabilityMap(np.full((4, 4), 0.3, dtype=np.float32))
    b = approx_binary_map(pm, k=50.0, thresh=0.3)
    assert np.allclose(b, 0.5, atol=1e-12)


def test_abm_saturates():
    pm = ProbabilityMap(np.array([[0.0, 1.0]], dtype=np.float32))
    b = approx_binary_map(pm)
    assert b[0, 0] < 1e-6
    assert b[0, 1] > 1 - 1e-6


def test_abm_matches_scalar_oracle():
    rng = np.random.default_rng(3)
    vals = rng.random((9, 7)).astype(np.float32)
    b = approx_binary_map(ProbabilityMap(vals), k=50.0, thresh=0.3)
    for (i, j), p in np.ndenumerate(vals.astype(np.float64)):
        expected = 1.0 / (1.0 + math.exp(-50.0 * (p - 0.3)))
        assert abs(b[i, j] - expected) < 1e-12


def test_abm_monotone_and_bounded():
    rng = np.random.default_rng(4)
    a = np.sort(rng.random(50)).astype(np.float32).reshape(1, -1)
    b = approx_binary_map(ProbabilityMap(a))
    assert np.all(np.diff(b[0]) >= 0)
    assert np.all((b >= 0) & (b <= 1))


# ---------------------------------------------------------------------------
# box formation
# ---------------------------------------------------------------------------

def _blob_map(h=80, w=100, rows=(30, 40), cols=(20, 60), p=0.9):
    vals = np.zeros((h, w), dtype=np.float32)
    vals[rows[0] : rows[1], cols[0] : cols[1]] = p
    return ProbabilityMap(vals)


def test_box_formation_empty():
    assert box_formation(ProbabilityMap(np.zeros((32, 32), dtype=np.float32))) == []


def test_box_formation_single_blob_analytic():
    # 40x10 blob: rect area 400, perimeter 100, offset = 400*1.5/100 = 6
    boxes = box_formation(_blob_map())
    assert len(boxes) == 1
    assert boxes[0].score == pytest.approx(0.9, abs=1e-6)
    expected = [(14.0, 24.0), (66.0, 24.0), (66.0, 46.0), (14.0, 46.0)]
    assert polygon_iou(boxes[0].quad, expected) > 0.99


def test_box_formation_low_score_dropped():
    assert box_formation(_blob_map(p=0.5)) == []


def test_box_formation_small_area_dropped():
    vals = np.zeros((32, 32), dtype=np.float32)
    vals[10:13, 10:14] = 0.9  # 12 px < 16
    assert box_formation(ProbabilityMap(vals)) == []


def test_box_formation_order_top_then_rtl():
    vals = np.zeros((100, 100), dtype=np.float32)
    vals[10:20, 10:40] = 0.9   # top
    vals[60:70, 5:35] = 0.9    # bottom-left
    vals[60:70, 60:90] = 0.9   # bottom-right
    boxes = box_formation(ProbabilityMap(vals))
    assert len(boxes) == 3
    cys = [sum(p[1] for p in b.quad) / 4 for b in boxes]
    cxs = [sum(p[0] for p in b.quad) / 4 for b in boxes]
    assert cys[0] < cys[1] == pytest.approx(cys[2])
    assert cxs[1] > cxs[2]  # right-to-left within the bottom row


def test_box_formation_clamped_to_bounds():
    boxes = box_formation(_blob_map(h=44, w=64, rows=(2, 12), cols=(2, 62)))
    assert len(boxes) == 1
    xs = [p[0] for p in boxes[0].quad]
    ys = [p[1] for p in boxes[0].quad]
    assert min(xs) >= 0 and max(xs) <= 64
    assert min(ys) >= 0 and max(ys) <= 44


def test_box_formation_thresh_monotonicity():
    vals = np.zeros((60, 60), dtype=np.float32)
    vals[5:15, 5:55] = 0.65
    vals[30:40, 5:55] = 0.95
    pm = ProbabilityMap(vals)
    counts = [len(box_formation(pm, box_thresh=t)) for t in (0.4, 0.7, 0.99)]
    assert counts == sorted(counts, reverse=True)
    assert counts[0] == 2 and counts[1] == 1


def test_box_formation_eight_connectivity():
    vals = np.zeros((40, 40), dtype=np.float32)
    for i in range(12):  # diagonal chain of touching pixels, plus bulk for area
        vals[10 + i, 10 + i] = 0.9
        vals[11 + i, 10 + i] = 0.9
    boxes = box_formation(ProbabilityMap(vals), min_area_px=16)
    assert len(boxes) == 1


# ---------------------------------------------------------------------------
# projection-profile line segmentation
# ---------------------------------------------------------------------------

def _page(h=60, w=80):
    return np.full((h, w), 255, dtype=np.uint8)


def test_projection_blank():
    assert segment_lines_projection(RasterImage(_page())) == []


def test_projection_two_bands():
    px = _page()
    px[10:16, 8:70] = 0
    px[30:37, 12:60] = 0
    boxes = segment_lines_projection(RasterImage(px))
    assert len(boxes) == 2
    (x0, y0), _, (x1, y1), _ = boxes[0].quad[0], boxes[0].quad[1], boxes[0].quad[2], boxes[0].quad[3]
    assert y0 == 8.0 and y1 == 18.0  # 10-2, 15+1+2
    assert x0 == 6.0 and x1 == 72.0
    assert boxes[0].score == 1.0
    assert boxes[1].quad[0][1] == 28.0


def test_projection_small_gap_merges():
    px = _page()
    px[10:14, 10:70] = 0
    px[15:19, 10:70] = 0  # 1-row gap at 14
    boxes = segment_lines_projection(RasterImage(px), smooth_window=1)
    assert len(boxes) == 1


def test_projection_band_at_top_edge():
    px = _page()
    px[0:5, 5:75] = 0
    boxes = segment_lines_projection(RasterImage(px))
    assert len(boxes) == 1
    assert boxes[0].quad[0][1] == 0.0


def test_projection_boxes_in_bounds():
    rng = np.random.default_rng(5)
    px = _page(100, 50)
    for r in (0, 20, 40, 60, 80):
        px[r : r + 8, :] = np.where(rng.random((8, 50)) < 0.5, 0, 255)
    for b in segment_lines_projection(RasterImage(px)):
        for x, y in b.quad:
            assert 0 <= x <= 50 and 0 <= y <= 100


def test_projection_faint_speckle_ignored():
    px = _page()
    px[20, 40] = 0  # single ink pixel: density 1/80 < 2% after smoothing
    assert segment_lines_projection(RasterImage(px)) == []
