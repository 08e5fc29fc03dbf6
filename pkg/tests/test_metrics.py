import numpy as np
import pytest

from invizo.metrics import cer, wer, polygon_area, polygon_iou, clip_polygon, detection_prf


# ---------------------------------------------------------------------------
# cer / wer
# ---------------------------------------------------------------------------

def test_cer_identical():
    assert cer("الاسم الكامل", "الاسم الكامل") == 0.0


def test_cer_single_sub():
    assert cer("abc", "abd") == pytest.approx(1 / 3)


def test_cer_empty_reference():
    assert cer("", "") == 0.0
    assert cer("", "ab") == 2.0


def test_cer_insert_delete():
    assert cer("kitten", "sitting") == pytest.approx(3 / 6)


def test_wer_identical():
    assert wer("الاسم الكامل", "الاسم الكامل") == 0.0


def test_wer_one_word_of_two():
    assert wer("الاسم الكامل", "الاسم الناقص") == 0.5


def test_wer_insertion():
    assert wer("a b", "a x b") == 0.5


def test_wer_empty_reference():
    assert wer("", "") == 0.0
    assert wer("", "a b c") == 3.0


def test_wer_is_full_edit_distance():
    # two substitutions beat delete-all-insert-all
    assert wer("a b c d", "a x c y") == 0.5


# ---------------------------------------------------------------------------
# polygon iou
# ---------------------------------------------------------------------------

def _square(x, y, s):
    return [(x, y), (x + s, y), (x + s, y + s), (x, y + s)]


def test_area_unit_square():
    assert polygon_area(_square(0, 0, 1)) == 1.0


def test_area_winding_independent():
    sq = _square(0, 0, 2)
    assert polygon_area(sq) == polygon_area(list(reversed(sq))) == 4.0


def test_iou_identical():
    assert polygon_iou(_square(0, 0, 4), _square(0, 0, 4)) == pytest.approx(1.0)


def test_iou_disjoint():
    assert polygon_iou(_square(0, 0, 1), _square(5, 5, 1)) == 0.0


def test_iou_half_overlap():
    # unit squares sharing half their area: inter 0.5, union 1.5
    a = _square(0, 0, 1)
    b = [(0.5, 0), (1.5, 0), (1.5, 1), (0.5, 1)]
    assert polygon_iou(a, b) == pytest.approx(1 / 3)


def test_iou_contained():
    assert polygon_iou(_square(0, 0, 4), _square(1, 1, 2)) == pytest.approx(4 / 16)


def test_clip_rotated():
    # 45-degree square inscribed in the unit square
    diamond = [(0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5)]
    inter = clip_polygon(diamond, _square(0, 0, 1))
    assert polygon_area(inter) == pytest.approx(0.5)


def _point_in_poly(px, py, poly):
    """Ray casting, independent of the clipping code."""
    n = len(poly)
    inside = np.zeros(px.shape, dtype=bool)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        crosses = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (x2 - x1) * (py - y1) / (y2 - y1) + x1
        inside ^= crosses & (px < xint)
    return inside


def _mc_iou(a, b, n=200_000, seed=0):
    pts = np.concatenate([np.asarray(a, float), np.asarray(b, float)])
    lo, hi = pts.min(0) - 1, pts.max(0) + 1
    rng = np.random.default_rng(seed)
    xs = rng.uniform(lo[0], hi[0], n)
    ys = rng.uniform(lo[1], hi[1], n)
    in_a = _point_in_poly(xs, ys, a)
    in_b = _point_in_poly(xs, ys, b)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union


def _random_convex_quad(rng):
    cx, cy = rng.uniform(2, 8, 2)
    w, h = rng.uniform(1, 4, 2)
    th = rng.uniform(0, np.pi)
    c, s = np.cos(th), np.sin(th)
    base = np.array([[-w, -h], [w, -h], [w, h], [-w, h]])
    rot = base @ np.array([[c, -s], [s, c]])
    return [(cx + x, cy + y) for x, y in rot]


def test_iou_matches_monte_carlo():
    rng = np.random.default_rng(123)
    for i in range(8):
        a = _random_convex_quad(rng)
        b = _random_convex_quad(rng)
        exact = polygon_iou(a, b)
        approx = _mc_iou(a, b, seed=i)
        assert abs(exact - approx) < 0.01


# ---------------------------------------------------------------------------
# detection prf
# ---------------------------------------------------------------------------

def test_prf_perfect():
    gt = [_square(0, 0, 10), _square(20, 0, 10)]
    assert detection_prf(gt, list(gt)) == (1.0, 1.0, 1.0)


def test_prf_one_missed():
    gt = [_square(0, 0, 10), _square(20, 0, 10)]
    pred = [_square(0, 0, 10)]
    p, r, f = detection_prf(gt, pred)
    assert (p, r) == (1.0, 0.5)
    assert f == pytest.approx(2 / 3)


def test_prf_one_spurious():
    gt = [_square(0, 0, 10)]
    pred = [_square(0, 0, 10), _square(40, 40, 5)]
    p, r, f = detection_prf(gt, pred)
    assert (p, r) == (0.5, 1.0)


def test_prf_below_threshold_no_match():
    gt = [_square(0, 0, 10)]
    pred = [_square(8, 8, 10)]  # small overlap, iou << 0.5
    assert detection_prf(gt, pred) == (0.0, 0.0, 0.0)


def test_prf_empty_both():
    assert detection_prf([], []) == (1.0, 1.0, 1.0)


def test_prf_empty_gt():
    assert detection_prf([], [_square(0, 0, 1)]) == (0.0, 1.0, 0.0)


def test_prf_empty_pred():
    assert detection_prf([_square(0, 0, 1)], []) == (1.0, 0.0, 0.0)


def test_prf_one_to_one_matching():
    # two predictions both overlapping one gt: only one may match
    gt = [_square(0, 0, 10)]
    pred = [_square(0, 0, 10), _square(1, 1, 10)]
    p, r, f = detection_prf(gt, pred)
    assert p == 0.5 and r == 1.0


def test_prf_permutation_invariant():
    rng = np.random.default_rng(7)
    gt = [_random_convex_quad(rng) for _ in range(5)]
    pred = [_random_convex_quad(rng) for _ in range(6)]
    base = detection_prf(gt, pred)
    perm = rng.permutation(len(pred))
    shuffled = [pred[i] for i in perm]
    assert detection_prf(gt, shuffled) == base
