"""Recognition and detection quality measures."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .enhancement import levenshtein

Quad = Sequence[Sequence[float]]


def cer(reference: str, hypothesis: str) -> float:
    """Character error rate: edit distance over reference length.

    An empty reference uses denominator 1, so cer("", h) == len(h).
    """
    return levenshtein(reference, hypothesis) / max(1, len(reference))


def wer(reference: str, hypothesis: str) -> float:
    """Word error rate: word-level edit distance over reference word count.

    Words are whitespace-separated.  The distance is a full edit distance
    (insertions, deletions, substitutions all cost 1).
    """
    ref_words = reference.split()
    hyp_words = hypothesis.split()
    return _word_distance(ref_words, hyp_words) / max(1, len(ref_words))


def _word_distance(a: list[str], b: list[str]) -> int:
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[lb]


# ---------------------------------------------------------------------------
# polygon geometry
# ---------------------------------------------------------------------------

def polygon_area(poly: Quad) -> float:
    """Unsigned shoelace area."""
    pts = np.asarray(poly, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def clip_polygon(subject: Quad, clip: Quad) -> np.ndarray:
    """Sutherland-Hodgman clip of `subject` against convex `clip`."""
    out = [tuple(map(float, p)) for p in subject]
    cl = np.asarray(clip, dtype=np.float64)
    orient = 1.0 if _signed_area(cl) >= 0 else -1.0
    n = len(cl)
    for i in range(n):
        if not out:
            break
        a = cl[i]
        b = cl[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]

        def side(p):
            return orient * (ex * (p[1] - a[1]) - ey * (p[0] - a[0]))

        cur = out
        out = []
        for j in range(len(cur)):
            p = cur[j]
            q = cur[(j + 1) % len(cur)]
            sp, sq = side(p), side(q)
            if sp >= 0:
                out.append(p)
                if sq < 0:
                    t = sp / (sp - sq)
                    out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            elif sq >= 0:
                t = sp / (sp - sq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return np.asarray(out, dtype=np.float64).reshape(-1, 2)


def polygon_iou(a: Quad, b: Quad) -> float:
    """Intersection-over-union via polygon clipping."""
    area_a = polygon_area(a)
    area_b = polygon_area(b)
    if area_a <= 0.0 and area_b <= 0.0:
        return 0.0
    inter_poly = clip_polygon(a, b)
    inter = polygon_area(inter_poly) if len(inter_poly) >= 3 else 0.0
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return max(0.0, min(1.0, inter / union))


# ---------------------------------------------------------------------------
# detection scoring
# ---------------------------------------------------------------------------

def detection_prf(
    gt_quads: Sequence[Quad],
    pred_quads: Sequence[Quad],
    iou_thresh: float = 0.5,
) -> tuple[float, float, float]:
    """Precision/recall/F1 under greedy one-to-one IoU matching.

    Pairs are considered in descending IoU order; each ground-truth and each
    prediction matches at most once, and only pairs at or above the threshold
    count.  Empty-vs-empty scores perfect (1, 1, 1).
    """
    n_gt, n_pred = len(gt_quads), len(pred_quads)
    if n_gt == 0 and n_pred == 0:
        return 1.0, 1.0, 1.0
    pairs = []
    for gi in range(n_gt):
        for pi in range(n_pred):
            iou = polygon_iou(gt_quads[gi], pred_quads[pi])
            if iou >= iou_thresh:
                pairs.append((iou, gi, pi))
    # ties resolve by lower indices for determinism
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_gt: set[int] = set()
    used_pred: set[int] = set()
    tp = 0
    for _, gi, pi in pairs:
        if gi in used_gt or pi in used_pred:
            continue
        used_gt.add(gi)
        used_pred.add(pi)
        tp += 1
    # no predictions -> nothing spurious; no ground truth -> nothing missed
    precision = tp / n_pred if n_pred else 1.0
    recall = tp / n_gt if n_gt else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1
