"""Planar homography estimation: normalized DLT inside a RANSAC loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RegistrationError(Exception):
    pass


class InsufficientCorrespondences(RegistrationError):
    """Fewer than the 4 point pairs a homography needs."""


class RegistrationFailed(RegistrationError):
    """RANSAC could not find a model with enough inliers."""


class PointAtInfinity(RegistrationError):
    """Projection produced a homogeneous w of (nearly) zero."""


@dataclass
class RansacConfig:
    iterations: int = 2000
    inlier_px: float = 3.0
    min_inliers: int = 8
    seed: int = 42
    confidence: float = 0.995


@dataclass
class HomographyResult:
    matrix: np.ndarray          # 3x3, normalized so h33 == 1
    inlier_mask: np.ndarray     # bool per correspondence
    n_inliers: int
    mean_error: float           # symmetric transfer error over inliers, px


def _normalization(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    d = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    s = np.sqrt(2.0) / d if d > 1e-12 else 1.0
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def dlt_homography(pts_a: np.ndarray, pts_b: np.ndarray) -> np.ndarray | None:
    """Direct linear transform with Hartley normalization.

    Returns the 3x3 matrix mapping pts_a -> pts_b with h33 = 1, or None for
    degenerate configurations.
    """
    n = len(pts_a)
    ta = _normalization(pts_a)
    tb = _normalization(pts_b)
    an = (ta @ np.column_stack([pts_a, np.ones(n)]).T).T
    bn = (tb @ np.column_stack([pts_b, np.ones(n)]).T).T
    rows = []
    for (x, y, _), (u, v, _) in zip(an, bn):
        rows.append([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u])
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
    a = np.asarray(rows)
    try:
        _, s, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError:
        return None
    h = vt[-1].reshape(3, 3)
    if n > 4 and s[-2] < 1e-12:  # rank collapse: points do not pin a model
        return None
    hn = np.linalg.inv(tb) @ h @ ta
    if abs(hn[2, 2]) < 1e-12:
        return None
    return hn / hn[2, 2]


def project_points(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Apply a homography to an (n, 2) point array."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    homog = np.column_stack([pts, np.ones(len(pts))]) @ np.asarray(h, dtype=np.float64).T
    w = homog[:, 2]
    if np.any(np.abs(w) < 1e-12):
        raise PointAtInfinity("homogeneous coordinate vanished during projection")
    return homog[:, :2] / w[:, None]


def _symmetric_errors(h: np.ndarray, h_inv: np.ndarray, pts_a, pts_b) -> np.ndarray:
    fwd = project_points(h, pts_a) - pts_b
    bwd = project_points(h_inv, pts_b) - pts_a
    e_fwd = np.sqrt((fwd**2).sum(axis=1))
    e_bwd = np.sqrt((bwd**2).sum(axis=1))
    return np.maximum(e_fwd, e_bwd)


def _refine_transfer(
    h: np.ndarray, pts_a: np.ndarray, pts_b: np.ndarray, iterations: int = 8
) -> np.ndarray:
    """Gauss-Newton refinement of the forward transfer error.

    The DLT minimizes an algebraic proxy; a few Gauss-Newton steps on
    sum ||H(a_i) - b_i||^2 (the maximum-likelihood objective for noisy
    destination coordinates) tighten the worst-point error.  Returns the
    best matrix found; falls back to the input on numerical trouble.
    """
    x, y = pts_a[:, 0], pts_a[:, 1]
    u, v = pts_b[:, 0], pts_b[:, 1]
    zeros = np.zeros_like(x)
    ones = np.ones_like(x)

    def residual(p: np.ndarray):
        den = p[6] * x + p[7] * y + 1.0
        if np.any(np.abs(den) < 1e-12):
            return None
        fx = (p[0] * x + p[1] * y + p[2]) / den
        fy = (p[3] * x + p[4] * y + p[5]) / den
        return np.concatenate([fx - u, fy - v]), fx, fy, den

    best = (h / h[2, 2]).ravel()[:8].copy()
    state = residual(best)
    if state is None:
        return h
    best_sse = float(state[0] @ state[0])
    p = best.copy()
    for _ in range(iterations):
        state = residual(p)
        if state is None:
            break
        r, fx, fy, den = state
        jac_x = np.column_stack(
            [x / den, y / den, ones / den, zeros, zeros, zeros,
             -fx * x / den, -fx * y / den]
        )
        jac_y = np.column_stack(
            [zeros, zeros, zeros, x / den, y / den, ones / den,
             -fy * x / den, -fy * y / den]
        )
        jac = np.vstack([jac_x, jac_y])
        try:
            delta, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        except np.linalg.LinAlgError:
            break
        p = p + delta
        probe = residual(p)
        if probe is None:
            break
        sse = float(probe[0] @ probe[0])
        if sse < best_sse:
            best_sse = sse
            best = p.copy()
        if np.abs(delta).max() < 1e-12:
            break
    return np.append(best, 1.0).reshape(3, 3)


def _sample_is_degenerate(pts: np.ndarray) -> bool:
    """True when any 3 of the 4 points are (nearly) collinear."""
    for skip in range(4):
        tri = np.delete(pts, skip, axis=0)
        area = 0.5 * abs(
            (tri[1, 0] - tri[0, 0]) * (tri[2, 1] - tri[0, 1])
            - (tri[2, 0] - tri[0, 0]) * (tri[1, 1] - tri[0, 1])
        )
        if area < 1e-6:
            return True
    return False


def estimate_homography(
    pts_a: np.ndarray,
    pts_b: np.ndarray,
    config: RansacConfig | None = None,
) -> HomographyResult:
    """Robustly estimate the homography mapping pts_a onto pts_b.

    Classic RANSAC with 4-point minimal samples, symmetric transfer error
    and a confidence-based early exit, followed by a DLT refit on the full
    inlier set.  Deterministic for a fixed seed.
    """
    cfg = config or RansacConfig()
    pa = np.asarray(pts_a, dtype=np.float64).reshape(-1, 2)
    pb = np.asarray(pts_b, dtype=np.float64).reshape(-1, 2)
    if len(pa) != len(pb):
        raise ValueError("point arrays differ in length")
    n = len(pa)
    if n < 4:
        raise InsufficientCorrespondences(f"need at least 4 correspondences, got {n}")

    rng = np.random.default_rng(cfg.seed)
    best_mask: np.ndarray | None = None
    best_count = 0
    best_err = np.inf
    max_iters = cfg.iterations
    it = 0
    while it < max_iters:
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        sample_a, sample_b = pa[idx], pb[idx]
        if _sample_is_degenerate(sample_a) or _sample_is_degenerate(sample_b):
            continue
        h = dlt_homography(sample_a, sample_b)
        if h is None:
            continue
        try:
            h_inv = np.linalg.inv(h)
        except np.linalg.LinAlgError:
            continue
        try:
            errors = _symmetric_errors(h, h_inv, pa, pb)
        except PointAtInfinity:
            continue
        mask = errors <= cfg.inlier_px
        count = int(mask.sum())
        err = float(errors[mask].sum()) if count else np.inf
        if count > best_count or (count == best_count and err < best_err):
            best_mask = mask
            best_count = count
            best_err = err
            # adaptive iteration bound given the inlier ratio seen so far
            w = count / n
            if 0.0 < w < 1.0:
                denom = np.log(1.0 - w**4) if w**4 < 1.0 else -np.inf
                if denom < 0:
                    needed = int(np.ceil(np.log(1.0 - cfg.confidence) / denom))
                    max_iters = min(max_iters, max(it, needed))
            elif w >= 1.0:
                max_iters = it

    if best_mask is None or best_count < max(4, cfg.min_inliers):
        raise RegistrationFailed(
            f"best model has {best_count} inliers, need {cfg.min_inliers}"
        )

    def _refit(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
        h = dlt_homography(pa[mask], pb[mask])
        if h is None:
            return None
        try:
            h_inv = np.linalg.inv(h)
            return h, _symmetric_errors(h, h_inv, pa, pb)
        except (np.linalg.LinAlgError, PointAtInfinity):
            return None

    floor = max(4, cfg.min_inliers)
    fitted = _refit(best_mask)
    if fitted is None:
        raise RegistrationFailed("inlier refit degenerate")
    h, errors = fitted
    fit_mask = best_mask
    # polish: alternate least-squares refit and inlier reselection until the
    # consensus stabilizes, so true correspondences dropped by a noisy
    # minimal-sample model are recovered before the final fit
    for _ in range(10):
        new_mask = errors <= cfg.inlier_px
        if (new_mask == fit_mask).all() or int(new_mask.sum()) < floor:
            break
        refitted = _refit(new_mask)
        if refitted is None:
            break
        h, errors = refitted
        fit_mask = new_mask
    mask = errors <= cfg.inlier_px
    count = int(mask.sum())
    if count < floor:
        raise RegistrationFailed(f"refit keeps {count} inliers, need {cfg.min_inliers}")
    refined = _refine_transfer(h, pa[mask], pb[mask])
    try:
        refined_inv = np.linalg.inv(refined)
        refined_errors = _symmetric_errors(refined, refined_inv, pa, pb)
    except (np.linalg.LinAlgError, PointAtInfinity):
        refined_errors = None
    if refined_errors is not None and int((refined_errors <= cfg.inlier_px).sum()) >= count:
        h, errors = refined, refined_errors
        mask = errors <= cfg.inlier_px
        count = int(mask.sum())
    return HomographyResult(
        matrix=h,
        inlier_mask=mask,
        n_inliers=count,
        mean_error=float(errors[mask].mean()),
    )
