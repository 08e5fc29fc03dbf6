"""Brute-force descriptor matching with mutual-nearest cross-checking."""

from __future__ import annotations

import numpy as np


def match_descriptors(desc_a: np.ndarray, desc_b: np.ndarray) -> list[tuple[int, int, float]]:
    """Match rows of desc_a against rows of desc_b by L2 distance.

    A pair (i, j) survives only if j is i's nearest neighbor and vice versa
    (cross-check).  Distance ties resolve to the lower index, which argmin
    already guarantees.  Result is sorted by the first index.
    """
    a = np.asarray(desc_a, dtype=np.float64)
    b = np.asarray(desc_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or (a.size and b.size and a.shape[1] != b.shape[1]):
        raise ValueError("descriptor arrays must be 2-D with matching width")
    if a.shape[0] == 0 or b.shape[0] == 0:
        return []
    # squared distances via the expansion |u - v|^2 = |u|^2 + |v|^2 - 2 u.v
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    nearest_b = np.argmin(sq, axis=1)
    nearest_a = np.argmin(sq, axis=0)
    matches = []
    for i, j in enumerate(nearest_b.tolist()):
        if nearest_a[j] == i:
            # recompute the survivor's distance directly: the expansion above
            # carries cancellation noise that matters for exact-zero cases
            matches.append((i, j, float(np.linalg.norm(a[i] - b[j]))))
    return matches
