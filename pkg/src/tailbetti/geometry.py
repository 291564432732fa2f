"""Euclidean primitives used to decide Čech simplex membership.

A set of points spans a Čech simplex at scale ``t`` iff the open balls of
radius ``t/2`` around them share a point, i.e. iff the smallest enclosing
ball of the set has radius strictly below ``t/2``.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

__all__ = [
    "as_points",
    "min_enclosing_ball",
    "min_enclosing_ball_radius",
    "meb_radius_enumerate",
    "meb_radius_batch",
    "diameter",
    "min_norm",
]

_CONTAIN_RTOL = 1e-12


def as_points(pts, allow_empty: bool = False) -> np.ndarray:
    """Coerce ``pts`` to a finite ``(m, d)`` float array."""
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(0, 0) if arr.size == 0 else arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected an (m, d) array of points, got shape {arr.shape}")
    if arr.shape[0] == 0 and not allow_empty:
        raise ValueError("empty point set")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def _circumball(S: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest ball with every row of ``S`` on its boundary, centre in aff(S).

    Affinely dependent sets (duplicates, collinear triples) fall back to the
    least-squares centre; callers only use the result as a candidate.
    """
    p0 = S[0]
    if len(S) == 1:
        return p0.copy(), 0.0
    U = S[1:] - p0
    rhs = 0.5 * np.einsum("ij,ij->i", U, U)
    lam = np.linalg.lstsq(U @ U.T, rhs, rcond=None)[0]
    c = p0 + lam @ U
    return c, float(np.sqrt(np.max(np.sum((S - c) ** 2, axis=1))))


def _contains(c: np.ndarray, r: float, p: np.ndarray) -> bool:
    return float(np.sqrt(np.sum((p - c) ** 2))) <= r * (1 + _CONTAIN_RTOL) + 1e-300


def min_enclosing_ball(pts) -> tuple[np.ndarray, float]:
    """Smallest enclosing ball by Welzl's move-to-front recursion.

    Deterministic for a fixed input order.  Intended for the small sets that
    occur as Čech simplices (at most ``d + 2`` points), though any size works.

    Returns
    -------
    center : (d,) ndarray
    radius : float
    """
    P = as_points(pts)
    d = P.shape[1]
    order = list(range(len(P)))

    def mtf(n: int, boundary: list[int]) -> tuple[np.ndarray, float]:
        if boundary:
            c, r = _circumball(P[boundary])
        else:
            c, r = P[order[0]].copy(), 0.0
        if len(boundary) == d + 1:
            return c, r
        for idx in range(n):
            p = order[idx]
            if not _contains(c, r, P[p]):
                c, r = mtf(idx, boundary + [p])
                # move-to-front keeps later passes short
                order.insert(0, order.pop(idx))
        return c, r

    c, r = mtf(len(P), [])
    # Guard against round-off in the final support set.
    r = max(r, float(np.sqrt(np.max(np.sum((P - c) ** 2, axis=1)))))
    return c, r


def min_enclosing_ball_radius(pts) -> float:
    """Radius of the smallest enclosing ball of ``pts``."""
    return min_enclosing_ball(pts)[1]


def meb_radius_enumerate(pts) -> float:
    """Smallest enclosing ball radius by exhaustive support-set enumeration.

    The optimal centre is the affine circumcentre of some affinely
    independent subset of at most ``d + 1`` points, so the minimum over all
    subsets of the farthest-point distance from each candidate centre is
    exact.  Exponential in ``len(pts)``; used as an oracle.
    """
    P = as_points(pts)
    m, d = P.shape
    best = np.inf
    for s in range(1, min(m, d + 1) + 1):
        for sub in combinations(range(m), s):
            c, _ = _circumball(P[list(sub)])
            best = min(best, float(np.sqrt(np.max(np.sum((P - c) ** 2, axis=1)))))
    return best


def _batch_circumcentres(S: np.ndarray) -> np.ndarray:
    """Circumcentres for a batch ``S`` of shape ``(N, s, d)``."""
    p0 = S[:, 0, :]
    if S.shape[1] == 1:
        return p0
    U = S[:, 1:, :] - p0[:, None, :]
    G = U @ np.swapaxes(U, 1, 2)
    rhs = 0.5 * np.einsum("nij,nij->ni", U, U)
    det = np.linalg.det(G)
    scale = np.prod(np.einsum("nii->ni", G), axis=1)
    ok = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
    lam = np.zeros_like(rhs)
    if np.any(ok):
        lam[ok] = np.linalg.solve(G[ok], rhs[ok][..., None])[..., 0]
    if not np.all(ok):
        bad = ~ok
        lam[bad] = (np.linalg.pinv(G[bad]) @ rhs[bad][..., None])[..., 0]
    return p0 + np.einsum("ni,nid->nd", lam, U)


def meb_radius_batch(P: np.ndarray) -> np.ndarray:
    """Vectorised smallest-enclosing-ball radii for ``P`` of shape ``(N, m, d)``.

    Same enumeration as :func:`meb_radius_enumerate`, applied to all ``N``
    point sets at once.  Cost grows like ``2**m`` so keep ``m <= d + 2``.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 3 or P.shape[1] == 0:
        raise ValueError(f"expected (N, m, d) with m >= 1, got {P.shape}")
    N, m, d = P.shape
    best = np.full(N, np.inf)
    for s in range(1, min(m, d + 1) + 1):
        for sub in combinations(range(m), s):
            c = _batch_circumcentres(P[:, list(sub), :])
            far = np.sqrt(np.max(np.sum((P - c[:, None, :]) ** 2, axis=2), axis=1))
            np.minimum(best, far, out=best)
    return best


def diameter(pts) -> float:
    """Largest pairwise distance; 0 for a single point."""
    P = as_points(pts)
    diff = P[:, None, :] - P[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff**2, axis=2))))


def min_norm(pts) -> float:
    """Smallest Euclidean norm among the points."""
    P = as_points(pts)
    return float(np.min(np.linalg.norm(P, axis=1)))
