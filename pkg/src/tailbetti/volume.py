"""Volumes of unions of equal balls, and void probabilities over them."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["union_area_2d", "union_volume_mc", "void_product"]

_TWO_PI = 2 * math.pi


def union_area_2d(centers, r: float) -> float:
    """Exact area of a union of discs of common radius ``r``.

    Green's theorem over the uncovered boundary arcs: each arc from angle
    ``a`` to ``b`` on the circle about ``(cx, cy)`` contributes
    ``(r^2 (b - a) + r cx (sin b - sin a) - r cy (cos b - cos a)) / 2``.
    """
    C = np.unique(np.asarray(centers, dtype=float).reshape(-1, 2), axis=0)
    if r <= 0 or len(C) == 0:
        return 0.0
    area = 0.0
    for a, (cx, cy) in enumerate(C):
        cover = []
        for b, (ox, oy) in enumerate(C):
            if a == b:
                continue
            dx, dy = ox - cx, oy - cy
            dist = math.hypot(dx, dy)
            if dist >= 2 * r:
                continue
            mid = math.atan2(dy, dx)
            half = math.acos(dist / (2 * r))
            lo = (mid - half) % _TWO_PI
            hi = lo + 2 * half
            if hi > _TWO_PI:
                cover.append((lo, _TWO_PI))
                cover.append((0.0, hi - _TWO_PI))
            else:
                cover.append((lo, hi))
        cover.sort()
        free = []
        pos = 0.0
        for lo, hi in cover:
            if lo > pos:
                free.append((pos, lo))
            pos = max(pos, hi)
        if pos < _TWO_PI:
            free.append((pos, _TWO_PI))
        for lo, hi in free:
            area += 0.5 * (
                r * r * (hi - lo)
                + r * cx * (math.sin(hi) - math.sin(lo))
                - r * cy * (math.cos(hi) - math.cos(lo))
            )
    return area


def union_volume_mc(centers, r: float, n_points: int, gen: np.random.Generator, batch: int = 4096):
    """Hit-or-miss volume of a union of balls in its bounding box.

    Returns ``(estimate, stderr)``.
    """
    C = np.asarray(centers, dtype=float)
    lo, hi = C.min(axis=0) - r, C.max(axis=0) + r
    box = float(np.prod(hi - lo))
    hits = 0
    done = 0
    while done < n_points:
        m = min(batch, n_points - done)
        Z = lo + (hi - lo) * gen.random((m, C.shape[1]))
        d2 = np.sum((Z[:, None, :] - C[None, :, :]) ** 2, axis=2)
        hits += int(np.count_nonzero(np.min(d2, axis=1) < r * r))
        done += m
    p = hits / n_points
    return box * p, box * math.sqrt(max(p * (1 - p), 0.0) / n_points)


def void_product(centers, r: float, rate: float, gen: np.random.Generator, budget: int = 4096, drift=None) -> float:
    """Unbiased estimate of ``exp(-rate * int_U w(z) dz)``.

    ``U`` is the union of balls of radius ``r`` about ``centers`` and
    ``w(z) = exp(-<drift, z>)`` (``w = 1`` without ``drift``).  A Poisson
    process of constant intensity ``m * rate * max w`` is laid on the
    bounding box and each point ``z`` in ``U`` contributes the factor
    ``1 - w(z) / (m * max w)``; the probability generating functional makes
    the product's expectation exactly the target.  ``m`` is chosen so the
    expected point count is about ``budget``.
    """
    if rate <= 0:
        return 1.0
    C = np.asarray(centers, dtype=float)
    lo, hi = C.min(axis=0) - r, C.max(axis=0) + r
    box = float(np.prod(hi - lo))
    if drift is None:
        w_max = 1.0
    else:
        u = np.asarray(drift, dtype=float)
        w_max = math.exp(float(np.sum(np.maximum(-u * lo, -u * hi))))
    base = rate * w_max * box
    m = max(1.0, budget / base)
    K = gen.poisson(m * base)
    if K == 0:
        return 1.0
    Z = lo + (hi - lo) * gen.random((K, C.shape[1]))
    inside = np.min(np.sum((Z[:, None, :] - C[None, :, :]) ** 2, axis=2), axis=1) < r * r
    if not np.any(inside):
        return 1.0
    Zi = Z[inside]
    w = np.ones(len(Zi)) if drift is None else np.exp(-Zi @ np.asarray(drift, dtype=float))
    frac = w / (m * w_max)
    if np.any(frac >= 1.0):
        return 0.0
    return float(np.exp(np.sum(np.log1p(-frac))))
