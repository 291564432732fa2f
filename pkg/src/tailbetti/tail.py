"""Betti numbers of the Čech complex on the points outside a centred ball.

Besides the tail Betti curve this module provides the component census
``J[(i, j)]`` (components with ``i`` vertices and ``beta_k = j``), truncated
Betti numbers, the count ``G`` of (k+2)-point subsets carrying a minimal
k-cycle, the count ``L`` of connected (k+3)-point subsets, and the exact
sandwich ``J[(k+2, 1)] <= beta <= J[(k+2, 1)] + C(k+3, k+1) * L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .cech import build_cech_filtered, components, edge_pairs, minimal_cycle_indicator
from .cech import SimplicialComplex
from .density import PointCloud
from .homology import betti

__all__ = [
    "CapacityError",
    "DEFAULT_CAP",
    "TailBettiCurve",
    "ComponentProfile",
    "tail_points",
    "tail_betti_curve",
    "tail_betti",
    "component_profile",
    "truncated_betti",
    "minimal_cycle_count",
    "connected_subset_count",
    "sandwich_check",
]

DEFAULT_CAP = 10**6


class CapacityError(RuntimeError):
    """A combinatorial enumeration would exceed its configured cap."""


@dataclass
class TailBettiCurve:
    t_grid: np.ndarray
    values: np.ndarray
    n: int
    R: float
    k: int

    def to_rows(self):
        return [(float(t), int(b)) for t, b in zip(self.t_grid, self.values)]


@dataclass
class ComponentProfile:
    """Census of tail components at one scale, keyed by ``(size, beta_k)``."""

    counts: dict
    t: float
    R: float
    k: int
    n: int = 0

    def beta(self) -> int:
        return sum(j * c for (i, j), c in self.counts.items() if i >= self.k + 2 and j >= 1)

    def to_rows(self):
        return [(i, j, c) for (i, j), c in sorted(self.counts.items())]


def _check_k(k: int, d: int):
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in 1..d-1 = 1..{d - 1}, got {k}")


def tail_points(cloud: PointCloud, R: float) -> PointCloud:
    """Points with ``|x| >= R`` (the complement of the open ball), ids kept."""
    if R < 0:
        raise ValueError("R must be non-negative")
    keep = cloud.norms() >= R
    return PointCloud(cloud.points[keep], seed=cloud.seed, ids=cloud.ids[keep])


def _subcomplex(simplices, births, t: float, dim_cap: int) -> SimplicialComplex:
    layers = [simplices[0]] + [[s for s, b in zip(L, B) if b < t] for L, B in zip(simplices[1:], births[1:])]
    return SimplicialComplex(vertices=tuple(v for (v,) in simplices[0]), simplices=layers, dim_cap=dim_cap, t=t)


def tail_betti_curve(cloud: PointCloud, R: float, k: int, t_grid) -> TailBettiCurve:
    """``beta_k`` of the tail complex at each scale of ``t_grid``.

    The complex is enumerated once at the largest scale with birth times;
    each grid value filters it and sums ``beta_k`` over the components.
    """
    _check_k(k, cloud.d)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    tail = tail_points(cloud, R)
    values = np.zeros(len(t_grid), dtype=np.int64)
    if len(tail) >= k + 2 and len(t_grid):
        t_max = float(t_grid[-1])
        decomp = components(tail.points, t_max, ids=tail.ids)
        for members, ids in zip(decomp.members, decomp.ids):
            if len(members) < k + 2:
                continue
            simplices, births = build_cech_filtered(tail.points[members], k + 1, t_max, ids)
            # a non-zero k-cycle needs at least k + 2 k-simplices
            if len(simplices[k]) < k + 2:
                continue
            for g, t in enumerate(t_grid):
                if t > 0:
                    values[g] += betti(_subcomplex(simplices, births, t, k + 1), k)
    return TailBettiCurve(t_grid=t_grid, values=values, n=len(cloud), R=float(R), k=k)


def tail_betti(cloud: PointCloud, R: float, k: int, t: float) -> int:
    if t == 0:
        return 0
    return int(tail_betti_curve(cloud, R, k, [t]).values[0])


def component_profile(cloud: PointCloud, R: float, k: int, t: float) -> ComponentProfile:
    """Exact ``(size, beta_k)`` census of the tail components at scale ``t``."""
    _check_k(k, cloud.d)
    tail = tail_points(cloud, R)
    counts: dict = {}
    decomp = components(tail.points, t, ids=tail.ids)
    for members, ids in zip(decomp.members, decomp.ids):
        i = len(members)
        j = 0
        if i >= k + 2 and t > 0:
            simplices, births = build_cech_filtered(tail.points[members], k + 1, t, ids)
            j = betti(_subcomplex(simplices, births, t, k + 1), k)
        counts[(i, j)] = counts.get((i, j), 0) + 1
    return ComponentProfile(counts=counts, t=float(t), R=float(R), k=k, n=len(cloud))


def truncated_betti(profile: ComponentProfile, M: int) -> int:
    """Cycles carried by components of at most ``M`` vertices."""
    k = profile.k
    if M < k + 2:
        raise ValueError(f"truncation level M must be >= k+2 = {k + 2}")
    return sum(j * c for (i, j), c in profile.counts.items() if k + 2 <= i <= M and j >= 1)


def _adjacency(P: np.ndarray, t: float) -> list[set]:
    adj = [set() for _ in range(len(P))]
    for a, b in edge_pairs(P, t):
        adj[a].add(int(b))
        adj[b].add(int(a))
    return adj


def minimal_cycle_count(cloud: PointCloud, R: float, k: int, t: float, cap: int = DEFAULT_CAP) -> int:
    """Number of (k+2)-subsets ``Y`` of tail points with ``C(Y, t)``
    connected and ``beta_k = 1``.

    Such a subset is the hollow boundary of a (k+1)-simplex, so its points
    are pairwise within ``t``; candidates are the (k+2)-cliques of the
    distance graph, which never cross components.
    """
    _check_k(k, cloud.d)
    tail = tail_points(cloud, R)
    if len(tail) < k + 2 or t <= 0:
        return 0
    P = tail.points
    adj = _adjacency(P, t)
    fwd = [sorted(u for u in nb if u > v) for v, nb in enumerate(adj)]
    cliques: list[tuple] = []

    def grow(clique, cand):
        if len(clique) == k + 2:
            cliques.append(clique)
            if len(cliques) > cap:
                raise CapacityError(f"more than {cap} candidate ({k + 2})-subsets at t={t}")
            return
        for v in cand:
            grow(clique + (v,), [u for u in cand if u > v and u in adj[v]])

    for v in range(len(P)):
        grow((v,), fwd[v])
    if not cliques:
        return 0
    hit = minimal_cycle_indicator(P[np.asarray(cliques)], t)
    return int(np.count_nonzero(hit))


def connected_subset_count(P: np.ndarray, t: float, size: int, cap: int = DEFAULT_CAP) -> int:
    """Number of ``size``-subsets whose distance-``< t`` graph is connected.

    Enumerates connected induced subgraphs directly (ESU scheme), so the
    cost tracks the answer rather than ``C(n, size)``.
    """
    adj = _adjacency(np.asarray(P, dtype=float), t) if len(P) else []
    count = 0

    def extend(sub_size, ext, root, closed):
        nonlocal count
        if sub_size == size:
            count += 1
            if count > cap:
                raise CapacityError(f"more than {cap} connected {size}-subsets at t={t}")
            return
        ext = set(ext)
        while ext:
            w = ext.pop()
            fresh = {u for u in adj[w] if u > root and u not in closed}
            extend(sub_size + 1, ext | fresh, root, closed | adj[w] | {w})

    for v in range(len(adj)):
        extend(1, {u for u in adj[v] if u > v}, v, adj[v] | {v})
    return count


def sandwich_check(cloud: PointCloud, R: float, k: int, t: float, cap: int = DEFAULT_CAP):
    """Return ``(J_min, beta, L, holds)``.

    ``J_min`` counts components that are themselves a minimal k-cycle,
    ``L`` the connected (k+3)-subsets of the tail.
    """
    profile = component_profile(cloud, R, k, t)
    J_min = profile.counts.get((k + 2, 1), 0)
    beta = profile.beta()
    L = connected_subset_count(tail_points(cloud, R).points, t, k + 3, cap) if t > 0 else 0
    holds = J_min <= beta <= J_min + comb(k + 3, k + 1) * L
    return J_min, beta, L, holds
