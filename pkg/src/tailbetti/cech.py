"""Čech complexes on finite point sets.

An ``m``-subset spans a simplex at scale ``t`` iff its smallest enclosing
ball has radius ``< t/2`` (open balls of radius ``t/2`` meet).  Edges are
therefore exactly the pairs at distance ``< t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .geometry import as_points, meb_radius_batch

__all__ = [
    "SimplicialComplex",
    "ComponentDecomposition",
    "UnionFind",
    "build_cech",
    "build_cech_filtered",
    "components",
    "cech_scaling_check",
    "minimal_cycle_pm",
    "minimal_cycle_indicator",
    "edge_pairs",
]


@dataclass
class SimplicialComplex:
    """Simplices grouped by dimension, each a sorted tuple of vertex ids.

    ``simplices[m]`` lists the m-simplices for ``m = 0 .. dim_cap``.
    """

    vertices: tuple
    simplices: list
    dim_cap: int
    t: Optional[float] = None

    def counts(self) -> list[int]:
        return [len(s) for s in self.simplices]

    def simplex_set(self) -> set:
        return {s for layer in self.simplices for s in layer}

    def is_downward_closed(self) -> bool:
        present = self.simplex_set()
        for layer in self.simplices[1:]:
            for s in layer:
                for face in combinations(s, len(s) - 1):
                    if face not in present:
                        return False
        return True


@dataclass
class ComponentDecomposition:
    """Vertex partition by connectivity at scale ``t``.

    ``members`` holds, per component, the positions (rows of the point
    array) in ascending order; ``ids`` the matching original point ids.
    """

    members: list
    ids: list
    t: float
    complexes: list = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def sizes(self) -> list[int]:
        return [len(m) for m in self.members]


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_sets = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_sets -= 1
        return True


def edge_pairs(P: np.ndarray, t: float) -> np.ndarray:
    """All index pairs ``(i, j)``, ``i < j``, with ``|P_i - P_j| < t``."""
    if t <= 0 or len(P) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = cKDTree(P).query_pairs(t, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    dist = np.linalg.norm(P[pairs[:, 0]] - P[pairs[:, 1]], axis=1)
    pairs = pairs[dist < t]
    pairs.sort(axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def components(pts, t: float, ids=None) -> ComponentDecomposition:
    """Connected components of the graph with edges at distance ``< t``."""
    P = as_points(pts, allow_empty=True)
    if t < 0:
        raise ValueError("scale t must be non-negative")
    n = len(P)
    uf = UnionFind(n)
    for a, b in edge_pairs(P, t):
        uf.union(int(a), int(b))
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(uf.find(v), []).append(v)
    members = sorted(groups.values(), key=lambda g: g[0])
    ids = np.arange(n) if ids is None else np.asarray(ids)
    return ComponentDecomposition(
        members=[np.asarray(m, dtype=np.int64) for m in members],
        ids=[ids[np.asarray(m, dtype=np.int64)] for m in members],
        t=float(t),
    )


def build_cech_filtered(pts, dim_cap: int, t_max: float, ids=None):
    """All simplices of dimension ``<= dim_cap`` present at scale ``t_max``,
    each with its birth scale (twice its enclosing radius).

    A simplex is present at ``t <= t_max`` iff ``birth < t``.  Returns
    ``(simplices, births)``: per dimension a list of id tuples and a float
    array of births.  Vertices have birth 0 and are present for every t >= 0.
    """
    P = as_points(pts, allow_empty=True)
    n, d = P.shape
    if dim_cap < 0:
        raise ValueError("dim_cap must be non-negative")
    if d and dim_cap > d + 1:
        raise ValueError(f"dim_cap={dim_cap} exceeds d+1={d + 1}")
    ids = np.arange(n) if ids is None else np.asarray(ids)
    order = np.argsort(ids, kind="stable")
    P, ids = P[order], ids[order]

    simplices = [[(int(i),) for i in ids]]
    births = [np.zeros(n)]
    if dim_cap == 0 or n < 2:
        simplices += [[] for _ in range(dim_cap)]
        births += [np.zeros(0) for _ in range(dim_cap)]
        return simplices, births

    nbrs: list[set] = [set() for _ in range(n)]
    pairs = edge_pairs(P, t_max)
    for a, b in pairs:
        nbrs[a].add(int(b))
    # work in local (sorted) positions, translate to ids at the end
    layer = [tuple(map(int, p)) for p in pairs]
    layer_birth = np.linalg.norm(P[pairs[:, 0]] - P[pairs[:, 1]], axis=1) if len(pairs) else np.zeros(0)
    local_layers = [layer]
    birth_layers = [layer_birth]
    for m in range(2, dim_cap + 1):
        cand = []
        for s in local_layers[-1]:
            common = set.intersection(*(nbrs[v] for v in s)) if s else set()
            for v in sorted(common):
                if v > s[-1]:
                    cand.append(s + (v,))
        if not cand:
            local_layers.append([])
            birth_layers.append(np.zeros(0))
            continue
        r = meb_radius_batch(P[np.asarray(cand)])
        keep = 2.0 * r < t_max
        local_layers.append([c for c, k in zip(cand, keep) if k])
        birth_layers.append(2.0 * r[keep])
        # higher simplices can only extend present ones
    for layer, b in zip(local_layers, birth_layers):
        simplices.append([tuple(int(ids[v]) for v in s) for s in layer])
        births.append(b)
    return simplices, births


def build_cech(pts, t: float, dim_cap: int, ids=None) -> SimplicialComplex:
    """Čech complex at scale ``t`` truncated to dimension ``dim_cap``."""
    if t < 0:
        raise ValueError("scale t must be non-negative")
    P = as_points(pts, allow_empty=True)
    ids = np.arange(len(P)) if ids is None else np.asarray(ids)
    simplices, births = build_cech_filtered(P, dim_cap, t, ids)
    # vertices are always present; everything else needs birth < t
    out = [simplices[0]] + [[s for s, b in zip(layer, bl) if b < t] for layer, bl in zip(simplices[1:], births[1:])]
    return SimplicialComplex(vertices=tuple(sorted(int(i) for i in ids)), simplices=out, dim_cap=dim_cap, t=float(t))


def cech_scaling_check(pts, t: float, s: float, shift=None) -> bool:
    """True iff scaling (and optionally shifting) the cloud together with
    ``t`` leaves the complex unchanged."""
    if t <= 0 or s <= 0:
        raise ValueError("t and s must be positive")
    P = as_points(pts)
    cap = min(P.shape[1], len(P) - 1, 3)
    base = build_cech(P, t, cap).simplex_set()
    Q = s * P if shift is None else s * P + np.asarray(shift, dtype=float)
    return build_cech(Q, s * t, cap).simplex_set() == base


def minimal_cycle_pm(P: np.ndarray, t, convention: str = "half"):
    """Batched ``(h+, h-)`` indicators for sets of ``k + 2`` points.

    ``h+`` says every ``k + 1``-point facet has a common ball intersection,
    ``h-`` that all ``k + 2`` points do; ``h+ - h-`` is the indicator of a
    hollow ``(k+1)``-simplex boundary, i.e. of a connected complex on ``k+2``
    points with ``beta_k = 1``.

    ``convention="half"`` uses balls of radius ``t/2`` (the Čech definition
    used throughout); ``"full"`` uses radius ``t``, which equals the half
    convention at scale ``2t``.

    ``P`` has shape ``(N, k+2, d)``; ``t`` is a scalar or an ``(N,)`` array.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim == 2:
        P = P[None]
    radius = {"half": 0.5, "full": 1.0}[convention] * np.asarray(t, dtype=float)
    m = P.shape[1]
    if m < 3:
        raise ValueError("need at least k + 2 = 3 points")
    plus = np.ones(P.shape[0], dtype=bool)
    for j0 in range(m):
        facet = [j for j in range(m) if j != j0]
        if m - 1 == 2:
            r = 0.5 * np.linalg.norm(P[:, facet[0]] - P[:, facet[1]], axis=1)
        else:
            r = meb_radius_batch(P[:, facet, :])
        plus &= r < radius
    minus = np.zeros(P.shape[0], dtype=bool)
    if np.any(plus):
        minus[plus] = meb_radius_batch(P[plus]) < (radius if np.ndim(radius) == 0 else radius[plus])
    return plus, minus


def minimal_cycle_indicator(P: np.ndarray, t, convention: str = "half") -> np.ndarray:
    plus, minus = minimal_cycle_pm(P, t, convention)
    return plus & ~minus
