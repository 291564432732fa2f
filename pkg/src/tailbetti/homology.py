"""Betti numbers over GF(2).

Boundary columns are packed into Python integers (bit ``r`` set means row
``r`` is a face), so column additions are single XORs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .cech import ComponentDecomposition, SimplicialComplex

__all__ = ["BoundaryMatrix", "boundary_matrix", "gf2_rank", "betti", "betti_numbers", "betti_per_component"]


@dataclass
class BoundaryMatrix:
    """Sparse GF(2) boundary map from m-simplices to (m-1)-simplices."""

    m: int
    n_rows: int
    columns: list

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    def to_dense(self):
        import numpy as np

        A = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for j, col in enumerate(self.columns):
            r = 0
            while col:
                if col & 1:
                    A[r, j] = 1
                col >>= 1
                r += 1
        return A


def boundary_matrix(lower: list, upper: list) -> BoundaryMatrix:
    """Boundary of the simplices ``upper`` expressed in the basis ``lower``.

    Both lists hold sorted vertex tuples; every face of an upper simplex must
    be present in ``lower``.
    """
    index = {s: r for r, s in enumerate(lower)}
    m = len(upper[0]) - 1 if upper else (len(lower[0]) if lower else 0)
    cols = []
    for s in upper:
        col = 0
        for face in combinations(s, len(s) - 1):
            try:
                col |= 1 << index[face]
            except KeyError:
                raise ValueError(f"face {face} of {s} missing: complex is not closed") from None
        cols.append(col)
    return BoundaryMatrix(m=m, n_rows=len(lower), columns=cols)


def gf2_rank(columns) -> int:
    """Rank of a set of GF(2) columns by Gaussian elimination on lowest bits."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col & -col
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                rank += 1
                break
            col ^= other
    return rank


def _rank_of(cx: SimplicialComplex, m: int) -> int:
    """Rank of the boundary map out of dimension ``m`` (0 for m = 0 or absent)."""
    if m <= 0 or m > cx.dim_cap or not cx.simplices[m]:
        return 0
    return gf2_rank(boundary_matrix(cx.simplices[m - 1], cx.simplices[m]).columns)


def betti(cx: SimplicialComplex, k: int) -> int:
    """``beta_k = #k-simplices - rank d_k - rank d_{k+1}``.

    Exact when ``cx.dim_cap >= k + 1``; with ``dim_cap == k`` the result is
    the Betti number of the k-skeleton.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > cx.dim_cap:
        raise ValueError(f"k={k} exceeds the complex's dim_cap={cx.dim_cap}")
    n_k = len(cx.simplices[k])
    if n_k == 0:
        return 0
    return n_k - _rank_of(cx, k) - _rank_of(cx, k + 1)


def betti_numbers(cx: SimplicialComplex) -> list[int]:
    ranks = [_rank_of(cx, m) for m in range(cx.dim_cap + 1)] + [0]
    return [len(cx.simplices[m]) - ranks[m] - ranks[m + 1] for m in range(cx.dim_cap)]


def betti_per_component(decomp: ComponentDecomposition, k: int) -> list[tuple[int, int]]:
    """``(size, beta_k)`` for each component complex, in decomposition order."""
    if len(decomp.complexes) != len(decomp.members):
        raise ValueError("decomposition has no per-component complexes; build them first")
    return [(len(m), betti(cx, k)) for m, cx in zip(decomp.members, decomp.complexes)]
