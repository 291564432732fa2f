"""Independent reference implementations used only by the tests."""

from itertools import combinations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


def dense_gf2_rank(A) -> int:
    A = np.array(A, dtype=np.uint8) % 2
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if A[r, c]), None)
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        for r in range(rows):
            if r != rank and A[r, c]:
                A[r] ^= A[rank]
        rank += 1
    return rank


def dense_boundary(lower, upper):
    index = {s: r for r, s in enumerate(lower)}
    A = np.zeros((len(lower), len(upper)), dtype=np.uint8)
    for c, s in enumerate(upper):
        for face in combinations(s, len(s) - 1):
            A[index[face], c] = 1
    return A


def dense_betti(simplices, k):
    """``beta_k`` from dense boundary matrices; ``simplices[m]`` lists m-simplices."""
    n_k = len(simplices[k])
    if n_k == 0:
        return 0
    r_k = dense_gf2_rank(dense_boundary(simplices[k - 1], simplices[k])) if k >= 1 and simplices[k] else 0
    up = simplices[k + 1] if k + 1 < len(simplices) else []
    r_up = dense_gf2_rank(dense_boundary(simplices[k], up)) if up else 0
    return n_k - r_k - r_up


def graph_components(P, t) -> int:
    n = len(P)
    if n == 0:
        return 0
    D = np.linalg.norm(P[:, None] - P[None], axis=2)
    i, j = np.nonzero((D < t) & ~np.eye(n, dtype=bool))
    G = coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    return connected_components(G, directed=False)[0]


def triangle_radius(a, b, c):
    """Smallest enclosing radius of a planar triangle from its side lengths."""
    s = sorted([a, b, c])
    if s[2] ** 2 >= s[0] ** 2 + s[1] ** 2:
        return s[2] / 2
    p = (a + b + c) / 2
    area = np.sqrt(max(p * (p - a) * (p - b) * (p - c), 0.0))
    return a * b * c / (4 * area)


def brute_cech(P, t, dim_cap):
    """Čech complex by testing every subset with the triangle/edge formulas
    (planar, dim_cap <= 2)."""
    n = len(P)
    out = [[(i,) for i in range(n)]]
    D = np.linalg.norm(P[:, None] - P[None], axis=2)
    if dim_cap >= 1:
        out.append([(i, j) for i, j in combinations(range(n), 2) if D[i, j] < t])
    if dim_cap >= 2:
        out.append([
            (i, j, k) for i, j, k in combinations(range(n), 3)
            if triangle_radius(D[i, j], D[j, k], D[i, k]) < t / 2
        ])
    return out


def meb_enumerate(P) -> float:
    """Smallest enclosing radius by trying every support subset of size
    <= d + 1; circumcentres solved on the subset's affine hull."""
    P = np.asarray(P, dtype=float)
    m, d = P.shape
    best = np.inf
    for s in range(1, min(m, d + 1) + 1):
        for sub in combinations(range(m), s):
            S = P[list(sub)]
            if s == 1:
                c = S[0]
            else:
                # c = S0 + V^T w with |c - S_i|^2 equal for all i
                V = S[1:] - S[0]
                G = V @ V.T
                if abs(np.linalg.det(G)) < 1e-14 * max(1.0, np.trace(G)) ** (s - 1):
                    continue
                w = np.linalg.solve(2 * G, np.sum(V * V, axis=1))
                c = S[0] + V.T @ w
            best = min(best, float(np.max(np.linalg.norm(P - c, axis=1))))
    return best
