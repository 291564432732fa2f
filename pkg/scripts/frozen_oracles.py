"""Recompute the reference values frozen into tests/test_limits.py.

Both are computed without the package: the enclosing radius of a triangle
comes from its side lengths, so the hollow-triangle indicator is closed form.

* ``A3``: plain Monte Carlo of int h(0, y1, y2) dy over the unit disc pair.
* ``xi`` at c = 1: a midpoint grid over (y1, y2) with theta rotated onto e1,
  integrand exp(-(a + b)) exp(-3 max(0, -a, -b)) / 3 times 2 pi.
"""

import argparse
import math

import numpy as np


def hollow(y1, y2, t=1.0):
    """Triangle {0, y1, y2} has all sides < t but enclosing radius >= t/2."""
    a = np.hypot(*y1.T)
    b = np.hypot(*y2.T)
    c = np.hypot(*(y1 - y2).T)
    S = np.sort(np.stack([a, b, c]), axis=0)
    obtuse = S[2] ** 2 >= S[0] ** 2 + S[1] ** 2
    area = 0.5 * np.abs(y1[:, 0] * y2[:, 1] - y1[:, 1] * y2[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        circ = a * b * c / (4 * area)
    R = np.where(obtuse, S[2] / 2, circ)
    return (S[2] < t) & (R >= t / 2)


def disc(gen, m):
    r = np.sqrt(gen.random(m))
    ph = 2 * math.pi * gen.random(m)
    return np.stack([r * np.cos(ph), r * np.sin(ph)], axis=1)


def a3(samples, seed):
    gen = np.random.default_rng(seed)
    hits, done = 0, 0
    while done < samples:
        m = min(10**6, samples - done)
        hits += int(hollow(disc(gen, m), disc(gen, m)).sum())
        done += m
    p = hits / samples
    return math.pi**2 * p, math.pi**2 * math.sqrt(p * (1 - p) / samples)


def xi_grid(M):
    h = 2.0 / M
    x = -1 + h * (np.arange(M) + 0.5)
    X, Y = np.meshgrid(x, x, indexing="ij")
    y1 = np.stack([X.ravel(), Y.ravel()], axis=1)
    y1 = y1[np.hypot(*y1.T) < 1]
    total = 0.0
    for u in x:
        for v in x:
            if math.hypot(u, v) >= 1:
                continue
            y2 = np.broadcast_to([u, v], y1.shape)
            A, B = y1[:, 0], y2[:, 0]
            g = np.exp(-(A + B)) * np.exp(-3 * np.maximum(0, np.maximum(-A, -B))) / 3
            total += float(np.sum(g * hollow(y1, y2)))
    return 2 * math.pi * total * h**4


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--samples", type=int, default=40_000_000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--grid", type=int, nargs="+", default=[80, 120, 160])
    args = p.parse_args()
    est, se = a3(args.samples, args.seed)
    print(f"A3 = {est!r} +- {se!r}; mu(3,1)(1;0) at alpha=4 is {2 * math.pi / 10 * est!r}")
    for M in args.grid:
        print(f"xi grid {M}: {xi_grid(M)!r}")


if __name__ == "__main__":
    main()
