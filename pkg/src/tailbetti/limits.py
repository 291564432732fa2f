"""Monte Carlo estimators for the limiting functionals of the tail Betti process.

Power-law tails converge to ``mu`` functionals, exponential tails to ``xi``
functionals.  Every estimator integrates an indicator ``h_t^{(i,j)}(0, y)``
(the complex on ``{0, y_1, .., y_{i-1}}`` is connected with ``beta_k = j``)
against a radial weight and, when ``lam > 0``, the void probability of the
union of radius-``t`` balls around the configuration.

Sampling layout shared by both families: ``y_l`` uniform in the ball of
radius ``(i - 1) t`` (a connected configuration anchored at 0 cannot leave
it), so the proposal weight is ``(omega_d ((i-1) t)^d)^(i-1)``.

* ``mu``: ``rho`` Pareto with density ``(alpha i - d) rho^(d-1-alpha i)`` on
  ``[1, inf)``, weight ``s_{d-1} / (alpha i - d)``.
* ``xi``: ``theta`` uniform on the sphere (weight ``s_{d-1}``) and ``rho``
  exponential with rate ``i`` (weight ``1 / i``), which absorbs the
  ``exp(-rho i)`` factor.

The void factor ``exp(-a vol)`` is computed exactly in the plane with unit
weight (arc integration) and otherwise by the unbiased Poisson product of
:func:`tailbetti.volume.void_product`, so no plug-in bias enters.

Curves over a ``t`` grid share one set of configurations drawn at unit
scale (``y = t y'``), which keeps them smooth in ``t``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import rng as streams
from .cech import build_cech, minimal_cycle_indicator
from .density import ball_volume, sphere_area
from .homology import betti
from .volume import union_area_2d, void_product

__all__ = [
    "RangeError",
    "MCEstimate",
    "LimitCurve",
    "MuSpec",
    "XiSpec",
    "mu_estimate",
    "xi_estimate",
    "mu_total",
    "xi_total",
    "mu_curve",
    "xi_curve",
    "series_tail_bound",
    "admissible_lambda",
    "configuration_labels",
]

BATCH = 1 << 15


class RangeError(ValueError):
    """A parameter lies outside the range where a limit is defined."""


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    tail_bound: Optional[float] = None
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["terms"] = {str(key): val for key, val in self.terms.items()}
        return out


@dataclass
class LimitCurve:
    """A limiting functional on a grid of scales."""

    t_grid: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int
    tail_bound: np.ndarray = None

    def to_dict(self) -> dict:
        tb = None if self.tail_bound is None else [float(x) for x in self.tail_bound]
        return {
            "t": [float(x) for x in self.t_grid],
            "mean": [float(x) for x in self.mean],
            "stderr": [float(x) for x in self.stderr],
            "tail_bound": tb,
            "samples": self.samples,
            "seed": self.seed,
        }


def _validate(d, k, i, j, t, lam, budget):
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in 1..{d - 1}")
    if i < k + 2:
        raise ValueError(f"i must be >= k+2 = {k + 2}")
    if j < 1:
        raise ValueError("j must be >= 1")
    if t < 0 or lam < 0:
        raise ValueError("t and lambda must be non-negative")
    if t > 1:
        raise ValueError("t must lie in [0, 1]")
    if budget < 2:
        raise ValueError("budget must be at least 2 samples")


@dataclass(frozen=True)
class MuSpec:
    d: int
    k: int
    i: int
    j: int
    t: float
    lam: float
    alpha: float
    budget: int = 100_000
    inner_budget: int = 4096
    seed: int = 0

    def __post_init__(self):
        _validate(self.d, self.k, self.i, self.j, self.t, self.lam, self.budget)
        if not self.alpha > self.d:
            raise ValueError("alpha must exceed d")


@dataclass(frozen=True)
class XiSpec:
    d: int
    k: int
    i: int
    j: int
    t: float
    lam: float
    tau: float = 1.0
    c: float = math.inf
    budget: int = 100_000
    inner_budget: int = 4096
    seed: int = 0

    def __post_init__(self):
        _validate(self.d, self.k, self.i, self.j, self.t, self.lam, self.budget)
        if not self.c > 0:
            raise ValueError("c must lie in (0, inf]")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")


# ---------------------------------------------------------------- indicators


def _connected(P: np.ndarray, t: float) -> np.ndarray:
    """Connectivity of the distance-``< t`` graph for each row of ``P``."""
    N, m, _ = P.shape
    D2 = np.sum((P[:, :, None, :] - P[:, None, :, :]) ** 2, axis=3)
    A = D2 < t * t
    reach = A[:, 0, :].copy()
    reach[:, 0] = True
    for _ in range(m - 2):
        reach = reach | np.any(reach[:, :, None] & A, axis=1)
    return reach.all(axis=1)


def configuration_labels(P: np.ndarray, t: float, k: int) -> np.ndarray:
    """``beta_k`` of the Čech complex for each configuration in ``P``
    (shape ``(N, i, d)``), or -1 where the complex is disconnected.

    Sets of ``k + 2`` points carry at most one k-cycle and use the batched
    minimal-cycle test; larger sets go through the complex builder.
    """
    P = np.asarray(P, dtype=float)
    N, i, _ = P.shape
    if t <= 0:
        return np.full(N, -1 if i > 1 else 0, dtype=np.int64)
    conn = _connected(P, t)
    labels = np.where(conn, 0, -1).astype(np.int64)
    if i < k + 2:
        return labels
    if i == k + 2:
        hit = minimal_cycle_indicator(P, t)
        labels[hit] = 1
        return labels
    for r in np.flatnonzero(conn):
        labels[r] = betti(build_cech(P[r], t, k + 1), k)
    return labels


def _ball_uniform(gen, n: int, m: int, d: int, radius: float) -> np.ndarray:
    g = gen.standard_normal((n, m, d))
    g /= np.linalg.norm(g, axis=2, keepdims=True)
    return g * (radius * gen.random((n, m, 1)) ** (1.0 / d))


# ---------------------------------------------------------------- batch kernel


@dataclass(frozen=True)
class _Job:
    family: str  # "mu" or "xi"
    d: int
    k: int
    i: int
    base: float  # scale at which configurations are drawn and labelled
    factors: tuple  # grid scales are base * factor
    lam: float
    alpha: float
    c: float
    select: Optional[int]  # j for a single (i, j) term, None for sum_j j
    j_cap: Optional[int]
    inner_budget: int
    seed: int
    stream: int


def _batch_sizes(budget: int) -> list[int]:
    full, rest = divmod(budget, BATCH)
    return [BATCH] * full + ([rest] if rest else [])


def _run_batch(job: _Job, b: int, size: int):
    d, i, s0 = job.d, job.i, job.base
    gen = streams.stream(job.seed, job.stream, i, 0, b)
    inner = streams.stream(job.seed, job.stream, i, streams.INNER, b)
    y = _ball_uniform(gen, size, i - 1, d, (i - 1) * s0)
    if job.family == "mu":
        rho = gen.random(size) ** (-1.0 / (job.alpha * i - d))
        W = sphere_area(d) / (job.alpha * i - d)
    else:
        theta = gen.standard_normal((size, d))
        theta /= np.linalg.norm(theta, axis=1, keepdims=True)
        rho = gen.exponential(1.0 / i, size)
        W = sphere_area(d) / i
    W *= (ball_volume(d) * ((i - 1) * s0) ** d) ** (i - 1)

    T = len(job.factors)
    S1 = np.zeros(T)
    S2 = np.zeros(T)
    if s0 <= 0:
        return S1, S2, size
    P = np.concatenate([np.zeros((size, 1, d)), y], axis=1)
    labels = configuration_labels(P, s0, job.k)
    if job.select is not None:
        mult = (labels == job.select).astype(float)
    else:
        ok = labels >= 1
        if job.j_cap is not None:
            ok &= labels <= job.j_cap
        mult = np.where(ok, labels, 0).astype(float)
    rows = np.flatnonzero(mult)
    if len(rows) == 0:
        return S1, S2, size

    g = np.asarray(job.factors, dtype=float)
    vals = np.zeros((len(rows), T))
    finite_c = job.family == "xi" and math.isfinite(job.c)
    exact_area = d == 2 and not finite_c
    for n_row, r in enumerate(rows):
        base_val = W * mult[r]
        if job.family == "xi" and finite_c:
            proj = y[r] @ theta[r] / job.c
        area0 = union_area_2d(P[r], s0) if (exact_area and job.lam > 0) else None
        for col, f in enumerate(g):
            if f <= 0:
                continue
            v = base_val * f ** (d * (i - 1))
            if job.family == "xi" and finite_c:
                if np.any(rho[r] + f * proj < 0):
                    continue
                v *= math.exp(-f * float(np.sum(proj)))
            if job.lam > 0:
                rate = job.lam * (rho[r] ** (-job.alpha) if job.family == "mu" else math.exp(-rho[r]))
                if area0 is not None:
                    v *= math.exp(-rate * area0 * f**d)
                else:
                    drift = theta[r] / job.c if finite_c else None
                    v *= void_product(f * P[r], f * s0, rate, inner, job.inner_budget, drift)
            vals[n_row, col] = v
    S1 += vals.sum(axis=0)
    S2 += (vals**2).sum(axis=0)
    return S1, S2, size


def _batch_task(args):
    return _run_batch(*args)


def _run(job: _Job, budget: int, workers: int = 1):
    """Sums over all batches, merged in batch order."""
    tasks = [(job, b, size) for b, size in enumerate(_batch_sizes(budget))]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_batch_task, tasks))
    else:
        parts = [_batch_task(a) for a in tasks]
    T = len(job.factors)
    S1, S2, N = np.zeros(T), np.zeros(T), 0
    for s1, s2, n in parts:
        S1 += s1
        S2 += s2
        N += n
    mean = S1 / N
    var = np.maximum(S2 - N * mean**2, 0.0) / (N - 1)
    return mean, np.sqrt(var / N), N


# ---------------------------------------------------------------- single terms


def mu_estimate(spec: MuSpec, workers: int = 1) -> MCEstimate:
    """Estimate ``mu_k^{(i,j)}(t; lam)`` for a power-law tail of index ``alpha``."""
    if spec.t == 0:
        return MCEstimate(0.0, 0.0, spec.budget, spec.seed)
    job = _Job("mu", spec.d, spec.k, spec.i, spec.t, (1.0,), spec.lam, spec.alpha, math.inf,
               spec.j, None, spec.inner_budget, spec.seed, streams.MU)
    mean, se, N = _run(job, spec.budget, workers)
    return MCEstimate(float(mean[0]), float(se[0]), N, spec.seed)


def xi_estimate(spec: XiSpec, workers: int = 1) -> MCEstimate:
    """Estimate ``xi_k^{(i,j)}(t; lam)`` for an exponential-family tail whose
    auxiliary limit is ``c`` (``inf`` allowed)."""
    if spec.t == 0:
        return MCEstimate(0.0, 0.0, spec.budget, spec.seed)
    job = _Job("xi", spec.d, spec.k, spec.i, spec.t, (1.0,), spec.lam, 0.0, spec.c,
               spec.j, None, spec.inner_budget, spec.seed, streams.XI)
    mean, se, N = _run(job, spec.budget, workers)
    return MCEstimate(float(mean[0]), float(se[0]), N, spec.seed)


# ---------------------------------------------------------------- series


def admissible_lambda(d: int) -> float:
    """Upper end of the open range ``(0, 1/(e omega_d))`` of ``lam``."""
    return 1.0 / (math.e * ball_volume(d))


def series_tail_bound(family: str, d: int, k: int, t: float, lam: float, M: int,
                      alpha: float = None, c: float = math.inf) -> float:
    """Bound on the terms ``i > M`` dropped from a total.

    A component on ``i`` vertices carries at most ``C(i, k+1)`` k-cycles and
    the connected configurations have volume at most
    ``i^(i-2) (omega_d t^d)^(i-1)`` (one ball per spanning-tree edge), so the
    ``i``-th term is at most
    ``C(i, k+1) lam^i / i! * s_{d-1} B_i * i^(i-2) (omega_d t^d)^(i-1)`` with
    ``B_i = 1/(alpha i - d)`` for ``mu``, ``1/i`` for ``xi`` with infinite
    ``c`` and ``1`` for finite ``c``.  Infinite when the series diverges.
    """
    if t <= 0 or lam <= 0:
        return 0.0
    v = ball_volume(d) * t**d
    if lam * math.e * v >= 1:
        return math.inf
    total = 0.0
    log_pref = math.log(sphere_area(d))
    for i in range(M + 1, M + 100_000):
        if family == "mu":
            lb = -math.log(alpha * i - d)
        elif math.isinf(c):
            lb = -math.log(i)
        else:
            lb = 0.0
        log_term = (
            math.log(math.comb(i, k + 1)) + i * math.log(lam) - math.lgamma(i + 1)
            + log_pref + lb + (i - 2) * math.log(i) + (i - 1) * math.log(v)
        )
        term = math.exp(log_term)
        total += term
        if term < 1e-18 * max(total, 1e-300) or term == 0.0:
            break
    return total


def _check_lambda(d: int, lam: float, strict: bool):
    hi = admissible_lambda(d)
    if strict and not 0 < lam < hi:
        raise RangeError(
            f"lambda={lam} outside (0, 1/(e*omega_d)) = (0, {hi:.6g}), where the "
            "untruncated weak-core series limit is defined"
        )
    if lam < 0:
        raise ValueError("lambda must be non-negative")


def _series_curve(family, d, k, t_grid, lam, M_cap, j_cap, budget, inner_budget, seed,
                  workers, alpha=None, c=math.inf, strict=True):
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(t_grid > 1):
        raise ValueError("t grid must lie in [0, 1]")
    if M_cap < k + 2:
        raise ValueError(f"M_cap must be >= k+2 = {k + 2}")
    _check_lambda(d, lam, strict)
    T = len(t_grid)
    mean, var = np.zeros(T), np.zeros(T)
    terms = {}
    stream_id = streams.MU if family == "mu" else streams.XI
    for i in range(k + 2, M_cap + 1):
        coef = lam**i / math.factorial(i)
        job = _Job(family, d, k, i, 1.0, tuple(float(x) for x in t_grid), lam,
                   alpha if alpha is not None else 0.0, c, None, j_cap, inner_budget, seed,
                   stream_id)
        m_i, se_i, _ = _run(job, budget, workers)
        terms[i] = (m_i, se_i)
        mean += coef * m_i
        var += (coef * se_i) ** 2
    bound = np.array([series_tail_bound(family, d, k, t, lam, M_cap, alpha, c) for t in t_grid])
    return LimitCurve(t_grid, mean, np.sqrt(var), budget, seed, bound), terms


def _total(family, d, k, t, lam, M_cap, j_cap, budget, inner_budget, seed, workers,
           alpha=None, c=math.inf, strict=True) -> MCEstimate:
    if t < 0 or t > 1:
        raise ValueError("t must lie in [0, 1]")
    _check_lambda(d, lam, strict)
    if t == 0:
        return MCEstimate(0.0, 0.0, budget, seed, tail_bound=0.0)
    curve, terms = _series_curve(family, d, k, [t], lam, M_cap, j_cap, budget, inner_budget,
                                 seed, workers, alpha, c, strict)
    return MCEstimate(
        float(curve.mean[0]), float(curve.stderr[0]), budget, seed,
        tail_bound=float(curve.tail_bound[0]),
        terms={i: (float(m[0]), float(s[0])) for i, (m, s) in terms.items()},
    )


def mu_total(d: int, k: int, t: float, lam: float, alpha: float, M_cap: int = 6,
             j_cap: Optional[int] = None, budget: int = 100_000, inner_budget: int = 4096,
             seed: int = 0, workers: int = 1, strict: bool = True) -> MCEstimate:
    """``mu_k(t; lam) = sum_{i, j} j lam^i / i! mu_k^{(i,j)}(t; lam)`` truncated
    at ``i <= M_cap`` (and ``j <= j_cap``).  ``strict=False`` admits any
    ``lam >= 0``, for comparisons against truncated Betti numbers."""
    if not alpha > d:
        raise ValueError("alpha must exceed d")
    return _total("mu", d, k, t, lam, M_cap, j_cap, budget, inner_budget, seed, workers,
                  alpha=alpha, strict=strict)


def xi_total(d: int, k: int, t: float, lam: float, tau: float, c: float = None, M_cap: int = 6,
             j_cap: Optional[int] = None, budget: int = 100_000, inner_budget: int = 4096,
             seed: int = 0, workers: int = 1, strict: bool = True) -> MCEstimate:
    """Exponential-family counterpart of :func:`mu_total`; ``c`` defaults to
    the auxiliary limit of ``psi(r) = r^tau / tau``."""
    c = _default_c(tau) if c is None else c
    if strict and d == 2 and not tau < 1:
        raise RangeError("in the plane the series limit needs tau < 1")
    return _total("xi", d, k, t, lam, M_cap, j_cap, budget, inner_budget, seed, workers,
                  c=c, strict=strict)


def _default_c(tau: float) -> float:
    return 1.0 if tau == 1 else math.inf


# ---------------------------------------------------------------- curves


def mu_curve(d: int, k: int, alpha: float, t_grid, lam: float = 0.0, minimal: bool = False,
             M_cap: int = 6, j_cap: Optional[int] = None, budget: int = 100_000,
             inner_budget: int = 4096, seed: int = 0, workers: int = 1,
             strict: bool = True) -> LimitCurve:
    """``mu`` on a scale grid with common random numbers.

    ``minimal=True`` gives the single term ``mu_k^{(k+2,1)}(t; lam)``;
    otherwise the series total with its tail bound.
    """
    if minimal:
        return _minimal_curve("mu", d, k, t_grid, lam, budget, inner_budget, seed, workers, alpha=alpha)
    return _series_curve("mu", d, k, t_grid, lam, M_cap, j_cap, budget, inner_budget, seed,
                         workers, alpha=alpha, strict=strict)[0]


def xi_curve(d: int, k: int, tau: float, t_grid, lam: float = 0.0, c: float = None,
             minimal: bool = False, M_cap: int = 6, j_cap: Optional[int] = None,
             budget: int = 100_000, inner_budget: int = 4096, seed: int = 0, workers: int = 1,
             strict: bool = True) -> LimitCurve:
    c = _default_c(tau) if c is None else c
    if minimal:
        return _minimal_curve("xi", d, k, t_grid, lam, budget, inner_budget, seed, workers, c=c)
    return _series_curve("xi", d, k, t_grid, lam, M_cap, j_cap, budget, inner_budget, seed,
                         workers, c=c, strict=strict)[0]


def _minimal_curve(family, d, k, t_grid, lam, budget, inner_budget, seed, workers,
                   alpha=None, c=math.inf) -> LimitCurve:
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(t_grid > 1):
        raise ValueError("t grid must lie in [0, 1]")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    stream_id = streams.MU if family == "mu" else streams.XI
    job = _Job(family, d, k, k + 2, 1.0, tuple(float(x) for x in t_grid), lam,
               alpha if alpha is not None else 0.0, c, 1, None, inner_budget, seed, stream_id)
    mean, se, N = _run(job, budget, workers)
    return LimitCurve(t_grid, mean, se, N, seed, np.zeros(len(t_grid)))
