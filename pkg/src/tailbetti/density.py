"""Spherically symmetric density models and radial sampling.

Two families are supported:

* power law ``f(x) = C / (1 + |x|**alpha)`` with ``alpha > d``;
* exponential ``f(x) = C exp(-psi(|x|))`` with ``psi`` regularly varying of
  index ``tau`` in (0, 1].  The default is ``psi(r) = r**tau / tau``.

Radii are drawn by inverting the radial survival function through a
log-spaced :class:`RadialTable`, refined by bisection; directions are uniform
on the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, special

from . import rng as _rng

__all__ = [
    "sphere_area",
    "ball_volume",
    "PowerLawDensity",
    "ExpDensity",
    "RadialTable",
    "PointCloud",
    "normalizing_constant",
    "density_eval",
    "sample_cloud",
    "psi_eval",
    "psi_inverse",
    "a_eval",
    "tail_ratio",
    "model_from_dict",
]


def sphere_area(d: int) -> float:
    """Surface area ``s_{d-1}`` of the unit sphere in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def ball_volume(d: int) -> float:
    """Volume ``omega_d`` of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _radial_mass(d: int, g: Callable[[float], float]) -> float:
    """``s_{d-1} * int_0^inf r^{d-1} g(r) dr`` by adaptive quadrature."""
    f = lambda r: r ** (d - 1) * g(r)
    head, _ = integrate.quad(f, 0.0, 1.0, epsrel=1e-12, epsabs=0.0, limit=200)
    tail, _ = integrate.quad(f, 1.0, np.inf, epsrel=1e-12, epsabs=0.0, limit=400)
    return sphere_area(d) * (head + tail)


@dataclass(frozen=True)
class PowerLawDensity:
    d: int
    alpha: float
    normC: Optional[float] = None

    family = "power-law"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if not self.alpha > self.d:
            raise ValueError(f"power-law density needs alpha > d, got alpha={self.alpha}, d={self.d}")
        if self.normC is None:
            object.__setattr__(self, "normC", normalizing_constant(self))
        elif not self.normC > 0:
            raise ValueError("normalising constant must be positive")

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return self.normC / (1.0 + r**self.alpha)

    def radial_sf(self, r):
        """P(|X| > r).  ``|X|**a / (1 + |X|**a)`` is Beta(d/a, 1 - d/a)."""
        r = np.asarray(r, dtype=float)
        a, d = self.alpha, self.d
        with np.errstate(over="ignore", divide="ignore"):
            w = 1.0 / (1.0 + r**a)
        return special.betainc(1 - d / a, d / a, w)

    def radial_sf_inverse(self, q):
        """Exact inverse of :meth:`radial_sf`; used for the far tail."""
        q = np.asarray(q, dtype=float)
        a, d = self.alpha, self.d
        w = special.betaincinv(1 - d / a, d / a, q)
        with np.errstate(divide="ignore"):
            return ((1.0 - w) / w) ** (1.0 / a)

    def to_dict(self) -> dict:
        return {"family": self.family, "d": self.d, "alpha": self.alpha, "C": self.normC}


def _default_psi(tau):
    return lambda r: np.asarray(r, dtype=float) ** tau / tau


@dataclass(frozen=True)
class ExpDensity:
    """``C exp(-psi(|x|))``.

    ``psi``, ``dpsi`` and ``psi_inv`` default to ``r**tau/tau``, ``r**(tau-1)``
    and ``(tau*x)**(1/tau)``.  A custom ``psi`` must come with its derivative
    and inverse; the requirement that ``psi'`` be eventually non-increasing is
    the caller's responsibility and is not checked.
    """

    d: int
    tau: float
    normC: Optional[float] = None
    psi: Optional[Callable] = field(default=None, compare=False)
    dpsi: Optional[Callable] = field(default=None, compare=False)
    psi_inv: Optional[Callable] = field(default=None, compare=False)

    family = "exponential"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        custom = [self.psi is not None, self.dpsi is not None, self.psi_inv is not None]
        if any(custom) and not all(custom):
            raise ValueError("a custom psi needs psi, dpsi and psi_inv together")
        object.__setattr__(self, "_custom", all(custom))
        if not self._custom:
            tau = self.tau
            object.__setattr__(self, "psi", _default_psi(tau))
            object.__setattr__(self, "dpsi", lambda r: np.asarray(r, dtype=float) ** (tau - 1))
            object.__setattr__(self, "psi_inv", lambda x: (tau * np.asarray(x, dtype=float)) ** (1 / tau))
        if self.normC is None:
            object.__setattr__(self, "normC", normalizing_constant(self))
        elif not self.normC > 0:
            raise ValueError("normalising constant must be positive")

    @property
    def is_default(self) -> bool:
        return not self._custom

    @property
    def c_limit(self) -> float:
        """``lim a(z)``: 1 for tau = 1, infinite for tau < 1 (default psi)."""
        return 1.0 if self.tau == 1 else math.inf

    def radial(self, r):
        return self.normC * np.exp(-self.psi(np.asarray(r, dtype=float)))

    def radial_sf(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_default:
            return special.gammaincc(self.d / self.tau, r**self.tau / self.tau)
        s = sphere_area(self.d) * self.normC
        f = lambda u: u ** (self.d - 1) * math.exp(-float(self.psi(u)))
        out = [s * integrate.quad(f, float(x), np.inf, epsrel=1e-12, epsabs=0.0, limit=400)[0] for x in r.ravel()]
        return np.asarray(out).reshape(r.shape)

    def radial_sf_inverse(self, q):
        if not self.is_default:
            raise NotImplementedError("closed-form tail inverse only for the default psi")
        q = np.asarray(q, dtype=float)
        return (self.tau * special.gammainccinv(self.d / self.tau, q)) ** (1 / self.tau)

    def to_dict(self) -> dict:
        return {"family": self.family, "d": self.d, "tau": self.tau, "C": self.normC}


DensityModel = Union[PowerLawDensity, ExpDensity]


def normalizing_constant(model: DensityModel) -> float:
    """The ``C`` making ``model`` integrate to one (quadrature, rel. err ~1e-10)."""
    if isinstance(model, PowerLawDensity):
        if not model.alpha > model.d:
            raise ValueError("alpha must exceed d")
        a = model.alpha
        return 1.0 / _radial_mass(model.d, lambda r: 1.0 / (1.0 + r**a))
    psi = model.psi
    return 1.0 / _radial_mass(model.d, lambda r: math.exp(-float(psi(r))))


def density_eval(model: DensityModel, x) -> float:
    """Pointwise density at ``x`` (a point or an ``(m, d)`` array)."""
    x = np.asarray(x, dtype=float)
    out = model.radial(np.linalg.norm(x, axis=-1))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RadialTable:
    """Knots ``radii[0] = 0 < ... < radii[-1]`` with survival ``sf = P(|X| > r)``.

    ``sf`` decreases strictly from 1 to below ``tail_mass``; beyond the last
    knot the model's own tail inverse (or bisection) takes over.
    """

    radii: np.ndarray
    sf: np.ndarray
    resolution: int

    @classmethod
    def build(cls, model: DensityModel, resolution: int = 4096, tail_mass: float = 1e-12) -> "RadialTable":
        r_max = 1.0
        while float(model.radial_sf(r_max)) > tail_mass:
            r_max *= 2.0
        r_min = min(1e-6, r_max * 1e-9)
        radii = np.concatenate([[0.0], np.geomspace(r_min, r_max, resolution - 1)])
        sf = np.asarray(model.radial_sf(radii), dtype=float)
        sf[0] = 1.0
        # Knots that round to the same survival value carry no information.
        keep = np.concatenate([[True], np.diff(sf) < 0])
        return cls(radii=radii[keep], sf=sf[keep], resolution=resolution)

    @property
    def cdf(self) -> np.ndarray:
        return 1.0 - self.sf


@dataclass
class PointCloud:
    """``n`` points in R^d, their original ids, and the seed that produced them."""

    points: np.ndarray
    seed: Optional[int] = None
    ids: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        if self.ids is None:
            self.ids = np.arange(len(self.points))
        else:
            self.ids = np.asarray(self.ids, dtype=np.int64)

    def __len__(self):
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)


def _invert_sf(model: DensityModel, table: RadialTable, q: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Radii with ``sf(r) = q``: table bracket, then vectorised bisection."""
    q = np.asarray(q, dtype=float)
    out = np.empty_like(q)
    in_table = q >= table.sf[-1]
    if np.any(~in_table):
        tail_q = q[~in_table]
        try:
            out[~in_table] = model.radial_sf_inverse(tail_q)
        except NotImplementedError:
            lo = np.full(tail_q.shape, table.radii[-1])
            hi = lo * 2
            while np.any(model.radial_sf(hi) > tail_q):
                hi = np.where(model.radial_sf(hi) > tail_q, hi * 2, hi)
            out[~in_table] = _bisect(model, tail_q, lo, hi, rtol)
    if np.any(in_table):
        qq = q[in_table]
        # sf is decreasing: search on the reversed array.
        rev = table.sf[::-1]
        pos = len(rev) - np.searchsorted(rev, qq, side="left")
        pos = np.clip(pos, 1, len(table.radii) - 1)
        lo, hi = table.radii[pos - 1], table.radii[pos]
        out[in_table] = _bisect(model, qq, lo, hi, rtol)
    return out


def _bisect(model, q, lo, hi, rtol):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(200):
        if np.all(hi - lo <= rtol * np.maximum(hi, 1e-300)):
            break
        mid = 0.5 * (lo + hi)
        above = model.radial_sf(mid) > q
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def uniform_directions(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` independent uniform unit vectors in R^d."""
    z = gen.standard_normal((n, d))
    nrm = np.linalg.norm(z, axis=1, keepdims=True)
    return z / nrm


def sample_cloud(
    model: DensityModel,
    n: int,
    seed: int,
    table: Optional[RadialTable] = None,
    stream_ids: tuple = (),
) -> PointCloud:
    """Draw ``n`` i.i.d. points from ``model``.

    The output is a deterministic function of ``(model, n, seed, stream_ids,
    table resolution)``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return PointCloud(np.zeros((0, model.d)), seed=seed)
    if table is None:
        table = _table_for(model)
    gen = _rng.stream(seed, _rng.CLOUD, *stream_ids)
    # 1 - U lies in (0, 1], never 0, so every draw has a finite radius.
    q = 1.0 - gen.random(n)
    radii = _invert_sf(model, table, q)
    dirs = uniform_directions(gen, n, model.d)
    return PointCloud(dirs * radii[:, None], seed=seed)


_TABLES: dict = {}


def _table_for(model: DensityModel, resolution: int = 4096) -> RadialTable:
    key = (type(model).__name__, model.d, getattr(model, "alpha", None), getattr(model, "tau", None), model.normC, resolution)
    if getattr(model, "_custom", False):
        return RadialTable.build(model, resolution)
    if key not in _TABLES:
        _TABLES[key] = RadialTable.build(model, resolution)
    return _TABLES[key]


def _positive(name, v):
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError(f"{name} must be positive")
    return v


def psi_eval(model: ExpDensity, r):
    return model.psi(_positive("r", r))


def psi_inverse(model: ExpDensity, x):
    return model.psi_inv(_positive("x", x))


def a_eval(model: ExpDensity, z):
    """Auxiliary function ``a(z) = 1 / psi'(z)``."""
    return 1.0 / model.dpsi(_positive("z", z))


def tail_ratio(model: PowerLawDensity, r: float, t: float) -> float:
    """``f(r t) / f(r)``; tends to ``t**-alpha`` as r grows."""
    if r <= 0 or t <= 0:
        raise ValueError("r and t must be positive")
    a = model.alpha
    # (1 + r^a) / (1 + (rt)^a), written to stay finite for huge r
    return float((r**-a + 1.0) / (r**-a + t**a))


def model_from_dict(block: dict) -> DensityModel:
    """Build a model from a config block ``{family, d, alpha|tau, C?}``."""
    fam = block.get("family")
    C = block.get("C")
    if fam == "power-law":
        return PowerLawDensity(int(block["d"]), float(block["alpha"]), None if C is None else float(C))
    if fam == "exponential":
        return ExpDensity(int(block["d"]), float(block["tau"]), None if C is None else float(C))
    raise ValueError(f"unknown density family {fam!r}")
