"""Deterministic scaling: annulus radii, Betti scalers, weak cores, regimes.

Radius rules (``R_n`` as a function of ``n``):

=================  ==========================================  ====================
rule               R_n                                         parameter range
=================  ==========================================  ====================
power-case-i       (log n)^-xi n^(1/(alpha - d/(k+2)))         xi > 0
power-case-ii      n^(1/(alpha - d/b))                         b > k + 2
power-case-iii     (c n)^(1/alpha)                             c > C e omega_d
exp-case-i         psi^-1(log n + b log log n)                 0 < b < (d-tau)/(tau(k+2))
exp-case-ii        (tau log n + log c1)^(1/tau)                c1 > (C e omega_d)^tau
=================  ==========================================  ====================

The first two power rules and exp-case-i have ``n f(R_n) -> 0`` and scale
Betti numbers by ``rho_n`` (power law) or ``eta_n`` (exponential); the
weak-core rules have ``n f(R_n) -> lam > 0`` and scale by ``R_n^d`` or
``a(R_n) R_n^(d-1)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .density import ExpDensity, PowerLawDensity, a_eval, ball_volume, psi_inverse

__all__ = [
    "RULES",
    "RegimeSpec",
    "annulus_radii_power",
    "annulus_radii_exp",
    "rho_n",
    "eta_n",
    "weak_core_radius",
    "classify_regime",
    "NoCoreError",
    "scaler_table",
    "write_scaler_csv",
    "loglog_slope",
]

RULES = ("power-case-i", "power-case-ii", "power-case-iii", "exp-case-i", "exp-case-ii")


class NoCoreError(ValueError):
    """``n f(0) <= 1``: the density never reaches level ``1/n``."""


def annulus_radii_power(alpha: float, d: int, C: float, n: float) -> list[float]:
    """``[inf, R_1, .., R_{d-1}, (Cn)^(1/alpha), 0]``, with
    ``R_i = (Cn)^(1/(alpha - d/(i+2)))``."""
    if not alpha > d:
        raise ValueError("alpha must exceed d")
    if n < 2 or C <= 0:
        raise ValueError("need n >= 2 and C > 0")
    out = [math.inf]
    out += [(C * n) ** (1.0 / (alpha - d / (i + 2))) for i in range(1, d)]
    out += [(C * n) ** (1.0 / alpha), 0.0]
    return out


def annulus_radii_exp(tau: float, d: int, C: float, n: float) -> list[float]:
    """Log-scale annulus radii for ``C exp(-r^tau / tau)``:
    ``(tau log n + (d - tau) log(tau log n) / (i + 2) + tau log C)^(1/tau)``
    for ``i < d`` and ``(tau log n + tau log C)^(1/tau)`` at ``i = d``."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    if n < 3 or C <= 0:
        raise ValueError("need n >= 3 and C > 0")
    L = tau * math.log(n)
    out = [math.inf]
    for i in range(1, d + 1):
        arg = L + tau * math.log(C)
        if i < d:
            arg += (d - tau) * math.log(L) / (i + 2)
        if arg <= 0:
            raise ValueError(f"radius {i} undefined at n={n}: base {arg} is not positive")
        out.append(arg ** (1.0 / tau))
    out.append(0.0)
    return out


def _log_f(model, R: float) -> float:
    if isinstance(model, PowerLawDensity):
        a = model.alpha
        # log(C / (1 + R^a)) without overflow
        return math.log(model.normC) - (a * math.log(R) + math.log1p(R**-a) if R > 1 else math.log1p(R**a))
    return math.log(model.normC) - float(model.psi(R))


def rho_n(model: PowerLawDensity, k: int, n: float, R: float) -> float:
    """``n^(k+2) R^d f(R)^(k+2)``."""
    if R <= 0:
        raise ValueError("R must be positive")
    return math.exp((k + 2) * math.log(n) + model.d * math.log(R) + (k + 2) * _log_f(model, R))


def eta_n(model: ExpDensity, k: int, n: float, R: float) -> float:
    """``n^(k+2) a(R) R^(d-1) f(R)^(k+2)``."""
    if R <= 0:
        raise ValueError("R must be positive")
    log_a = math.log(float(a_eval(model, R)))
    return math.exp((k + 2) * math.log(n) + log_a + (model.d - 1) * math.log(R) + (k + 2) * _log_f(model, R))


def n_f(model, n: float, R: float) -> float:
    return math.exp(math.log(n) + _log_f(model, R))


def weak_core_radius(model, n: float, rtol: float = 1e-12) -> float:
    """Solve ``n f(R) = 1`` by bisection on ``log(n f)``."""
    if n * model.normC <= 1:
        raise NoCoreError(f"n f(0) = {n * model.normC:.6g} <= 1: no weak core")
    g = lambda R: math.log(n) + _log_f(model, R)
    lo, hi = 0.0, 1.0
    while g(hi) > 0:
        hi *= 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def loglog_slope(ns, values) -> float:
    """Least-squares slope of ``log value`` against ``log log n``."""
    x = np.log(np.log(np.asarray(ns, dtype=float)))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


Model = Union[PowerLawDensity, ExpDensity]


@dataclass(frozen=True)
class RegimeSpec:
    """A density, a radius rule with its parameter, and the homology degree."""

    model: Model
    rule: str
    k: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    # -- parameter checks --------------------------------------------------
    def validate(self):
        m, k, p = self.model, self.k, self.params
        if self.rule not in RULES + ("custom",):
            raise ValueError(f"unknown radius rule {self.rule!r}; choose from {RULES}")
        if not 1 <= k <= m.d - 1:
            raise ValueError(f"k must lie in 1..{m.d - 1}")
        if self.rule == "custom":
            if not callable(p.get("radius")):
                raise ValueError("custom rule needs a callable 'radius'")
            return
        power = self.rule.startswith("power")
        if power != isinstance(m, PowerLawDensity):
            raise ValueError(f"rule {self.rule} does not match a {m.family} density")
        need = {"power-case-i": "xi", "power-case-ii": "b", "power-case-iii": "c",
                "exp-case-i": "b", "exp-case-ii": "c1"}[self.rule]
        if need not in p:
            raise ValueError(f"rule {self.rule} needs parameter {need!r}")
        v = float(p[need])
        C, om = m.normC, ball_volume(m.d)
        if self.rule == "power-case-i" and not v > 0:
            raise ValueError("power-case-i needs xi > 0")
        if self.rule == "power-case-ii" and not k + 2 < v < math.inf:
            raise ValueError(f"power-case-ii needs b in (k+2, inf) = ({k + 2}, inf)")
        if self.rule == "power-case-iii" and not v > C * math.e * om:
            raise ValueError(f"power-case-iii needs c > C e omega_d = {C * math.e * om:.6g}")
        if self.rule == "exp-case-i":
            hi = (m.d - m.tau) / (m.tau * (k + 2))
            if not 0 < v < hi:
                raise ValueError(f"exp-case-i needs b in (0, (d-tau)/(tau(k+2))) = (0, {hi:.6g})")
        if self.rule == "exp-case-ii":
            lo = (C * math.e * om) ** m.tau
            if not v > lo:
                raise ValueError(f"exp-case-ii needs c1 > (C e omega_d)^tau = {lo:.6g}")
            if m.d == 2 and not m.tau < 1:
                raise ValueError("exp-case-ii in the plane needs tau < 1")
            if not m.is_default:
                raise ValueError("exp-case-ii is defined for psi(r) = r^tau / tau")

    @property
    def param(self) -> float:
        return float(next(iter(self.params.values())))

    @property
    def weak_core(self) -> bool:
        return self.rule in ("power-case-iii", "exp-case-ii")

    # -- radius and scalers ------------------------------------------------
    def radius(self, n: float) -> float:
        if self.rule == "custom":
            return float(self.params["radius"](n))
        m, k, v = self.model, self.k, self.param
        if self.rule == "power-case-i":
            return math.log(n) ** (-v) * n ** (1.0 / (m.alpha - m.d / (k + 2)))
        if self.rule == "power-case-ii":
            return n ** (1.0 / (m.alpha - m.d / v))
        if self.rule == "power-case-iii":
            return (v * n) ** (1.0 / m.alpha)
        if self.rule == "exp-case-i":
            return float(psi_inverse(m, math.log(n) + v * math.log(math.log(n))))
        return (m.tau * math.log(n) + math.log(v)) ** (1.0 / m.tau)

    def lam(self) -> float:
        """The limit of ``n f(R_n)``: 0 away from the weak core."""
        m = self.model
        if self.rule == "power-case-iii":
            return m.normC / self.param
        if self.rule == "exp-case-ii":
            return self.param ** (-1.0 / m.tau) * m.normC
        return 0.0

    @property
    def scaler_name(self) -> str:
        return {
            "power-case-i": "rho_n",
            "power-case-ii": "rho_n",
            "power-case-iii": "R_n^d",
            "exp-case-i": "eta_n",
            "exp-case-ii": "a(R_n) R_n^(d-1)",
        }[self.rule]

    @property
    def scaler_formula(self) -> str:
        return {
            "rho_n": "n^(k+2) R_n^d f(R_n)^(k+2)",
            "R_n^d": "R_n^d",
            "eta_n": "n^(k+2) a(R_n) R_n^(d-1) f(R_n)^(k+2)",
            "a(R_n) R_n^(d-1)": "a(R_n) R_n^(d-1)",
        }[self.scaler_name]

    def scaler(self, n: float) -> float:
        """Normaliser of the tail Betti process for this rule."""
        if self.rule == "custom":
            return self.sparse_scaler(n)
        m, R = self.model, self.radius(n)
        if self.rule in ("power-case-i", "power-case-ii"):
            return rho_n(m, self.k, n, R)
        if self.rule == "power-case-iii":
            return R**m.d
        if self.rule == "exp-case-i":
            return eta_n(m, self.k, n, R)
        return float(a_eval(m, R)) * R ** (m.d - 1)

    def sparse_scaler(self, n: float) -> float:
        """``rho_n`` or ``eta_n`` whatever the rule."""
        R = self.radius(n)
        if isinstance(self.model, PowerLawDensity):
            return rho_n(self.model, self.k, n, R)
        return eta_n(self.model, self.k, n, R)

    # -- closed-form asymptotics ------------------------------------------
    def asymptotic_scaler(self, n: float) -> float:
        """Leading-order form of :meth:`scaler`.

        power-case-i: ``C^(k+2) (log n)^(xi (alpha (k+2) - d))``;
        power-case-ii: ``C^(k+2) n^(d (1 - (k+2)/b) / (alpha - d/b))``;
        power-case-iii: ``(c n)^(d/alpha)``;
        exp-case-i: ``tau^((d-tau)/tau) C^(k+2) (log n)^((d-tau)/tau - b (k+2))``;
        exp-case-ii: ``(tau log n)^((d-tau)/tau)``.
        """
        m, k, v = self.model, self.k, self.param
        d, C = m.d, m.normC
        if self.rule == "power-case-i":
            return C ** (k + 2) * math.log(n) ** (v * (m.alpha * (k + 2) - d))
        if self.rule == "power-case-ii":
            return C ** (k + 2) * n ** (d * (1 - (k + 2) / v) / (m.alpha - d / v))
        if self.rule == "power-case-iii":
            return (v * n) ** (d / m.alpha)
        tau = m.tau
        if self.rule == "exp-case-i":
            return tau ** ((d - tau) / tau) * C ** (k + 2) * math.log(n) ** ((d - tau) / tau - v * (k + 2))
        return (tau * math.log(n)) ** ((d - tau) / tau)

    def limit_description(self) -> str:
        return {
            "power-case-i": "mu_k^(k+2,1)(t;0)/(k+2)!",
            "power-case-ii": "mu_k^(k+2,1)(t;0)/(k+2)!",
            "power-case-iii": "mu_k(t;lam)",
            "exp-case-i": "xi_k^(k+2,1)(t;0)/(k+2)!",
            "exp-case-ii": "xi_k(t;lam)",
        }[self.rule]

    def to_dict(self) -> dict:
        return {"rule": self.rule, "k": self.k, "params": dict(self.params), "model": self.model.to_dict()}


def classify_regime(spec: RegimeSpec, n_probe) -> tuple[str, float]:
    """Label the rule by probing ``n f(R_n)`` and the sparse scaler.

    Returns ``(label, lam_hat)`` where ``lam_hat`` is ``n f(R_n)`` at the
    largest probe.  ``n_probe`` needs at least 3 values spanning 4 decades.
    """
    ns = np.asarray(sorted(n_probe), dtype=float)
    if len(ns) < 3 or ns[-1] / ns[0] < 1e4:
        raise ValueError("probe at least 3 values of n spanning 4 decades")
    nf = np.array([n_f(spec.model, n, spec.radius(n)) for n in ns])
    sc = np.array([spec.sparse_scaler(n) for n in ns])
    lam_hat = float(nf[-1])
    growing = bool(np.all(np.diff(sc) > 0))
    if growing and abs(nf[-1] / nf[-2] - 1) < 0.02 and nf[-1] > 0:
        return "weak-core-regime", lam_hat
    if growing and np.all(np.diff(nf) < 0) and nf[-1] < 1:
        return "sparse-CLT-regime", lam_hat
    if not growing and sc[-1] > 1e-12:
        return "poisson-regime", lam_hat
    return "degenerate", lam_hat


def scaler_table(spec: RegimeSpec, n_values) -> list[dict]:
    return [
        {"n": float(n), "R_n": spec.radius(n), "nf(R_n)": n_f(spec.model, n, spec.radius(n)),
         "scaler": spec.scaler(n)}
        for n in n_values
    ]


def write_scaler_csv(spec: RegimeSpec, n_values, path) -> None:
    rows = scaler_table(spec, n_values)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "R_n", "nf(R_n)", "scaler"])
        w.writeheader()
        for r in rows:
            w.writerow({key: repr(val) for key, val in r.items()})
