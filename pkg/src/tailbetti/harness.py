"""Convergence experiments: sample clouds, compute scaled tail Betti curves,
compare them with the Monte Carlo limit, and write the results out."""

from __future__ import annotations

import copy
import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .density import ExpDensity, PowerLawDensity, ball_volume, model_from_dict, sample_cloud
from .limits import mu_curve, xi_curve
from .regimes import RegimeSpec, classify_regime
from .tail import component_profile, connected_subset_count, tail_betti_curve, tail_points, truncated_betti

__all__ = [
    "ConfigError",
    "OutputError",
    "ExperimentConfig",
    "ConvergenceReport",
    "PRESETS",
    "preset",
    "run_convergence",
    "emit",
    "load_report",
]

PROBE = (1e4, 1e6, 1e8, 1e10)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class OutputError(OSError):
    """Failure writing or reading an output file."""


@dataclass
class ExperimentConfig:
    model: dict
    regime: dict
    k: int
    t_grid: dict = field(default_factory=lambda: {"min": 0.0, "max": 1.0, "points": 21})
    n_values: list = field(default_factory=lambda: [2**e for e in range(9, 15)])
    trials: int = 50
    M: Optional[int] = None
    mc_budget: int = 200_000
    limit_M: int = 5
    inner_budget: int = 1024
    check_invariants: Optional[bool] = None
    seed: int = 0
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            spec = self.regime_spec()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid model/regime block: {exc}") from exc
        n = list(self.n_values)
        if not n or any(int(a) != a or a < 2 for a in n) or any(b <= a for a, b in zip(n, n[1:])):
            raise ConfigError("n_values must be strictly increasing integers >= 2")
        if int(self.trials) < 1:
            raise ConfigError("trials must be >= 1")
        g = self.t_grid
        try:
            lo, hi, pts = float(g["min"]), float(g["max"]), int(g["points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("t_grid needs min, max and points") from exc
        if not (0 <= lo <= hi <= 1) or pts < 1 or (pts > 1 and lo == hi):
            raise ConfigError("t_grid must lie in [0, 1] with points >= 1 and min < max")
        if self.M is not None and self.M < self.k + 2:
            raise ConfigError(f"M must be >= k+2 = {self.k + 2}")
        if self.mc_budget < 2 or self.inner_budget < 1 or self.limit_M < self.k + 2:
            raise ConfigError("mc_budget >= 2, inner_budget >= 1 and limit_M >= k+2 required")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if spec.rule == "custom":
            raise ConfigError("experiments need one of the named radius rules")

    def regime_spec(self) -> RegimeSpec:
        model = model_from_dict(self.model)
        return RegimeSpec(model, self.regime["rule"], int(self.k), dict(self.regime.get("params", {})))

    def t_values(self) -> np.ndarray:
        g = self.t_grid
        return np.linspace(float(g["min"]), float(g["max"]), int(g["points"]))

    @property
    def invariants_on(self) -> bool:
        if self.check_invariants is not None:
            return bool(self.check_invariants)
        return self.regime["rule"] == "power-case-iii"

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, block: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(block) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        missing = {"model", "regime", "k"} - set(block)
        if missing:
            raise ConfigError(f"config lacks blocks: {sorted(missing)}")
        return cls(**copy.deepcopy(block))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                block = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        except OSError as exc:
            raise OutputError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(block)


def _power(d, k, alpha, rule, params, **kw) -> ExperimentConfig:
    model = PowerLawDensity(d, alpha)
    return ExperimentConfig(
        model={"family": "power-law", "d": d, "alpha": alpha},
        regime={"rule": rule, "params": params(model) if callable(params) else params},
        k=k,
        **kw,
    )


def _exp(d, k, tau, rule, params, **kw) -> ExperimentConfig:
    model = ExpDensity(d, tau)
    return ExperimentConfig(
        model={"family": "exponential", "d": d, "tau": tau},
        regime={"rule": rule, "params": params(model) if callable(params) else params},
        k=k,
        **kw,
    )


def _weak_c(model):
    return {"c": 2 * model.normC * math.e * ball_volume(model.d)}


def _weak_c1(model):
    return {"c1": 2 * (model.normC * math.e * ball_volume(model.d)) ** model.tau}


PRESETS = {
    "ex31-i": lambda: _power(2, 1, 4.0, "power-case-i", {"xi": 0.1}),
    "ex31-ii": lambda: _power(2, 1, 5.0, "power-case-ii", {"b": 4.0}),
    "ex31-iii": lambda: _power(2, 1, 4.0, "power-case-iii", _weak_c, n_values=[2**e for e in range(9, 14)],
                               mc_budget=1_000_000),
    "ex32-i": lambda: _exp(2, 1, 1.0, "exp-case-i", {"b": 0.1}),
    "ex32-ii": lambda: _exp(3, 1, 1.0, "exp-case-ii", _weak_c1),
}


def preset(name: str) -> ExperimentConfig:
    """A named configuration covering one radius rule."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass
class ConvergenceReport:
    """Everything a run produced, in JSON-ready form.

    ``rows`` holds one entry per ``(n, trial)`` with the raw and scaled
    curves; ``summary`` one entry per ``n`` with the mean scaled curve, its
    standard error and the sup-distance to the limit.
    """

    config: dict
    regime: dict
    scaler: dict
    t: list
    limit: dict
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    invariants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, block: dict) -> "ConvergenceReport":
        return cls(**copy.deepcopy(block))

    def sup_distances(self) -> list[float]:
        return [s["sup_distance"] for s in self.summary]


def _trial(cfg_block: dict, n: int, trial: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_block)
    spec = cfg.regime_spec()
    t = cfg.t_values()
    R = spec.radius(n)
    cloud = sample_cloud(spec.model, n, cfg.seed, stream_ids=(n, trial))
    k = cfg.k
    beta = tail_betti_curve(cloud, R, k, t).values
    row = {"n": n, "trial": trial, "R": R, "stream": [n, trial], "beta": [int(b) for b in beta]}
    need_profiles = cfg.M is not None or cfg.invariants_on
    if need_profiles:
        truncated, violations = [], 0
        tail = tail_points(cloud, R).points if cfg.invariants_on else None
        for g, tg in enumerate(t):
            prof = component_profile(cloud, R, k, tg)
            if cfg.M is not None:
                truncated.append(int(truncated_betti(prof, cfg.M)))
            if cfg.invariants_on:
                b = prof.beta()
                J = prof.counts.get((k + 2, 1), 0)
                L = connected_subset_count(tail, tg, k + 3) if tg > 0 else 0
                if b != beta[g] or not J <= b <= J + math.comb(k + 3, k + 1) * L:
                    violations += 1
        if cfg.M is not None:
            row["truncated"] = truncated
        if cfg.invariants_on:
            row["violations"] = violations
    return row


def _trial_task(args):
    return _trial(*args)


def _limit_curve(cfg: ExperimentConfig, spec: RegimeSpec, t: np.ndarray, workers: int):
    m, k = spec.model, cfg.k
    common = dict(budget=cfg.mc_budget, seed=cfg.seed, workers=workers)
    fact = math.factorial(k + 2)
    if spec.rule in ("power-case-i", "power-case-ii"):
        c = mu_curve(m.d, k, m.alpha, t, lam=0.0, minimal=True, **common)
        return c.mean / fact, c.stderr / fact, c
    if spec.rule == "exp-case-i":
        c = xi_curve(m.d, k, m.tau, t, lam=0.0, c=m.c_limit, minimal=True, **common)
        return c.mean / fact, c.stderr / fact, c
    lam = spec.lam()
    if spec.rule == "power-case-iii":
        c = mu_curve(m.d, k, m.alpha, t, lam=lam, M_cap=cfg.limit_M, inner_budget=cfg.inner_budget, **common)
    else:
        c = xi_curve(m.d, k, m.tau, t, lam=lam, c=m.c_limit, M_cap=cfg.limit_M,
                     inner_budget=cfg.inner_budget, **common)
    return c.mean, c.stderr, c


def run_convergence(config: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    """Run every ``(n, trial)`` cell and compare against the limit curve.

    Cells run in a process pool when ``workers > 1``; each writes to its own
    slot, so the report does not depend on ``workers``.
    """
    spec = config.regime_spec()
    label, lam_hat = classify_regime(spec, PROBE)
    if label == "degenerate":
        raise ConfigError(f"radius rule {spec.rule} is degenerate: the Betti scaler vanishes")
    t = config.t_values()
    block = config.to_dict()
    cells = [(n, tr) for n in config.n_values for tr in range(config.trials)]
    tasks = [(block, n, tr) for n, tr in cells]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_trial_task(a) for a in tasks]

    scalers = {n: spec.scaler(n) for n in config.n_values}
    for row in rows:
        row["scaled"] = [b / scalers[row["n"]] for b in row["beta"]]

    lim_mean, lim_se, curve = _limit_curve(config, spec, t, workers)
    summary = []
    for n in config.n_values:
        S = np.array([r["scaled"] for r in rows if r["n"] == n])
        mean = S.mean(axis=0)
        se = S.std(axis=0, ddof=1) / math.sqrt(len(S)) if len(S) > 1 else np.zeros(len(t))
        gap = np.abs(mean - lim_mean)
        g = int(np.argmax(gap))
        summary.append({
            "n": n,
            "scaler": scalers[n],
            "mean": mean.tolist(),
            "stderr": se.tolist(),
            "sup_distance": float(gap[g]),
            "argmax_t": float(t[g]),
            "pooled_se": float(math.hypot(se[g], lim_se[g])),
        })

    invariants = {"checked": config.invariants_on}
    if config.invariants_on:
        invariants["violations"] = int(sum(r["violations"] for r in rows))
    if config.M is not None:
        invariants["truncated_exceeds_full"] = int(
            sum(any(a > b for a, b in zip(r["truncated"], r["beta"])) for r in rows)
        )

    return ConvergenceReport(
        config=block,
        regime={"rule": spec.rule, "label": label, "lam": spec.lam(), "lam_hat": lam_hat,
                "limit": spec.limit_description()},
        scaler={"name": spec.scaler_name, "formula": spec.scaler_formula,
                "values": [[n, scalers[n]] for n in config.n_values]},
        t=[float(x) for x in t],
        limit={"mean": [float(x) for x in lim_mean], "stderr": [float(x) for x in lim_se],
               "tail_bound": curve.to_dict()["tail_bound"], "samples": curve.samples, "seed": curve.seed},
        rows=rows,
        summary=summary,
        invariants=invariants,
    )


# ---------------------------------------------------------------- output


def _summary_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.summary{ext or '.csv'}"


def emit(report: ConvergenceReport, fmt: str, path) -> list[str]:
    """Write the report; returns the paths written.

    ``json`` writes the whole report.  ``csv`` writes one row per
    ``(n, trial, t)`` to ``path`` and a per-``(n, t)`` summary beside it
    whose ``#`` comment lines carry the config, seeds and scalers.
    """
    path = os.fspath(path)
    try:
        if fmt == "json":
            with open(path, "w") as fh:
                json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
                fh.write("\n")
            return [path]
        if fmt != "csv":
            raise ConfigError(f"unknown format {fmt!r}")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "trial", "t", "beta", "scaled"])
            for row in report.rows:
                for t, b, s in zip(report.t, row["beta"], row["scaled"]):
                    w.writerow([row["n"], row["trial"], repr(t), b, repr(s)])
        spath = _summary_path(path)
        with open(spath, "w", newline="") as fh:
            meta = {"config": report.config, "regime": report.regime, "scaler": report.scaler,
                    "invariants": report.invariants}
            for key in sorted(meta):
                fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "t", "mean", "stderr", "limit", "limit_stderr"])
            for s in report.summary:
                for g, t in enumerate(report.t):
                    w.writerow([s["n"], repr(t), repr(s["mean"][g]), repr(s["stderr"][g]),
                                repr(report.limit["mean"][g]), repr(report.limit["stderr"][g])])
        return [path, spath]
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def load_report(path) -> ConvergenceReport:
    try:
        with open(path) as fh:
            return ConvergenceReport.from_dict(json.load(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
