"""Command line entry point: ``python3 -m tailbetti <subcommand>``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from .density import sample_cloud
from .harness import ConfigError, ExperimentConfig, OutputError, emit, preset, run_convergence
from .limits import MuSpec, XiSpec, mu_estimate, xi_estimate
from .tail import CapacityError, tail_betti_curve

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_IO = 0, 2, 3, 4


def _config(args) -> ExperimentConfig:
    if getattr(args, "preset", None):
        cfg = preset(args.preset)
    elif args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        raise ConfigError("give --config <path> or --preset <name>")
    if args.seed is not None:
        cfg.seed = int(args.seed)
    return cfg


def _writer(path):
    if path is None:
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def cmd_sample(args) -> None:
    cfg = _config(args)
    spec = cfg.regime_spec()
    n = args.n or cfg.n_values[0]
    cloud = sample_cloud(spec.model, n, cfg.seed, stream_ids=(n, args.trial))
    fh, close = _writer(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"x{i + 1}" for i in range(cloud.d)])
        for i, x in zip(cloud.ids, cloud.points):
            w.writerow([int(i)] + [repr(float(v)) for v in x])
    finally:
        if close:
            fh.close()


def cmd_betti(args) -> None:
    cfg = _config(args)
    spec = cfg.regime_spec()
    n = args.n or cfg.n_values[0]
    cloud = sample_cloud(spec.model, n, cfg.seed, stream_ids=(n, args.trial))
    R = spec.radius(n)
    curve = tail_betti_curve(cloud, R, cfg.k, cfg.t_values())
    fh, close = _writer(args.out)
    try:
        if args.format == "json":
            json.dump({"n": n, "trial": args.trial, "R": R, "k": cfg.k, "seed": cfg.seed,
                       "t": [float(t) for t in curve.t_grid], "beta": [int(b) for b in curve.values]},
                      fh, indent=1)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "beta"])
            for t, b in curve.to_rows():
                w.writerow([repr(t), b])
    finally:
        if close:
            fh.close()


def cmd_limit(args) -> None:
    seed = 0 if args.seed is None else int(args.seed)
    common = dict(d=args.d, k=args.k, i=args.i, j=args.j, t=args.t, lam=args.lam,
                  budget=args.budget, inner_budget=args.inner_budget, seed=seed)
    if args.family == "mu":
        if args.alpha is None:
            raise ConfigError("mu needs --alpha")
        spec = MuSpec(alpha=args.alpha, **common)
        est = mu_estimate(spec, workers=args.threads)
        params = {**common, "alpha": args.alpha}
    else:
        c = math.inf if args.c is None else args.c
        spec = XiSpec(tau=args.tau, c=c, **common)
        est = xi_estimate(spec, workers=args.threads)
        params = {**common, "tau": args.tau, "c": "inf" if math.isinf(c) else c}
    params.pop("seed")
    out = {"family": args.family, "params": params, "mean": est.mean, "stderr": est.stderr,
           "samples": est.samples, "seed": est.seed}
    fh, close = _writer(args.out)
    try:
        json.dump(out, fh, indent=1)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def cmd_converge(args) -> None:
    cfg = _config(args)
    fmt = args.format or cfg.format
    out = args.out or cfg.out
    if out is None:
        raise ConfigError("converge needs --out <path> (or 'out' in the config)")
    report = run_convergence(cfg, workers=args.threads)
    for path in emit(report, fmt, out):
        print(path)


def cmd_preset(args) -> None:
    cfg = preset(args.name)
    if args.seed is not None:
        cfg.seed = int(args.seed)
    fh, close = _writer(args.out)
    try:
        json.dump(cfg.to_dict(), fh, indent=1)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tailbetti", description="Tail Betti numbers of heavy-tailed point clouds.")
    sub = p.add_subparsers(dest="command", required=True)

    def shared(sp, config=True):
        if config:
            sp.add_argument("--config", help="experiment config (JSON)")
            sp.add_argument("--preset", help="use a named preset instead of --config")
        sp.add_argument("--seed", type=int, help="master seed (u64)")
        sp.add_argument("--out", help="output path (stdout if omitted)")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--threads", type=int, default=1, help="worker processes")

    sp = sub.add_parser("sample", help="emit one point cloud as CSV")
    shared(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--trial", type=int, default=0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("betti", help="tail Betti curve of one cloud")
    shared(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--trial", type=int, default=0)
    sp.set_defaults(func=cmd_betti)

    sp = sub.add_parser("limit", help="one Monte Carlo estimate of a limiting functional")
    shared(sp, config=False)
    sp.add_argument("--family", choices=["mu", "xi"], required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--lam", type=float, default=0.0)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--c", type=float, help="auxiliary limit c (omit for infinity)")
    sp.add_argument("--budget", type=int, default=100_000)
    sp.add_argument("--inner-budget", type=int, default=4096)
    sp.set_defaults(func=cmd_limit)

    sp = sub.add_parser("converge", help="full convergence experiment")
    shared(sp)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("preset", help="print a named config")
    sp.add_argument("name")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
