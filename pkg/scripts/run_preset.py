"""Run one named preset end to end and print the per-n summary.

    python3 scripts/run_preset.py ex31-iii --trials 50 --out runs/ex31-iii.json
"""

import argparse
import time

from tailbetti.harness import PRESETS, emit, preset, run_convergence


def main():
    p = argparse.ArgumentParser()
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    args = p.parse_args()

    cfg = preset(args.name)
    cfg.seed = args.seed
    if args.trials:
        cfg.trials = args.trials
    start = time.time()
    rep = run_convergence(cfg, workers=args.workers)
    print(f"{args.name}: {rep.regime['label']}, scaler {rep.scaler['name']}, lam {rep.regime['lam']:.5g}")
    print(f"{'n':>8} {'scaler':>12} {'sup dist':>12} {'pooled SE':>12} {'max beta':>9}")
    for s in rep.summary:
        top = max(max(r["beta"]) for r in rep.rows if r["n"] == s["n"])
        print(f"{s['n']:>8} {s['scaler']:>12.5g} {s['sup_distance']:>12.4g} {s['pooled_se']:>12.4g} {top:>9}")
    print(f"invariants: {rep.invariants}  ({time.time() - start:.1f}s)")
    if args.out:
        emit(rep, "json", args.out)


if __name__ == "__main__":
    main()
