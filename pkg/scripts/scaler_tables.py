"""Write radius and scaler tables (n, R_n, nf(R_n), scaler) for every preset."""

import argparse
import os

import numpy as np

from tailbetti.harness import PRESETS, preset
from tailbetti.regimes import classify_regime, loglog_slope, write_scaler_csv


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--outdir", default="scaler_tables")
    args = p.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    ns = np.logspace(3, 15, 13)
    for name in sorted(PRESETS):
        spec = preset(name).regime_spec()
        write_scaler_csv(spec, ns, os.path.join(args.outdir, f"{name}.csv"))
        label, lam_hat = classify_regime(spec, [1e4, 1e6, 1e8, 1e10])
        slope = loglog_slope(ns, [spec.scaler(n) for n in ns])
        ratio = spec.scaler(1e12) / spec.asymptotic_scaler(1e12)
        print(f"{name:9} {spec.scaler_name:17} {label:18} lam_hat={lam_hat:.4g} "
              f"loglog slope={slope:.3f} ratio@1e12={ratio:.4f}")


if __name__ == "__main__":
    main()
