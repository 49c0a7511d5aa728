#!/usr/bin/env python3
"""Distance-exponent ladder study: medians, theta fit, atom trend.

Writes medians.csv, ecdf_<n>.csv, theta.json, atoms.csv plus a manifest
into --out, then renders the plot-ready TSVs.
"""

import argparse

from lrplab.experiments import parse_config, report, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/scaling")
    ap.add_argument("--seed", type=int, default=88)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--n-values", type=int, nargs="+",
                    default=[32, 64, 128, 256, 512, 1024, 2048])
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    config = parse_config({
        "kind": "scaling", "seed": args.seed, "out": args.out,
        "jobs": args.jobs,
        "model": {"d": args.d, "beta": args.beta},
        "params": {"n_values": args.n_values,
                   "replicates": args.replicates}})
    run(config)
    for path in report(args.out):
        print(path)


if __name__ == "__main__":
    main()
