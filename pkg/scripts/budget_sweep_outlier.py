#!/usr/bin/env python3
"""Budget sweep on the planted-outlier instance, one curve per sampling method.

Writes <out>/<method>.curve.csv and <out>/<method>.report.json for each method
and prints a success-rate table. Methods share the instance and the seed, so
curves are directly comparable.
"""

import argparse
import os

from lewisreg.dataio import write_json
from lewisreg.experiment import ExperimentSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--magnitude", type=float, default=1e6)
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--budgets", type=int, nargs="+",
                    default=[50, 100, 200, 400, 800, 1500])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--methods", nargs="+",
                    default=["lewis", "uniform", "leverage_l2_baseline",
                             "known_y_augmented"])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="sweep_outlier")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    instance = {"family": "outlier", "n": args.n, "d": args.d,
                "outlier_magnitude": args.magnitude, "noise_scale": 1.0}
    curves = {}
    for method in args.methods:
        spec = ExperimentSpec(instance=instance, method=method,
                              budgets=args.budgets, eps=args.eps, delta=0.1,
                              trials=args.trials, seed=args.seed,
                              workers=args.workers)
        report = run_experiment(spec)
        curves[method] = report.curve_rows()
        prefix = os.path.join(args.out, method)
        write_json(prefix + ".report.json", report.to_json_dict())
        with open(prefix + ".curve.csv", "w") as fh:
            fh.write("budget,success_rate,ci_low,ci_high,mean_ratio\n")
            for row in report.curve_rows():
                fh.write(",".join("" if v is None else repr(v) for v in row) + "\n")

    header = "budget".ljust(8) + "".join(m.ljust(24) for m in args.methods)
    print(header)
    for i, budget in enumerate(args.budgets):
        cells = []
        for m in args.methods:
            b, rate, lo, hi, _ = curves[m][i]
            cells.append(f"{rate:.2f} [{lo:.2f},{hi:.2f}]".ljust(24))
        print(str(budget).ljust(8) + "".join(cells))


if __name__ == "__main__":
    main()
