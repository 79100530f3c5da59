"""Command-line front end.

Subcommands: weights (importance scores of a design matrix), solve (full,
known-label sketch, or active label-querying modes), experiment (Monte Carlo
budget sweeps from a JSON spec), gen (instance generation).

Exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import sys
import time

from .active import FileBackedLabelOracle, active_solve, sketch_and_solve_known_y
from .dataio import (
    DataError,
    read_json,
    read_labels,
    read_matrix_csv,
    write_json,
    write_labels,
    write_matrix_csv,
)
from .experiment import ExperimentSpec, run_experiment, trial_stream
from .instances import (
    biased_hypercube_instance,
    hidden_coordinate_instance,
    make_isolated_instance,
    make_outlier_instance,
    reduce_to_matrix,
    two_coin_instances,
)
from .lad import LadProblem, objective, solve_lad
from .lewis import ConvergenceError, LewisConfig, lewis_weights, verify_fixed_point
from .linalg import RankDeficiencyError, leverage_scores
from .sketch import RngStream

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lewisreg",
                     description="Label-efficient LAD regression by Lewis-weight sampling")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("weights", help="row importance scores of a CSV matrix")
    w.add_argument("x_file")
    w.add_argument("--kind", choices=["lewis", "leverage"], default="lewis")
    w.add_argument("--tol", type=float, default=1e-10)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_weights)

    s = sub.add_parser("solve", help="LAD regression, full or sketched")
    s.add_argument("x_file")
    s.add_argument("y_file")
    s.add_argument("--mode", choices=["full", "sketch_known_y", "active"],
                   default="full")
    s.add_argument("--eps", type=float, default=0.25)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--budget", type=int, default=None,
                   help="sketch row count; default recommended_budget")
    s.add_argument("--regime", choices=["high_prob", "constant_prob"],
                   default="high_prob")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--solver-tol", type=float, default=1e-8)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="Monte Carlo budget sweep from a JSON spec")
    e.add_argument("spec_file")
    e.add_argument("--out-prefix", default=None,
                   help="override the spec's output path prefix")
    e.set_defaults(func=cmd_experiment)

    g = sub.add_parser("gen", help="generate instance files")
    gsub = g.add_subparsers(dest="family", required=True, parser_class=_Parser)

    go = gsub.add_parser("outlier")
    go.add_argument("--n", type=int, required=True)
    go.add_argument("--d", type=int, required=True)
    go.add_argument("--magnitude", type=float, default=1e6)
    go.add_argument("--noise-scale", type=float, default=1.0)
    go.add_argument("--outliers", type=int, default=1)

    gi = gsub.add_parser("isolated")
    gi.add_argument("--n", type=int, required=True)
    gi.add_argument("--d", type=int, required=True)
    gi.add_argument("--magnitude", type=float, default=10.0)
    gi.add_argument("--noise-scale", type=float, default=0.05)

    gr = gsub.add_parser("reduced")
    gr.add_argument("--family", dest="dist_family", required=True,
                    choices=["biased_hypercube", "two_coin", "hidden_coordinate"])
    gr.add_argument("--d", type=int, required=True)
    gr.add_argument("--bias", type=float, default=0.1)
    gr.add_argument("--which", type=int, default=0, choices=[0, 1],
                    help="two_coin: which of the pair")
    gr.add_argument("--hidden-index", type=int, default=0)
    gr.add_argument("--eps", type=float, default=0.2)
    gr.add_argument("--delta", type=float, default=0.1)
    gr.add_argument("--constants", choices=["proof", "statement"], default="proof")

    for sp in (go, gi, gr):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-x", required=True)
        sp.add_argument("--out-y", required=True)
        sp.add_argument("--meta", default=None)
        sp.set_defaults(func=cmd_gen)

    return parser


def cmd_weights(args) -> int:
    X = read_matrix_csv(args.x_file)
    if args.kind == "lewis":
        w = lewis_weights(X, LewisConfig(tol=args.tol))
        check = {"fixed_point_residual": verify_fixed_point(X, w)}
    else:
        w = leverage_scores(X)
        check = {"trace_gap": abs(w.total - X.shape[1])}
    write_json(args.out, {
        "kind": args.kind,
        "n": int(X.shape[0]),
        "d": int(X.shape[1]),
        "weight_sum": w.total,
        "check": check,
        "weights": [float(v) for v in w.values],
    })
    return 0


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    X = read_matrix_csv(args.x_file)
    n, d = X.shape
    out: dict = {"mode": args.mode, "n": n, "d": d, "seed": args.seed}

    if args.mode == "full":
        y = read_labels(args.y_file)
        if y.shape[0] != n:
            raise DataError(f"{args.y_file}: {y.shape[0]} labels for {n} rows")
        sol = solve_lad(LadProblem(X, y), tol=args.solver_tol)
        out.update(beta=[float(v) for v in sol.beta], objective=sol.objective,
                   status=sol.status, labels_queried=n, n_draws=None)
    elif args.mode == "sketch_known_y":
        y = read_labels(args.y_file)
        if y.shape[0] != n:
            raise DataError(f"{args.y_file}: {y.shape[0]} labels for {n} rows")
        budget = args.budget
        rng = trial_stream(args.seed, 0, budget if budget is not None else -1)
        res = sketch_and_solve_known_y(X, y, args.eps, args.delta, rng,
                                       regime=args.regime, budget_override=budget,
                                       enforce_guarantee=False,
                                       solver_tol=args.solver_tol)
        full_obj = objective(LadProblem(X, y), res.beta_hat)
        out.update(beta=[float(v) for v in res.beta_hat], objective=full_obj,
                   sketched_objective=res.sketched_objective, status=res.solver_status,
                   labels_queried=res.labels_queried, n_draws=res.n_draws)
    else:  # active: only queried label lines are ever read
        oracle = FileBackedLabelOracle(args.y_file)
        if oracle.n != n:
            raise DataError(f"{args.y_file}: {oracle.n} labels for {n} rows")
        budget = args.budget
        rng = trial_stream(args.seed, 0, budget if budget is not None else -1)
        res = active_solve(X, oracle, args.eps, args.delta, rng,
                           regime=args.regime, budget_override=budget,
                           solver_tol=args.solver_tol)
        out.update(beta=[float(v) for v in res.beta_hat],
                   objective=res.sketched_objective,
                   status=res.solver_status, labels_queried=res.labels_queried,
                   n_draws=res.n_draws, label_lines_read=oracle.lines_read,
                   query_log=[int(i) for i in oracle.query_log])

    out["timing_seconds"] = time.perf_counter() - t0
    if args.out:
        write_json(args.out, out)
    else:
        from .dataio import json_bytes
        sys.stdout.write(json_bytes(out).decode("utf-8") + "\n")
    return 0


def cmd_experiment(args) -> int:
    spec_obj = read_json(args.spec_file)
    spec = ExperimentSpec.from_json_dict(spec_obj)
    report = run_experiment(spec)
    prefix = args.out_prefix or spec.output
    if prefix is None:
        prefix = args.spec_file.rsplit(".json", 1)[0]
    write_json(f"{prefix}.report.json", report.to_json_dict())
    with open(f"{prefix}.curve.csv", "w", encoding="utf-8") as fh:
        fh.write("budget,success_rate,ci_low,ci_high,mean_ratio\n")
        for budget, rate, lo, hi, mean_ratio in report.curve_rows():
            mr = "" if mean_ratio is None else repr(mean_ratio)
            fh.write(f"{budget},{rate!r},{lo!r},{hi!r},{mr}\n")
    for agg in report.aggregates:
        print(f"budget {agg['budget']}: success {agg['successes']}/{agg['trials']}"
              f" ({agg['success_rate']:.2f})")
    return 0


def cmd_gen(args) -> int:
    rng = RngStream(args.seed).derive("gen", args.family)
    meta: dict = {"family": args.family, "seed": args.seed}
    if args.family == "outlier":
        inst = make_outlier_instance(args.n, args.d, args.magnitude, rng,
                                     n_outliers=args.outliers,
                                     noise_scale=args.noise_scale)
        X, y = inst.X, inst.y
        meta.update(n=args.n, d=args.d, magnitude=args.magnitude,
                    noise_scale=args.noise_scale, outliers=args.outliers,
                    beta_star=[float(v) for v in inst.beta_star], opt=inst.opt)
    elif args.family == "isolated":
        inst = make_isolated_instance(args.n, args.d, rng,
                                      magnitude=args.magnitude,
                                      noise_scale=args.noise_scale)
        X, y = inst.X, inst.y
        meta.update(n=args.n, d=args.d, magnitude=args.magnitude,
                    noise_scale=args.noise_scale,
                    beta_star=[float(v) for v in inst.beta_star], opt=inst.opt)
    else:  # reduced
        if args.dist_family == "biased_hypercube":
            dist = biased_hypercube_instance(args.d, args.bias, rng=rng)
        elif args.dist_family == "two_coin":
            dist = two_coin_instances(args.d, args.bias)[args.which]
        else:
            dist = hidden_coordinate_instance(args.d, args.hidden_index)
        X, y = reduce_to_matrix(dist, args.eps, args.delta,
                                rng.derive("reduction"), constants=args.constants)
        meta.update(distribution=args.dist_family, d=args.d,
                    n=int(X.shape[0]), eps=args.eps, delta=args.delta,
                    constants=args.constants,
                    beta_star=[float(v) for v in dist.beta_star])
    write_matrix_csv(args.out_x, X)
    write_labels(args.out_y, y)
    if args.meta:
        write_json(args.meta, meta)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except (RankDeficiencyError, ConvergenceError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
