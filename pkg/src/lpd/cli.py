"""Command-line interface.

Subcommands: train, predict, cv, simulate, screen. Exit codes: 0 success,
1 usage error, 2 data error, 3 solver failure. All randomness flows from
--seed flags; repeated runs with identical flags produce byte-identical
output files. The only environment variable honored is LPD_THREADS, an
optional worker cap for the simulate command.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import dataio
from .classifier import auto_ridge, decision_scores, fit_lpd_from_moments, predict
from .errors import DataError, LpdError, SolverError
from .l1solver import SolverConfig
from .model_selection import CvPlan, cross_validate, default_lambda_grid
from .simulation import METHOD_ORDER, SimulationSpec, run_benchmark
from .stats import compute_moments, t_statistic_screen, variance_filter

USAGE_ERROR, DATA_ERROR, SOLVER_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit code 2; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit_(USAGE_ERROR, f"{self.prog}: error: {message}")


class SystemExit_(Exception):
    def __init__(self, code, message=None):
        super().__init__(message or "")
        self.code = code
        self.message = message


def _schema_args(parser):
    parser.add_argument("--delimiter", default=",", help="field delimiter (default ',')")
    parser.add_argument(
        "--label-column", type=int, default=0, help="0-based label column (default 0)"
    )
    parser.add_argument("--has-header", action="store_true", help="skip the first row")


def _schema(args):
    return dataio.DataFileSchema(
        delimiter=args.delimiter, label_column=args.label_column, has_header=args.has_header
    )


def _positive_float(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _rho_value(text):
    if text == "auto":
        return "auto"
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("rho must be >= 0 or 'auto'")
    return value


def _lambda_value(text):
    if text == "auto":
        return "auto"
    return _positive_float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="fit a model on a labeled CSV")
    train.add_argument("--data", required=True)
    train.add_argument("--lambda", dest="lam", type=_lambda_value, default="auto",
                       help="constraint radius, or 'auto' to choose by CV")
    train.add_argument("--folds", type=int, default=5)
    train.add_argument("--grid-size", type=int, default=20)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--rho", type=_rho_value, default="auto",
                       help="ridge perturbation, or 'auto' for sqrt(log p / n)")
    train.add_argument("--indices", default=None,
                       help="index map written by `screen --indices-out`; lets the "
                            "model accept original-width inputs")
    train.add_argument("--out", required=True)
    train.add_argument("--verbose", action="store_true", help="print solver diagnostics")
    _schema_args(train)

    pred = sub.add_parser("predict", help="score a CSV of samples with a saved model")
    pred.add_argument("--model", required=True)
    pred.add_argument("--data", required=True)
    pred.add_argument("--out", required=True)
    pred.add_argument("--has-labels", action="store_true",
                      help="the data file carries a label column to ignore")
    _schema_args(pred)

    cv = sub.add_parser("cv", help="report CV correct-counts over a lambda grid")
    cv.add_argument("--data", required=True)
    cv.add_argument("--grid-size", type=int, default=20)
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--seed", type=int, default=0)
    cv.add_argument("--out", default=None, help="write CSV here instead of stdout")
    _schema_args(cv)

    sim = sub.add_parser("simulate", help="run a replicated synthetic benchmark")
    sim.add_argument("--model-id", type=int, required=True, choices=(1, 2, 3))
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--n1", type=int, default=200)
    sim.add_argument("--n2", type=int, default=200)
    sim.add_argument("--s0", type=int, default=10)
    sim.add_argument("--rho", type=float, default=None)
    sim.add_argument("--dist", choices=("normal", "t5"), default="normal")
    sim.add_argument("--reps", type=int, default=20)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--methods", default=",".join(METHOD_ORDER),
                     help="comma-separated subset of " + ",".join(METHOD_ORDER))
    sim.add_argument("--folds", type=int, default=5)
    sim.add_argument("--grid-size", type=int, default=20)
    sim.add_argument("--out", required=True)

    screen = sub.add_parser("screen", help="variance-filter and t-screen features")
    screen.add_argument("--data", required=True)
    screen.add_argument("--var-min", type=float, default=None)
    screen.add_argument("--var-max", type=float, default=None)
    screen.add_argument("--scale", type=float, default=1.0)
    screen.add_argument("--top-k", type=int, default=None)
    screen.add_argument("--out", required=True)
    screen.add_argument("--indices-out", default=None,
                        help="also write the kept-column index map")
    _schema_args(screen)

    return parser


def _cmd_train(args):
    data = dataio.load_dataset(args.data, _schema(args))
    moments = compute_moments(data)
    rho = auto_ridge(moments.p, moments.n1 + moments.n2) if args.rho == "auto" else args.rho
    provenance = {
        "data": str(args.data),
        "seed": args.seed,
        "rho_source": "auto" if args.rho == "auto" else "fixed",
    }
    if args.lam == "auto":
        grid = default_lambda_grid(moments, args.grid_size)
        plan = CvPlan(folds=args.folds, lambda_grid=grid, seed=args.seed)
        result = cross_validate(data, plan)
        lam = result.chosen_lambda
        provenance.update(
            {
                "lambda_source": "cv",
                "folds": args.folds,
                "grid_size": args.grid_size,
                "grid_max": float(plan.lambda_grid[0]),
                "grid_min": float(plan.lambda_grid[-1]),
                "cv_correct": int(result.per_lambda_correct()[lam]),
            }
        )
    else:
        lam = args.lam
        provenance["lambda_source"] = "fixed"
    model = fit_lpd_from_moments(moments, lam, SolverConfig(), rho)
    if args.indices is not None:
        model.kept_indices = dataio.load_indices(args.indices)
        if model.kept_indices.size != model.p:
            raise DataError(
                f"{args.indices}: {model.kept_indices.size} indices but the model has {model.p} features"
            )
    model.metadata.update(provenance)
    dataio.save_model(args.out, model)
    if args.verbose:
        print(
            "solver: {iterations} iterations, duality gap {duality_gap:.2e}, "
            "max residual {max_residual:.6g}".format(**model.metadata)
        )
    print(f"wrote {args.out} (lambda={lam:g}, rho={rho:g})")
    return 0


def _load_feature_rows(path, args):
    if args.has_labels:
        return dataio.load_dataset(path, _schema(args)).features
    schema = _schema(args)
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle, delimiter=schema.delimiter), start=1):
            if not row or (schema.has_header and lineno == 1):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise DataError(f"{path}: row {lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: rows have differing lengths {sorted(widths)}")
    return np.asarray(rows, dtype=float)


def _cmd_predict(args):
    model = dataio.load_model(args.model)
    features = _load_feature_rows(args.data, args)
    scores = decision_scores(model, features)
    classes = predict(model, features)
    dataio.save_predictions(args.out, classes, scores)
    print(f"wrote {args.out} ({len(np.atleast_1d(classes))} predictions)")
    return 0


def _cmd_cv(args):
    data = dataio.load_dataset(args.data, _schema(args))
    moments = compute_moments(data)
    grid = default_lambda_grid(moments, args.grid_size)
    plan = CvPlan(folds=args.folds, lambda_grid=grid, seed=args.seed)
    result = cross_validate(data, plan)
    text = dataio.save_cv_table(args.out, result)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.out} (chosen lambda={result.chosen_lambda:g})")
    return 0


def _max_workers():
    raw = os.environ.get("LPD_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _cmd_simulate(args):
    spec = SimulationSpec(
        model_id=args.model_id,
        p=args.p,
        n1=args.n1,
        n2=args.n2,
        s0=args.s0,
        rho=args.rho,
        distribution=args.dist,
        reps=args.reps,
        seed=args.seed,
    )
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    report = run_benchmark(
        spec,
        methods=methods,
        cv_folds=args.folds,
        grid_size=args.grid_size,
        max_workers=_max_workers(),
    )
    dataio.save_report(args.out, report)
    summary = ", ".join(
        f"{m}={report.error_mean[m]:.2f}%" for m in METHOD_ORDER if m in report.methods
    )
    print(f"wrote {args.out} ({report.reps_completed} reps: {summary})")
    return 0


def _cmd_screen(args):
    want_variance = args.var_min is not None or args.var_max is not None
    if want_variance and (args.var_min is None or args.var_max is None):
        raise SystemExit_(USAGE_ERROR, "screen: --var-min and --var-max go together")
    if not want_variance and args.top_k is None:
        raise SystemExit_(USAGE_ERROR, "screen: nothing to do; pass variance bounds and/or --top-k")
    data = dataio.load_dataset(args.data, _schema(args))
    kept = np.arange(data.p)
    if want_variance:
        data, kept_v = variance_filter(data, args.var_min, args.var_max, args.scale)
        kept = kept[kept_v]
    if args.top_k is not None:
        data, kept_t = t_statistic_screen(data, args.top_k)
        kept = kept[kept_t]
    dataio.save_dataset(args.out, data, _schema(args))
    if args.indices_out:
        dataio.save_indices(args.indices_out, kept)
    print(f"wrote {args.out} ({kept.size} features kept)")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "cv": _cmd_cv,
    "simulate": _cmd_simulate,
    "screen": _cmd_screen,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except SystemExit_ as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except SolverError as exc:
        print(f"lpd: solver failure: {exc}", file=sys.stderr)
        return SOLVER_ERROR
    except (DataError, OSError) as exc:
        print(f"lpd: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except LpdError as exc:
        print(f"lpd: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
