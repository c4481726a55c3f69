"""Command-line interface: select / fit / export / synth / tangents.

Every run is reproducible from its inputs alone; the only
non-deterministic report field is the wall time.  Exit codes: 0 when the
engine finished (optimality proven, or the requested computation simply
completed), 2 when a branch-and-bound run returned a time-limit
incumbent, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .data import PreprocessOptions, encode_labels, load_csv, preprocess
from .loss import default_tangents, make_tangents, read_tangent_points
from .model_io import (
    LpExportOptions,
    export_lp,
    report_to_dict,
    write_report,
    _num,
)
from .selector import (
    SelectionProblem,
    SelectionReport,
    branch_and_bound,
    criterion_value,
    evaluate_subset,
    exhaustive_select,
    stepwise_warm_start,
    _FitCache,
)
from .synth import write_synth_csv

TIME_LIMIT_ENV = "SEQSEL_TIME_LIMIT"


def _tangent_set(spec: str):
    if spec == "default17":
        return default_tangents()
    return make_tangents(read_tangent_points(spec))


def _build_problem(args, approx: str):
    table = load_csv(args.input, args.label)
    opts = PreprocessOptions(
        missing_threshold=args.missing_threshold,
        standardize=not args.no_standardize,
        drop_columns=tuple(args.drop or ()),
    )
    data = preprocess(table, opts)
    enc = encode_labels(data, args.direction)
    tangents = _tangent_set(args.tangents) if approx == "pwl" else None
    return SelectionProblem(
        data=data,
        encoding=enc,
        criterion=args.criterion,
        approx=approx,
        tangents=tangents,
        time_limit=args.time_limit,
    )


def _emit(report: SelectionReport, output: str | None, verbose: bool) -> None:
    payload = report_to_dict(report)
    if output:
        write_report(payload, output)
    print(
        f"{payload['method']} {_num(payload['criterion_value'])} "
        f"{_num(payload['objval'])} {len(payload['selected'])} "
        f"{_num(payload['wall_time_s'])}"
    )
    if verbose:
        print(
            f"selected: {payload['selected_names']}; nodes={payload['nodes']}; "
            f"optimal={payload['optimal']}",
            file=sys.stderr,
        )
        for w in payload["warnings"]:
            print(f"warning: {w}", file=sys.stderr)


def run_select(args) -> int:
    approx = {
        "exhaustive": "exact",
        "stepwise": "exact",
        "bnb-exact": "exact",
        "bnb-quad": "quad",
        "bnb-pwl": "pwl",
    }[args.method]
    prob = _build_problem(args, approx)
    if args.method == "exhaustive":
        report = exhaustive_select(prob)
    elif args.method == "stepwise":
        started = time.monotonic()
        cache = _FitCache(prob, prob.approx)
        subset = frozenset(stepwise_warm_start(prob, _cache=cache))
        loss, fits = cache(subset)
        crit = criterion_value(loss, len(subset), prob.data.m, prob.penalty)
        sel = tuple(sorted(subset))
        report = SelectionReport(
            method="stepwise",
            direction=prob.encoding.direction,
            criterion_name=prob.criterion,
            criterion_value=crit,
            objval=crit,
            lower_bound=None,
            selected=sel,
            selected_names=tuple(prob.data.feature_names[j] for j in sel),
            fits=fits,
            n=prob.data.n,
            p=prob.data.p,
            m=prob.data.m,
            nodes=len(cache.store),
            incumbent_updates=len(subset) + 1,
            wall_time_s=time.monotonic() - started,
            optimal=False,
            warnings=("stepwise is a heuristic; no optimality guarantee",),
        )
    else:
        report = branch_and_bound(prob)
    _emit(report, args.output, args.verbose)
    if args.method.startswith("bnb") and not report.optimal:
        return 2
    return 0


def run_fit(args) -> int:
    prob = _build_problem(args, "exact")
    names = [t for t in (args.features.split(",") if args.features else []) if t]
    seen = set()
    for name in names:
        if name in seen:
            raise ValueError(f"duplicate feature name {name!r}")
        seen.add(name)
        if name not in prob.data.feature_names:
            raise ValueError(f"unknown feature name {name!r}")
    index = {name: j for j, name in enumerate(prob.data.feature_names)}
    subset = frozenset(index[name] for name in names)

    started = time.monotonic()
    _, crit, fits = evaluate_subset(prob, subset)
    loss_sum = sum(f.loss for f in fits)
    m = prob.data.m
    aic = criterion_value(loss_sum, len(subset), m, 2.0)
    bic = criterion_value(loss_sum, len(subset), m, math.log(prob.data.n))
    sel = tuple(sorted(subset))
    report = SelectionReport(
        method="fit",
        direction=prob.encoding.direction,
        criterion_name=prob.criterion,
        criterion_value=crit,
        objval=crit,
        lower_bound=None,
        selected=sel,
        selected_names=tuple(prob.data.feature_names[j] for j in sel),
        fits=fits,
        n=prob.data.n,
        p=prob.data.p,
        m=m,
        nodes=1,
        incumbent_updates=0,
        wall_time_s=time.monotonic() - started,
        optimal=True,
        warnings=(),
    )
    print(f"aic {_num(aic)}")
    print(f"bic {_num(bic)}")
    for k, fit in enumerate(fits, start=1):
        coefs = " ".join(
            f"{name}={_num(w)}" for name, w in zip(report.selected_names, fit.coefficients)
        )
        print(f"class {k}: intercept={_num(fit.intercept)} {coefs}".rstrip())
    _emit(report, args.output, args.verbose)
    return 0


def run_export(args) -> int:
    if not args.output:
        raise ValueError("export requires --output")
    approx = args.approx
    prob = _build_problem(args, "pwl" if approx == "pwl" else "exact")
    opts = LpExportOptions(
        approx=approx,
        encoding=args.encoding,
        big_m=args.big_m,
        tangents=_tangent_set(args.tangents) if approx == "pwl" else None,
    )
    export_lp(prob, opts, args.output)
    print(f"wrote {args.output}")
    return 0


def run_synth(args) -> int:
    truth = write_synth_csv(
        args.output,
        seed=args.seed,
        n=args.n,
        p=args.p,
        m=args.m,
        n_true=args.n_true,
    )
    truth_path = args.output + ".truth.json"
    with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.output} and {truth_path}")
    return 0


def run_tangents(args) -> int:
    tset = _tangent_set(args.tangents)
    print("point slope offset")
    for point, slope, offset in zip(tset.points, tset.slopes, tset.offsets):
        name = "inf" if point == math.inf else "-inf" if point == -math.inf else _num(point)
        print(f"{name} {_num(slope)} {_num(offset)}")
    return 0


def _add_io_args(sp, with_label=True):
    sp.add_argument("--input", required=True, help="input CSV path")
    sp.add_argument("--label", required=with_label, help="label column name")
    sp.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    sp.add_argument(
        "--direction", choices=("forward", "backward"), default="forward"
    )
    sp.add_argument(
        "--drop", action="append", metavar="COLUMN", help="drop a column before fitting"
    )
    sp.add_argument("--missing-threshold", type=float, default=0.10)
    sp.add_argument("--no-standardize", action="store_true")
    sp.add_argument("--output", help="report/output file path")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqsel",
        description=(
            "AIC/BIC-optimal feature subset selection for sequential logit"
            " (continuation-ratio) ordinal classifiers"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    env_limit = float(os.environ.get(TIME_LIMIT_ENV, "600"))

    sp = sub.add_parser("select", help="run a subset-selection engine")
    _add_io_args(sp)
    sp.add_argument(
        "--method",
        choices=("exhaustive", "bnb-exact", "bnb-pwl", "bnb-quad", "stepwise"),
        default="bnb-pwl",
    )
    sp.add_argument("--tangents", default="default17")
    sp.add_argument("--time-limit", type=float, default=env_limit)
    sp.set_defaults(func=run_select)

    sp = sub.add_parser("fit", help="exact refit on a fixed feature subset")
    _add_io_args(sp)
    sp.add_argument(
        "--features",
        default="",
        help="comma-separated feature names; empty for intercept-only",
    )
    sp.set_defaults(func=run_fit)

    sp = sub.add_parser("export", help="write the model as an LP-format file")
    _add_io_args(sp)
    sp.add_argument("--approx", choices=("quad", "pwl"), default="pwl")
    sp.add_argument("--encoding", choices=("bigm", "sos1"), default="bigm")
    sp.add_argument("--big-m", type=float, default=100.0)
    sp.add_argument("--tangents", default="default17")
    sp.set_defaults(func=run_export)

    sp = sub.add_parser("synth", help="generate a synthetic instance CSV")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--p", type=int, default=8)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--n-true", type=int, default=3)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=run_synth)

    sp = sub.add_parser("tangents", help="print the tangent slope/offset table")
    sp.add_argument("--tangents", default="default17")
    sp.set_defaults(func=run_tangents)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"seqsel: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
