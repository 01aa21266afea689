"""Command-line entry points.

    mtverify run --plan plan.json --out results/
    mtverify mutants --target cnn
    mtverify report --matrix results/matrix.json --format text
    mtverify equivariance --trials 200

Exit codes: 0 success, 1 baseline gate failure (the clean subject was
killed) or a failed equivariance check, 2 bad configuration or data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import BaselineKilledError, MtVerifyError
from .faults import TARGETS, catalog_json, list_mutants
from .harness.plan import load_plan
from .harness.report import render_csv, render_summary, render_text, summarize
from .harness.runner import load_matrix, run_suite
from .metamorphic.equivariance import check_conv_equivariance


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mtverify",
        description="Metamorphic verification of trained classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a verification plan")
    run.add_argument("--plan", required=True, help="path to a plan JSON file")
    run.add_argument("--out", default=None, help="directory for reports and loss curves")
    run.add_argument("--mutant", action="append", default=None,
                     help="restrict to this mutant id (repeatable)")
    run.add_argument("--mr", action="append", default=None,
                     help="restrict to this relation id (repeatable)")
    run.add_argument("--seed", type=int, default=None, help="override the plan seed")
    run.add_argument("--cache-dir", default=None, help="override the plan cache directory")
    run.add_argument("--workers", type=int, default=None,
                     help="parallel mutant rows (default: MTVERIFY_WORKERS or 1)")

    mutants = sub.add_parser("mutants", help="list the fault catalog")
    mutants.add_argument("--target", choices=TARGETS, default=None)
    mutants.add_argument("--json", action="store_true", help="emit the catalog as JSON")

    report = sub.add_parser("report", help="render saved matrices and a summary")
    report.add_argument("--matrix", action="append", required=True,
                        help="matrix.json path (repeatable)")
    report.add_argument("--format", choices=("text", "json", "csv"), default="text")

    equi = sub.add_parser("equivariance", help="check convolution transport identities")
    equi.add_argument("--trials", type=int, default=100)
    equi.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args):
    plan = load_plan(args.plan)
    overrides = {}
    if args.mutant:
        overrides["mutants"] = tuple(args.mutant)
    if args.mr:
        overrides["mrs"] = tuple(args.mr)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.cache_dir is not None:
        overrides["cache_dir"] = args.cache_dir
    if overrides:
        plan = dataclasses.replace(plan, **overrides)
    try:
        result = run_suite(plan, out_dir=args.out, workers=args.workers)
    except BaselineKilledError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.matrix is not None:
            print(render_text(exc.matrix), end="", file=sys.stderr)
        return 1
    print(render_text(result.matrix), end="")
    print(render_summary(summarize(result.matrix)), end="")
    return 0


def _cmd_mutants(args):
    if args.json:
        print(catalog_json(args.target))
        return 0
    for spec in list_mutants(args.target):
        print(f"{spec.id:6} {spec.target:11} {spec.category:14} {spec.description}")
    return 0


def _cmd_report(args):
    matrices = [load_matrix(path) for path in args.matrix]
    if args.format == "json":
        doc = {"matrices": [m.to_dict() for m in matrices],
               "summary": summarize(*matrices)}
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0
    if args.format == "csv":
        for matrix in matrices:
            print(render_csv(matrix), end="")
        return 0
    for matrix in matrices:
        print(render_text(matrix), end="")
    print(render_summary(summarize(*matrices)), end="")
    return 0


def _cmd_equivariance(args):
    report = check_conv_equivariance(trials=args.trials, seed=args.seed)
    print(report.summary())
    return 0 if report.passed else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "mutants": _cmd_mutants,
                "report": _cmd_report, "equivariance": _cmd_equivariance}
    try:
        return handlers[args.command](args)
    except MtVerifyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
