"""Batch command line: run the full pipeline, run a standalone ANOVA over a
CSV grid, print mid-range vectors, or launch the HTTP service.

Exit codes: 0 success, 2 file/schema problems (including usage errors),
3 consistency-gate failure, 4 missing data that the chosen policy cannot
resolve.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .anova import anova_block, anova_two_factor_no_rep, decide
from .dataset import (CRITERIA_BY_ID, PARAMETER_UNITS, load_performance_table,
                      build_criterion_vector, quantitative_criteria)
from .errors import (ConsistencyGateError, DewatError, MissingDataError,
                     SchemaError)
from .gridio import parse_grid
from .pipeline import (DEFAULT_ALPHA, Injections, PipelineOptions,
                       judgments_from_doc, parse_policy, render_report,
                       report_document, run_pipeline)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_CONSISTENCY = 3
EXIT_MISSING = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dewatselect",
        description="Decision support for ranking treatment technologies: "
                    "normalized cost scoring, expert-panel consensus, ANOVA.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the full scoring pipeline")
    run.add_argument("--dataset", required=True, help="performance table CSV")
    run.add_argument("--judgments", help="JSON list of consensus pairwise judgments")
    run.add_argument("--inject", help="JSON file with injected columns/cells")
    run.add_argument("--policy", default="exclude_renormalize",
                     help="missing-data policy: exclude_renormalize (default), "
                          "worst_observed, or inject")
    run.add_argument("--weights", help="comma-separated criterion weights (sum 1); "
                                       "default equal")
    run.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                     help="ANOVA significance level (default 0.05)")
    run.add_argument("--allow-inconsistent", action="store_true",
                     help="proceed even when a judgment matrix fails CR < 0.1")
    run.add_argument("--out", help="write the report JSON here instead of stdout")

    anova = sub.add_parser("anova", help="two-factor ANOVA without replication "
                                         "over a CSV grid")
    anova.add_argument("--matrix", required=True,
                       help="labelled CSV grid, or - for stdin")
    anova.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    anova.add_argument("--json", action="store_true", help="machine-readable output")

    mid = sub.add_parser("midrange", help="per-technology mid-ranges of one criterion")
    mid.add_argument("--dataset", required=True, help="performance table CSV")
    mid.add_argument("--criterion", required=True,
                     choices=[c.parameter.value for c in quantitative_criteria()],
                     help="quantitative criterion parameter code")
    mid.add_argument("--json", action="store_true", help="machine-readable output")

    serve = sub.add_parser("serve", help="launch the HTTP service")
    serve.add_argument("--data-dir", help="storage directory "
                                          "(default $DEWATSELECT_DATA_DIR)")
    serve.add_argument("--listen", help="host:port (default $DEWATSELECT_LISTEN "
                                        "or 127.0.0.1:8000)")
    serve.add_argument("--token", help="facilitator token "
                                       "(default $DEWATSELECT_FACILITATOR_TOKEN)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "anova":
            return _cmd_anova(args)
        if args.command == "midrange":
            return _cmd_midrange(args)
        return _cmd_serve(args)
    except ConsistencyGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except MissingDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (SchemaError, DewatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _cmd_run(args) -> int:
    dataset_text = _read_text(args.dataset)
    table = load_performance_table(args.dataset)

    judgments = None
    judgments_text = None
    if args.judgments:
        judgments_text = _read_text(args.judgments)
        judgments = judgments_from_doc(json.loads(judgments_text))

    injections = None
    injections_text = None
    if args.inject:
        injections_text = _read_text(args.inject)
        injections = Injections.from_dict(json.loads(injections_text))

    weights = None
    if args.weights:
        try:
            weights = tuple(float(w) for w in args.weights.split(","))
        except ValueError:
            raise SchemaError(f"weights must be comma-separated numbers, "
                              f"got {args.weights!r}") from None

    options = PipelineOptions(weights=weights, policy=parse_policy(args.policy),
                              alpha=args.alpha,
                              allow_inconsistent=args.allow_inconsistent)
    result = run_pipeline(table, judgments, injections, options)
    doc = report_document(result, dataset_text, judgments_text, injections_text)
    text = render_report(doc)

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        for tech in result.tns.by_rank:
            print(f"{result.tns.rank[tech]:>2}  {tech:<10} TNS {result.tns.tns[tech]:.4f}")
        word = "rejected" if result.decision.reject_rows else "not rejected"
        print(f"ANOVA: p_rows {result.anova.p_rows:.5f}; "
              f"H0 (no difference between technologies) {word} "
              f"at alpha {result.decision.alpha}")
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fmt(x: float, digits: int = 6) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.{digits}g}"


def _cmd_anova(args) -> int:
    if args.matrix == "-":
        text = sys.stdin.read()
    else:
        text = _read_text(args.matrix)
    row_labels, col_labels, values = parse_grid(text)
    table = anova_two_factor_no_rep(values)
    decision = decide(table, args.alpha)

    if args.json:
        block = anova_block(table, decision)
        block["row_labels"] = row_labels
        block["col_labels"] = col_labels
        print(json.dumps(block, sort_keys=True, indent=2))
        return EXIT_OK

    print(f"{len(row_labels)} rows x {len(col_labels)} columns")
    print(f"{'source':<8} {'SS':>12} {'df':>4} {'MS':>12} {'F':>10} {'p':>10}")
    print(f"{'rows':<8} {table.ss_rows:>12.6f} {table.df_rows:>4} "
          f"{table.ms_rows:>12.6f} {_fmt(table.f_rows):>10} {table.p_rows:>10.5f}")
    print(f"{'columns':<8} {table.ss_cols:>12.6f} {table.df_cols:>4} "
          f"{table.ms_cols:>12.6f} {_fmt(table.f_cols):>10} {table.p_cols:>10.5f}")
    print(f"{'error':<8} {table.ss_error:>12.6f} {table.df_error:>4} "
          f"{table.ms_error:>12.6f}")
    print(f"{'total':<8} {table.ss_total:>12.6f} {table.df_rows + table.df_cols + table.df_error:>4}")
    if table.ms_error_zero:
        print("note: error mean square is zero; F and p follow the degenerate convention")
    word = "rejected" if decision.reject_rows else "not rejected"
    print(f"H0 (no row effect) {word} at alpha {decision.alpha}: "
          f"p {table.p_rows:.5f}, F {_fmt(table.f_rows)} vs critical "
          f"{decision.f_critical_rows:.5f}")
    return EXIT_OK


def _cmd_midrange(args) -> int:
    table = load_performance_table(args.dataset)
    criterion = next(c for c in quantitative_criteria()
                     if c.parameter.value == args.criterion)
    vector = build_criterion_vector(table, criterion)
    unit = PARAMETER_UNITS[criterion.parameter]
    if args.json:
        print(json.dumps({"criterion": args.criterion, "unit": unit,
                          "values": vector.values,
                          "missing": sorted(vector.missing)},
                         sort_keys=True, indent=2))
        return EXIT_OK
    print(f"{args.criterion} mid-ranges" + (f" ({unit})" if unit else ""))
    for tech in table.technologies:
        if tech in vector.missing:
            print(f"  {tech:<10} -   (no reported range)")
        else:
            print(f"  {tech:<10} {vector.values[tech]:g}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import DEFAULT_LISTEN, create_app, parse_listen

    listen = args.listen or os.environ.get("DEWATSELECT_LISTEN", DEFAULT_LISTEN)
    host, port = parse_listen(listen)
    app = create_app(data_dir=args.data_dir, facilitator_token=args.token)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
