"""plots render --fig fig2 --summary summary.csv --out fig2.png

Exit codes: 0 image written; 1 schema/usage error; 2 empty data.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURES, EmptyDataError, PlotJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("render", help="render a figure from bench CSV output")
    p.add_argument("--fig", required=True, choices=FIGURES)
    p.add_argument("--summary", help="summary.csv (fig2, fig3)")
    p.add_argument("--rows", help="rows.csv (fig4)")
    p.add_argument("--out", required=True)
    p.add_argument("--linear-y", action="store_true",
                   help="disable the log y-axis of fig2")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(figure=args.fig, out_path=args.out,
                      summary_path=args.summary, rows_path=args.rows,
                      log_y=not args.linear_y)
        render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except EmptyDataError as exc:
        print(f"warning: empty plot: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
