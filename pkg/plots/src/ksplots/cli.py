"""Batch figure rendering: one subcommand per figure kind.

Exit codes: 0 success, 2 schema mismatch, 4 missing input file.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksplots", description="Render figures from kslearn output files."
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("profile-overlay",
                       help="learned vs regularized profile with density and inset")
    p.add_argument("--curve", required=True, help="profile_curve.csv")
    p.add_argument("--density", required=True, help="density.csv")
    p.add_argument("--report", required=True, help="report.json")
    p.add_argument("--inset-max", type=float, default=None,
                   help="inset upper radius (default 3 * r_c)")
    p.add_argument("--out", required=True, help="output image path")

    p = sub.add_parser("trajectory-fan", help="particle trajectories colored by time")
    p.add_argument("--traj", required=True, help="trajectory CSV")
    p.add_argument("--traj2", default=None,
                   help="second trajectory CSV (learned/true side by side)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("adaptive-compare",
                       help="adaptive vs uniform learned profiles with knot marks")
    p.add_argument("--model-adaptive", required=True, help="SplineModel JSON")
    p.add_argument("--model-uniform", required=True, help="SplineModel JSON")
    p.add_argument("--density", required=True, help="density.csv")
    p.add_argument("--curve", default=None,
                   help="optional profile_curve.csv for the truth overlay")
    p.add_argument("--out", required=True)
    return parser


def spec_from_args(args) -> FigureSpec:
    if args.kind == "profile-overlay":
        return FigureSpec(
            kind=args.kind,
            inputs={"curve": args.curve, "density": args.density, "report": args.report},
            inset_max=args.inset_max,
        )
    if args.kind == "trajectory-fan":
        return FigureSpec(kind=args.kind, inputs={"traj": args.traj, "traj2": args.traj2})
    return FigureSpec(
        kind=args.kind,
        inputs={
            "model_adaptive": args.model_adaptive,
            "model_uniform": args.model_uniform,
            "density": args.density,
            "curve": args.curve,
        },
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(spec_from_args(args), args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
