"""Command line front end: one subcommand per figure kind.

Exit codes: 0 on success, 1 when inputs fail validation or the output
cannot be written, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, PrecheckError, render
from .schemas import SchemaError


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landscape-figures",
        description="Render comparison figures from landscape-lab CSV artifacts.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    specs = {
        "panels": ("two curves side by side", 2),
        "overlay": ("two profiles with their divergence region shaded", 2),
        "surfaces": ("three sheets plus the rectangle remainder of a fourth", 4),
    }
    for kind, (help_text, arity) in specs.items():
        p = sub.add_parser(kind, help=help_text)
        p.add_argument("inputs", nargs=arity, type=Path, metavar="CSV")
        p.add_argument("--out", type=Path, required=True, help="output .png or .svg")
        p.add_argument(
            "--labels",
            type=str,
            default=None,
            help="comma-separated panel labels (defaults to input stems)",
        )
        p.add_argument("--dpi", type=int, default=150)
        if kind == "overlay":
            p.add_argument(
                "--tol",
                type=float,
                default=1e-6,
                help="agreement tolerance for the shaded region",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    labels: tuple[str, ...] = ()
    if args.labels:
        labels = tuple(part.strip() for part in args.labels.split(","))

    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=tuple(args.inputs),
            out=args.out,
            labels=labels,
            tol=getattr(args, "tol", 1e-6),
            dpi=args.dpi,
        )
        out = render(spec)
    except (SchemaError, PrecheckError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


def entrypoint() -> None:
    sys.exit(main())
