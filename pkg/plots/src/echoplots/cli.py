"""Command line for the figure renderer.

Usage:
    echo-plots render --spec FIGURE.toml
    echo-plots render KIND IN.csv OUT.png [--xlabel ...] [--ylabel ...]
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="echo-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a simulator CSV")
    p.add_argument("positional", nargs="*", metavar="KIND IN.csv OUT.png",
                   help="figure kind, input CSV and output image")
    p.add_argument("--spec", type=str, default=None, help="TOML figure spec file")
    p.add_argument("--xlabel", type=str, default="")
    p.add_argument("--ylabel", type=str, default="")
    p.add_argument("--title", type=str, default="")
    return parser


def _spec_from_args(args) -> FigureSpec:
    if args.spec is not None:
        with open(args.spec, "rb") as fh:
            data = tomllib.load(fh)
        fig = data.get("figure", data)
        return FigureSpec(
            input=fig["input"],
            kind=fig["kind"],
            output=fig["output"],
            xlabel=fig.get("xlabel", ""),
            ylabel=fig.get("ylabel", ""),
            title=fig.get("title", ""),
        )
    if len(args.positional) != 3:
        raise ValueError(f"expected KIND IN.csv OUT.png (kinds: {', '.join(KINDS)})")
    kind, inp, out = args.positional
    return FigureSpec(input=inp, kind=kind, output=out, xlabel=args.xlabel,
                      ylabel=args.ylabel, title=args.title)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = _spec_from_args(args)
        report = render(spec)
    except (SchemaError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {report.output} ({report.width_px}x{report.height_px})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
