"""Script entry: plotkit --in <csv> --out <png> [--kind auto] [--markers]."""

from __future__ import annotations

import argparse
import sys

from . import RENDERERS, PlotJob, SchemaError, detect_schema


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit",
                                     description="Render lab CSV outputs to PNG")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV (repeatable; first one is rendered)")
    parser.add_argument("--out", dest="output", required=True)
    parser.add_argument("--kind", default="auto",
                        choices=["auto", *RENDERERS])
    parser.add_argument("--markers", action="store_true")
    parser.add_argument("--dpi", type=int, default=110)
    args = parser.parse_args(argv)

    try:
        kind = args.kind if args.kind != "auto" else detect_schema(args.inputs[0])
        job = PlotJob(inputs=args.inputs, output=args.output,
                      markers=args.markers, dpi=args.dpi)
        out = RENDERERS[kind](job)
    except FileNotFoundError as err:
        print(f"plotkit: {err}", file=sys.stderr)
        return 2
    except SchemaError as err:
        print(f"plotkit: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
