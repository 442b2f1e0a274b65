"""Command-line entry point: gsbm-plots --input report.csv --kind histogram
[--overlay summary.json] --out figure.png"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import PlotJob, PlotKind, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsbm-plots",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, help="report CSV to render")
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in PlotKind],
                        help="which report schema the input follows")
    parser.add_argument("--overlay", default=None,
                        help="JSON summary with l_plus / z / per_point overlays")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(input_csv=Path(args.input), kind=PlotKind(args.kind),
                  output_image=Path(args.out),
                  overlay_json=Path(args.overlay) if args.overlay else None)
    try:
        render(job)
    except (SchemaError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
