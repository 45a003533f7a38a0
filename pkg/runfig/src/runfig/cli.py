"""Command-line figure emitter for run containers.

    runfig render --manifest RUN_DIR --panel pinem --out spectrum.png
    runfig render --manifest RUN_DIR --panel exchange --time 11.1 --out x.png
    runfig render --manifest RUN_DIR --panel all --out figures/

``--panel all`` renders the standard four-panel set for every snapshot into
the output directory.  Exit codes: 0 success, 2 bad arguments, 4 container
or file errors.
"""

from __future__ import annotations

import argparse
import sys

from .reader import BoxError
from .render import PANELS, FigureRequest, figure_set, render

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="runfig", description="Render figures from archived run containers."
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    draw = sub.add_parser("render", help="draw one panel, or the full set")
    draw.add_argument(
        "--manifest",
        required=True,
        help="run container directory (or its manifest.json)",
    )
    draw.add_argument(
        "--panel",
        required=True,
        choices=(*PANELS, "all"),
        help="panel kind; 'all' renders the standard set per snapshot",
    )
    draw.add_argument(
        "--time",
        type=float,
        default=None,
        help="snapshot time in fs (nearest match; default: latest snapshot)",
    )
    draw.add_argument(
        "--index", type=int, default=None, help="snapshot index (alternative to --time)"
    )
    draw.add_argument(
        "--scale",
        choices=("linear", "log"),
        default=None,
        help="color/axis scale (default: log for pinem, linear elsewhere)",
    )
    draw.add_argument(
        "--space",
        choices=("real", "momentum"),
        default="real",
        help="pair-slice space for pair_density/exchange panels",
    )
    draw.add_argument(
        "--out",
        required=True,
        help="output image path ('all': output directory)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.panel == "all":
            written = figure_set(args.manifest, args.out)
            print(f"wrote {len(written)} images to {args.out}")
        else:
            path = render(
                FigureRequest(
                    manifest_path=args.manifest,
                    panel=args.panel,
                    out_path=args.out,
                    time_fs=args.time,
                    index=args.index,
                    scale=args.scale,
                    space=args.space,
                )
            )
            print(path)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BoxError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
