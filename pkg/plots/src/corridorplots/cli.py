"""plot --kind <k> --in <csv...> [--filter key=val ...] --out <path>"""

from __future__ import annotations

import argparse
import sys

from . import FIGURE_KINDS
from .data import PlotDataError
from .figures import render, save


def _parse_filter(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, val = text.split("=", 1)
    return key, val


def _parse_window(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"expected x_start,x_end,t_start,t_end, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from simulator CSV output.")
    ap.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    ap.add_argument("--in", dest="inputs", nargs="+", required=True,
                    metavar="CSV", help="input CSV file(s)")
    ap.add_argument("--filter", dest="filters", action="append", default=[],
                    type=_parse_filter, metavar="KEY=VAL",
                    help="keep only rows where column KEY equals VAL; "
                         "repeatable")
    ap.add_argument("--out", required=True,
                    help="output image; extension picks the format "
                         "(default .svg)")
    ap.add_argument("--cwp-spacing", type=float, default=300.0,
                    help="waypoint spacing for the spatiotemporal position "
                         "axis, m (default 300)")
    ap.add_argument("--window", type=_parse_window, default=None,
                    metavar="X0,X1,T0,T1",
                    help="blocked-region rectangle drawn on spatiotemporal "
                         "figures")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        fig = render(args.kind, args.inputs, args.filters,
                     cwp_spacing=args.cwp_spacing, window=args.window)
        path = save(fig, args.out)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
