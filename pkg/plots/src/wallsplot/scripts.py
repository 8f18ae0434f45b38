"""Console entry points, one per figure kind: positional CSV, --out PATH."""

import argparse
import sys

from .csvio import SchemaError, read_gaps, read_hitting, read_trajectory
from .figures import plot_gap_series, plot_heatmap, plot_hitting_curve


def _parser(prog: str, what: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=prog, description=f"Render {what}.")
    p.add_argument("csv", help="input CSV path")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--dpi", type=int, default=150)
    return p


def _run(reader, renderer, prog, what, argv):
    args = _parser(prog, what).parse_args(argv)
    try:
        fig = renderer(reader(args.csv))
        fig.savefig(args.out, dpi=args.dpi)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


def heatmap_main(argv=None) -> int:
    return _run(read_trajectory, plot_heatmap, "wallsplot-heatmap",
                "a space-time heatmap with wall-contact overlay", argv)


def gaps_main(argv=None) -> int:
    return _run(read_gaps, plot_gap_series, "wallsplot-gaps",
                "the minimum wall-gap series", argv)


def hitting_main(argv=None) -> int:
    return _run(read_hitting, plot_hitting_curve, "wallsplot-hitting",
                "the hit probability curve across exponents", argv)
