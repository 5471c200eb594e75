"""plotkit plot --kind {energy,growth,phase} --in PATH [--thresholds PATH] --out PATH"""
from __future__ import annotations

import argparse
import sys

from .plots import plot_energy, plot_growth, plot_phase
from .schema import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Figure generation from rodwave artifacts")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("plot", help="render one figure")
    sp.add_argument("--kind", required=True, choices=["energy", "growth", "phase"])
    sp.add_argument("--in", dest="in_path", required=True)
    sp.add_argument("--thresholds", default=None,
                    help="thresholds JSON (required for phase plots)")
    sp.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    try:
        if args.kind == "energy":
            plot_energy(args.in_path, args.out)
        elif args.kind == "growth":
            plot_growth(args.in_path, args.out)
        else:
            if args.thresholds is None:
                print("phase plots need --thresholds", file=sys.stderr)
                return 2
            plot_phase(args.in_path, args.thresholds, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
