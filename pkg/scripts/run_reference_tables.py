#!/usr/bin/env python3
"""Rebuild every reference table and write CSV/Markdown under results/.

The full sweep reruns the resolved schemes down to eps = 1.5e-8 and takes
tens of minutes; pass --quick for shortened horizons that preserve the
scheme rankings and trends.
"""

import argparse
import sys
import time

from drift_ap.harness import TABLE_PRESETS, reproduce_tables


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results")
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--presets", nargs="*", default=list(TABLE_PRESETS))
    args = parser.parse_args()

    for preset in args.presets:
        start = time.perf_counter()
        tables = reproduce_tables(preset, out_dir=args.out, quick=args.quick)
        for table in tables:
            print(table.render_markdown())
        print(f"# {preset}: {time.perf_counter() - start:.1f}s\n")
    print(f"tables written to {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
