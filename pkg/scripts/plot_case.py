#!/usr/bin/env python3
"""Run one configuration and emit its snapshots, sections, and SVG plots.

Thin wrapper over the CLI `run` subcommand that defaults the output
directory; the final-time snapshot, midline sections, and dt history are
always written there.
"""

import sys

from drift_ap.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if "--out" not in argv:
        argv += ["--out", "results/case"]
    sys.exit(main(["run", *argv]))
