"""Command-line entry point: run one case, rebuild tables, or self-check.

Subcommands
    run     advance one configuration and report drift-limit metrics
    tables  rerun a preset sweep and emit its table as CSV + Markdown
    check   fast property suite (fixed point, conservation, solvers, limit)

Configuration precedence: command-line flags override values from the
optional --config file (flat key=value lines mirroring the flag names),
which override the built-in defaults.  Exit codes: 0 success, 1 runtime
failure (or divergence under --strict), 2 usage error.  The environment
variable DRIFT_AP_THREADS caps the worker count of table sweeps (timing
sweeps always run sequentially).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (TABLE_PRESETS, RunConfig, reproduce_tables, run,
                      validate_config)
from .model import CaseKind
from .riemann import SpeedMode
from .stepper import SchemeKind

SCHEMES = {kind.value: kind for kind in SchemeKind}
MODES = {mode.value: mode for mode in SpeedMode}
CASES = {kind.value: kind for kind in CaseKind}

# Keys accepted in a config file; identical to the run flag names.
CONFIG_KEYS = ("scheme", "mode", "epsilon", "epsilon-prime", "case", "cfl",
               "nx", "ny", "t-final", "snapshot-times", "out")

SIDE_ASSIGNMENT_NOTE = (
    "# boundary sides: I=west (x=0), II=east (x=1), "
    "III=south (y=0), IV=north (y=1)\n"
    "# ghost corner fill order: west, east, south, north (last write wins)")


def _parse_snapshot_times(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(
            f"--snapshot-times expects comma-separated floats: {err}")


def load_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and # comments are skipped."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def render_config(config: RunConfig) -> str:
    """Config-file text that parses back to the same RunConfig."""
    lines = [
        f"scheme={config.scheme.value}",
        f"mode={config.mode.value}",
        f"epsilon={config.epsilon!r}",
        f"case={config.case.value}",
        f"cfl={config.cfl!r}",
        f"nx={config.nx}",
        f"ny={config.ny}",
        f"t-final={config.t_final!r}",
    ]
    if config.epsilon_prime is not None:
        lines.append(f"epsilon-prime={config.epsilon_prime!r}")
    if config.snapshot_times:
        lines.append("snapshot-times="
                     + ",".join(repr(t) for t in config.snapshot_times))
    if config.out_dir is not None:
        lines.append(f"out={config.out_dir}")
    return "\n".join(lines) + "\n"


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scheme", choices=sorted(SCHEMES), default="ap")
    sub.add_argument("--mode", choices=sorted(MODES), default="nonresolved")
    sub.add_argument("--epsilon", type=float, default=1e-6,
                     help="scaled gyro-period (default 1e-6)")
    sub.add_argument("--epsilon-prime", type=float, default=None,
                     help="boundary perturbation amplitude (defaults to "
                          "epsilon when prepared, 1e-2 when unprepared)")
    sub.add_argument("--case", choices=sorted(CASES), default="prepared")
    sub.add_argument("--cfl", type=float, default=0.5)
    sub.add_argument("--nx", type=int, default=100)
    sub.add_argument("--ny", type=int, default=100)
    sub.add_argument("--t-final", type=float, default=0.1)
    sub.add_argument("--snapshot-times", type=_parse_snapshot_times,
                     default=None, help="comma-separated times to snapshot")
    sub.add_argument("--out", default=None,
                     help="output directory for CSV/SVG artifacts")
    sub.add_argument("--config", default=None,
                     help="key=value config file (flags take precedence)")
    sub.add_argument("--strict", action="store_true",
                     help="exit 1 when the run diverges")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drift-ap",
        description="Finite-volume Euler-Lorentz solver in the "
                    "drift-fluid scaling.")
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run one configuration")
    _add_run_flags(run_p)

    tab_p = subs.add_parser("tables", help="reproduce a reference table")
    tab_p.add_argument("--preset", choices=TABLE_PRESETS, required=True)
    tab_p.add_argument("--out", default="results")
    tab_p.add_argument("--quick", action="store_true",
                       help="shorten horizons (trends preserved, values "
                            "differ; see README)")

    subs.add_parser("check", help="run the fast property suite")
    return parser


def _config_from_args(args: argparse.Namespace,
                      parser: argparse.ArgumentParser) -> RunConfig:
    if args.config is not None:
        try:
            file_values = load_config_file(args.config)
        except (OSError, ValueError) as err:
            parser.error(str(err))
        # Re-parse with file values as defaults so explicit flags win.
        run_parser = argparse.ArgumentParser(prog="drift-ap run")
        _add_run_flags(run_parser)
        defaults = {}
        for key, value in file_values.items():
            dest = key.replace("-", "_")
            if key == "snapshot-times":
                defaults[dest] = _parse_snapshot_times(value)
            elif key in ("nx", "ny"):
                defaults[dest] = int(value)
            elif key in ("epsilon", "epsilon-prime", "cfl", "t-final"):
                defaults[dest] = float(value)
            else:
                defaults[dest] = value
        run_parser.set_defaults(**defaults)
        args = run_parser.parse_args(args.raw_run_args)

    config = RunConfig(
        scheme=SCHEMES[args.scheme],
        mode=MODES[args.mode],
        epsilon=args.epsilon,
        epsilon_prime=args.epsilon_prime,
        case=CASES[args.case],
        cfl=args.cfl,
        nx=args.nx,
        ny=args.ny,
        t_final=args.t_final,
        snapshot_times=args.snapshot_times or (),
        out_dir=args.out,
    )
    try:
        validate_config(config)
    except ValueError as err:
        parser.error(str(err))
    return config


def parse(argv: list[str]) -> argparse.Namespace:
    """Parse argv; for `run`, attach the fully resolved RunConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        args.raw_run_args = [a for a in argv[1:]]
        args.run_config = _config_from_args(args, parser)
    return args


def _echo_resolved_config(config: RunConfig) -> None:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = render_config(config) + SIDE_ASSIGNMENT_NOTE + "\n"
    (out / "config_resolved.txt").write_text(text)


def _cmd_run(args: argparse.Namespace) -> int:
    config: RunConfig = args.run_config
    if config.out_dir is not None:
        _echo_resolved_config(config)
    report = run(config)
    m = report.metrics
    print(f"scheme={config.scheme.value} mode={config.mode.value} "
          f"epsilon={config.epsilon:g} t_end={report.t_end:g} "
          f"steps={report.steps} wall={report.wall_time:.3f}s")
    print(f"max diff vs drift limit: n={m.n_rel_pct:.6g}% "
          f"mx={m.mx_rel_pct:.6g}% my={m.my_rel_pct:.6g}% "
          f"|mz|={m.mz_abs:.6g}")
    if report.diverged:
        print(f"DIVERGED: {report.diverge_reason}")
        if args.strict:
            return 1
    return 0


def _cmd_tables(args: argparse.Namespace) -> int:
    tables = reproduce_tables(args.preset, out_dir=args.out, quick=args.quick)
    for table in tables:
        print(table.render_markdown())
    print(f"written to {args.out}/")
    return 0


def _cmd_check() -> int:
    from .checks import run_all_checks

    failed = None
    for name, passed, detail in run_all_checks():
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        if not passed and failed is None:
            failed = name
    if failed is not None:
        print(f"first failing property: {failed}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = parse(sys.argv[1:] if argv is None else argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "tables":
            return _cmd_tables(args)
        return _cmd_check()
    except Exception as err:  # surfaced, not a traceback dump
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
