"""Experiment orchestration: run loops, drift-limit metrics, table sweeps.

A run advances one configuration from the standard initial data to
t_final, recomputing the CFL time step every step and clipping it so
snapshot times and the final time are hit exactly.  Instabilities
(nonpositive density, non-finite values, collapsing time step) stop the
loop; the report then carries the metrics of the last accepted state
with a diverged flag, matching how unstable configurations are usually
tabulated.

Difference metrics compare against the uniform drift-limit solution
(1, -1, 1, 0): relative maxima (in percent) for n, n*ux, n*uy and the
absolute maximum for n*uz, whose reference value is zero.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .mesh import build_grid
from .model import (CaseKind, CaseSpec, ConservedState, case_params,
                    drift_limit_state, init_case)
from .riemann import SpeedMode, TimeControls, dt_from_speeds
from .stepper import (DivergenceError, SchemeKind, prepare_faces, step_ap,
                      step_conventional)

# The epsilon sweep of the reference experiments and the matching
# observation times (smaller epsilon means costlier resolved runs).
EPS_SWEEP = (1e-5, 1e-6, 1.5e-8)
T_FINALS = (1.0, 0.1, 0.01)
QUICK_T_FINALS = (0.2, 0.05, 0.005)

TABLE_PRESETS = ("errors-resolved", "errors-nonresolved", "dt-table",
                 "cpu-table", "eps1-compare", "unprepared")

FLOAT_FMT = "{:.17g}"  # CSV float format: 17 significant digits


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved knobs of one simulation run."""

    scheme: SchemeKind = SchemeKind.AP
    mode: SpeedMode = SpeedMode.NONRESOLVED
    epsilon: float = 1e-6
    epsilon_prime: float | None = None
    case: CaseKind = CaseKind.PREPARED
    cfl: float = 0.5
    nx: int = 100
    ny: int = 100
    t_final: float = 0.1
    snapshot_times: tuple[float, ...] = ()
    out_dir: str | None = None
    max_steps: int = 2_000_000

    def resolved_epsilon_prime(self) -> float:
        if self.epsilon_prime is not None:
            return self.epsilon_prime
        if self.case is CaseKind.UNPREPARED:
            return 1e-2
        return self.epsilon

    def model_epsilon(self) -> float:
        return 0.0 if self.scheme is SchemeKind.DRIFT_LIMIT else self.epsilon

    def effective_mode(self) -> SpeedMode:
        if self.scheme is SchemeKind.DRIFT_LIMIT:
            return SpeedMode.NONRESOLVED
        return self.mode


def validate_config(config: RunConfig) -> None:
    """Reject configurations the schemes cannot run."""
    if config.t_final <= 0.0:
        raise ValueError(f"t_final must be positive, got {config.t_final}")
    if not (0.0 < config.cfl <= 1.0):
        raise ValueError(f"cfl must lie in (0, 1], got {config.cfl}")
    if config.scheme is SchemeKind.CONVENTIONAL and config.epsilon == 0.0:
        raise ValueError("the conventional scheme cannot run at epsilon = 0")
    if config.scheme is SchemeKind.DRIFT_LIMIT and config.mode is SpeedMode.RESOLVED:
        raise ValueError("the drift-limit scheme has no resolved speeds "
                         "(the sound speed is infinite at epsilon = 0)")
    if (config.mode is SpeedMode.RESOLVED
            and config.scheme is not SchemeKind.DRIFT_LIMIT
            and config.epsilon == 0.0):
        raise ValueError("resolved speeds need epsilon > 0")
    if config.resolved_epsilon_prime() <= 0.0:
        raise ValueError("epsilon_prime must resolve to a positive value")


@dataclass
class DiffMetrics:
    """Maximum differences to the drift-limit solution on interior cells."""

    n_rel_pct: float
    mx_rel_pct: float
    my_rel_pct: float
    mz_abs: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.n_rel_pct, self.mx_rel_pct, self.my_rel_pct, self.mz_abs)


@dataclass
class RunReport:
    """Outcome of one run: final metrics, dt history, cost, stability."""

    config: RunConfig
    metrics: DiffMetrics
    dt_history: np.ndarray
    steps: int
    t_end: float
    wall_time: float
    diverged: bool = False
    diverge_reason: str = ""
    final_state: ConservedState | None = None
    snapshots: dict = field(default_factory=dict)


def diff_from_limit(state: ConservedState) -> DiffMetrics:
    """Percent relative (n, mx, my) and absolute (mz) drift-limit gaps."""
    n_ref, mx_ref, my_ref, _ = drift_limit_state()
    return DiffMetrics(
        n_rel_pct=float(np.max(np.abs(state.interior("n") - n_ref))
                        / abs(n_ref) * 100.0),
        mx_rel_pct=float(np.max(np.abs(state.interior("mx") - mx_ref))
                         / abs(mx_ref) * 100.0),
        my_rel_pct=float(np.max(np.abs(state.interior("my") - my_ref))
                         / abs(my_ref) * 100.0),
        mz_abs=float(np.max(np.abs(state.interior("mz")))),
    )


def pairwise_max_rel_diff(a: ConservedState, b: ConservedState) -> dict:
    """Field-wise max |a - b| normalized by the magnitude of b, percent."""
    out = {}
    for name in ConservedState.FIELDS:
        ref = float(np.max(np.abs(b.interior(name))))
        gap = float(np.max(np.abs(a.interior(name) - b.interior(name))))
        out[name] = gap / ref * 100.0 if ref > 0.0 else gap * 100.0
    return out


def _stepper_for(config: RunConfig):
    if config.scheme is SchemeKind.CONVENTIONAL:
        return step_conventional
    # The drift-limit scheme is step_ap at epsilon = 0, same code path.
    return step_ap


def run(config: RunConfig) -> RunReport:
    """Advance one configuration to t_final and report.

    Deterministic except for the wall-time field: identical configs give
    bit-identical dt histories and final states.
    """
    validate_config(config)
    grid = build_grid(config.nx, config.ny)
    params = case_params(config.model_epsilon())
    case = CaseSpec(config.case, config.epsilon,
                    config.resolved_epsilon_prime())
    state, bc = init_case(case, grid)
    mode = config.effective_mode()
    stepfn = _stepper_for(config)

    stops = sorted({t for t in (*config.snapshot_times, config.t_final)
                    if 0.0 < t <= config.t_final})
    dt_max = config.t_final / 10.0
    dt_floor = 1e-15 * config.t_final

    controls = TimeControls(cfl=config.cfl)
    dts: list[float] = []
    snapshots: dict[float, ConservedState] = {}
    diverged = False
    reason = ""
    next_stop = 0

    wall_start = time.perf_counter()
    while next_stop < len(stops):
        t = controls.t
        target = stops[next_stop]
        faces = prepare_faces(state, grid, params, mode, bc)
        dt = dt_from_speeds(faces.ax, faces.ay, grid, controls.cfl, dt_max)
        if not np.isfinite(dt) or dt < dt_floor:
            diverged = True
            reason = f"time step collapsed to {dt:g} at t={t:g}"
            break
        # Land exactly on the next stop.  The remainder is split over two
        # near-equal steps rather than one tiny one: the parallel solve's
        # quasi-steady state carries an O(1/dt) imprint of the explicit
        # divergence, so a collapsed final step would visibly shift it.
        remaining = target - t
        clipped = dt >= remaining
        if clipped:
            dt = remaining
        elif dt >= 0.5 * remaining:
            dt = 0.5 * remaining
        try:
            state, _ = stepfn(state, grid, params, dt, mode, bc, faces=faces)
        except DivergenceError as err:
            diverged = True
            reason = f"{err} at t={t:g} after {len(dts)} steps"
            break
        dts.append(dt)
        controls.dt = dt
        controls.t = target if clipped else t + dt
        if clipped:
            if target in config.snapshot_times:
                snapshots[target] = state.copy()
            next_stop += 1
        if len(dts) >= config.max_steps:
            diverged = True
            reason = (f"step limit {config.max_steps} reached "
                      f"at t={controls.t:g}")
            break
    wall_time = time.perf_counter() - wall_start

    report = RunReport(
        config=config,
        metrics=diff_from_limit(state),
        dt_history=np.asarray(dts),
        steps=len(dts),
        t_end=controls.t,
        wall_time=wall_time,
        diverged=diverged,
        diverge_reason=reason,
        final_state=state,
        snapshots=snapshots,
    )
    if config.out_dir is not None:
        write_outputs(report, grid)
    return report


# ---------------------------------------------------------------------------
# Output files


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT.format(float(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    """CSV with a mandatory header; floats at 17 significant digits."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _state_rows(state: ConservedState, grid):
    xs = grid.cell_centers_x()
    ys = grid.cell_centers_y()
    for i in range(grid.nx):
        for j in range(grid.ny):
            yield (i + 1, j + 1, xs[i], ys[j],
                   state.n[i + 1, j + 1], state.mx[i + 1, j + 1],
                   state.my[i + 1, j + 1], state.mz[i + 1, j + 1])


SNAPSHOT_HEADER = ("i", "j", "x", "y", "n", "mx", "my", "mz")


def _section_rows(state: ConservedState, grid, axis: str):
    xs = grid.cell_centers_x()
    ys = grid.cell_centers_y()
    if axis == "y":  # cut along x at the row closest to y = 0.5
        j = int(np.argmin(np.abs(ys - 0.5)))
        for i in range(grid.nx):
            yield (i + 1, j + 1, xs[i], ys[j],
                   state.n[i + 1, j + 1], state.mx[i + 1, j + 1],
                   state.my[i + 1, j + 1], state.mz[i + 1, j + 1])
    else:  # cut along y at the column closest to x = 0.5
        i = int(np.argmin(np.abs(xs - 0.5)))
        for j in range(grid.ny):
            yield (i + 1, j + 1, xs[i], ys[j],
                   state.n[i + 1, j + 1], state.mx[i + 1, j + 1],
                   state.my[i + 1, j + 1], state.mz[i + 1, j + 1])


def write_outputs(report: RunReport, grid) -> None:
    """Emit dt_log.csv, metrics.csv, snapshots, sections, and SVG plots."""
    from . import plots  # deferred: pulls in matplotlib

    out = Path(report.config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    t_acc = np.cumsum(report.dt_history)
    write_csv(out / "dt_log.csv", ("step", "t", "dt"),
              ((k + 1, t_acc[k], report.dt_history[k])
               for k in range(report.steps)))
    m = report.metrics
    write_csv(out / "metrics.csv",
              ("n_rel_pct", "mx_rel_pct", "my_rel_pct", "mz_abs",
               "diverged", "steps", "t_end"),
              [(m.n_rel_pct, m.mx_rel_pct, m.my_rel_pct, m.mz_abs,
                int(report.diverged), report.steps, report.t_end)])

    stamped = dict(report.snapshots)
    if not report.diverged and report.final_state is not None:
        stamped.setdefault(report.t_end, report.final_state)
    scheme = report.config.scheme.value
    for t_snap, state in sorted(stamped.items()):
        tag = f"{t_snap:g}"
        write_csv(out / f"snapshot_{tag}.csv", SNAPSHOT_HEADER,
                  _state_rows(state, grid))
        write_csv(out / f"section_y0.5_{tag}.csv", SNAPSHOT_HEADER,
                  _section_rows(state, grid, "y"))
        write_csv(out / f"section_x0.5_{tag}.csv", SNAPSHOT_HEADER,
                  _section_rows(state, grid, "x"))
        plots.plot_sections(state, grid, scheme, t_snap, out, tag)
    if report.steps:
        plots.plot_dt_history(report.dt_history, scheme, out)


# ---------------------------------------------------------------------------
# Table reproduction


@dataclass
class Table:
    """One result table: a name, column labels, and value rows."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple]

    def render_markdown(self) -> str:
        def cell(v):
            return f"{v:.4g}" if isinstance(v, (float, np.floating)) else str(v)

        lines = [f"### {self.name}", "",
                 "| " + " | ".join(self.columns) + " |",
                 "|" + "|".join("---" for _ in self.columns) + "|"]
        lines += ["| " + " | ".join(cell(v) for v in row) + " |"
                  for row in self.rows]
        return "\n".join(lines) + "\n"


def _worker_count(n_jobs: int) -> int:
    cap = int(os.environ.get("DRIFT_AP_THREADS", "1") or "1")
    return max(1, min(cap, n_jobs))


def _run_many(configs, parallel_ok: bool) -> list[RunReport]:
    workers = _worker_count(len(configs)) if parallel_ok else 1
    if workers == 1:
        return [run(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


def _metric_row(eps: float, report: RunReport) -> tuple:
    m = report.metrics
    note = "diverged" if report.diverged else ""
    return (eps, m.n_rel_pct, m.mx_rel_pct, m.my_rel_pct, m.mz_abs, note)


ERROR_COLUMNS = ("epsilon", "n_rel_pct", "mx_rel_pct", "my_rel_pct",
                 "mz_abs", "note")


def _error_tables(mode: SpeedMode, quick: bool) -> list[Table]:
    t_finals = QUICK_T_FINALS if quick else T_FINALS
    label = mode.value
    tables = []
    for scheme in (SchemeKind.CONVENTIONAL, SchemeKind.AP):
        # The unstable configuration saturates into a tiny-dt crawl; in
        # quick mode a step cap cuts it short once instability is evident.
        cap = (3000 if quick and scheme is SchemeKind.CONVENTIONAL
               and mode is SpeedMode.NONRESOLVED else 2_000_000)
        configs = [RunConfig(scheme=scheme, mode=mode, epsilon=eps,
                             t_final=tf, max_steps=cap)
                   for eps, tf in zip(EPS_SWEEP, t_finals)]
        reports = _run_many(configs, parallel_ok=True)
        tables.append(Table(
            name=f"errors-{label}-{scheme.value}",
            columns=ERROR_COLUMNS,
            rows=[_metric_row(eps, rep)
                  for eps, rep in zip(EPS_SWEEP, reports)],
        ))
    return tables


def _dt_table(quick: bool) -> list[Table]:
    t_finals = QUICK_T_FINALS if quick else T_FINALS
    rows = []
    for eps, tf in zip(EPS_SWEEP, t_finals):
        if quick:
            # dt settles within the first steps; a short horizon suffices.
            tf_res = 40.0 * 0.5 / (2.0 * 100.0 * np.sqrt(1.0 / eps) + 200.0)
            tf_nap = 0.05
        else:
            tf_res = tf_nap = tf
        res = run(RunConfig(scheme=SchemeKind.AP, mode=SpeedMode.RESOLVED,
                            epsilon=eps, t_final=tf_res))
        nap = run(RunConfig(scheme=SchemeKind.AP, mode=SpeedMode.NONRESOLVED,
                            epsilon=eps, t_final=tf_nap))
        rows.append((eps, np.log10(eps),
                     float(np.log10(res.dt_history.max())),
                     float(np.log10(nap.dt_history.max()))))
    return [Table(name="dt-table",
                  columns=("epsilon", "log10_gyro_period",
                           "log10_max_dt_ap_resolved", "log10_max_dt_nap"),
                  rows=rows)]


def _cpu_table(quick: bool) -> list[Table]:
    t_finals = QUICK_T_FINALS if quick else T_FINALS
    rows = []
    # Timing runs stay sequential so each one owns the CPU.
    for eps, tf in zip(EPS_SWEEP, t_finals):
        conv = run(RunConfig(scheme=SchemeKind.CONVENTIONAL,
                             mode=SpeedMode.RESOLVED, epsilon=eps, t_final=tf))
        nap = run(RunConfig(scheme=SchemeKind.AP, mode=SpeedMode.NONRESOLVED,
                            epsilon=eps, t_final=tf))
        ratio = conv.wall_time / nap.wall_time if nap.wall_time > 0 else np.inf
        rows.append((eps, tf, conv.wall_time, nap.wall_time, ratio))
    return [Table(name="cpu-table",
                  columns=("epsilon", "t_final", "conventional_seconds",
                           "nap_seconds", "ratio"),
                  rows=rows)]


def _eps1_table() -> list[Table]:
    configs = [RunConfig(scheme=s, mode=SpeedMode.RESOLVED, epsilon=1.0,
                         t_final=1.0)
               for s in (SchemeKind.AP, SchemeKind.CONVENTIONAL)]
    ap, conv = _run_many(configs, parallel_ok=True)
    diffs = pairwise_max_rel_diff(ap.final_state, conv.final_state)
    rows = [(name, diffs[name]) for name in ConservedState.FIELDS]
    return [Table(name="eps1-compare",
                  columns=("field", "ap_vs_conventional_max_rel_diff_pct"),
                  rows=rows)]


def _unprepared_table(quick: bool) -> list[Table]:
    eps = 1e-6
    tf = 0.05 if quick else 0.1
    configs = [
        RunConfig(scheme=SchemeKind.AP, mode=SpeedMode.NONRESOLVED,
                  epsilon=eps, case=CaseKind.UNPREPARED, t_final=tf),
        RunConfig(scheme=SchemeKind.AP, mode=SpeedMode.RESOLVED,
                  epsilon=eps, case=CaseKind.UNPREPARED, t_final=tf),
    ]
    reports = _run_many(configs, parallel_ok=True)
    rows = []
    for rep in reports:
        m = rep.metrics
        rows.append((rep.config.mode.value, m.n_rel_pct, m.mx_rel_pct,
                     m.my_rel_pct, m.mz_abs,
                     "diverged" if rep.diverged else ""))
    return [Table(name="unprepared",
                  columns=("ap_mode", "n_rel_pct", "mx_rel_pct",
                           "my_rel_pct", "mz_abs", "note"),
                  rows=rows)]


def reproduce_tables(preset: str, out_dir: str | None = None,
                     quick: bool = False) -> list[Table]:
    """Rebuild one family of reference tables; optionally write CSV + MD.

    quick=True shortens the horizons (documented in the README); the
    error magnitudes then differ from the reference values, but scheme
    rankings, dt levels, and cost trends are preserved.
    """
    if preset == "errors-resolved":
        tables = _error_tables(SpeedMode.RESOLVED, quick)
    elif preset == "errors-nonresolved":
        tables = _error_tables(SpeedMode.NONRESOLVED, quick)
    elif preset == "dt-table":
        tables = _dt_table(quick)
    elif preset == "cpu-table":
        tables = _cpu_table(quick)
    elif preset == "eps1-compare":
        tables = _eps1_table()
    elif preset == "unprepared":
        tables = _unprepared_table(quick)
    else:
        raise ValueError(
            f"unknown preset {preset!r}; expected one of {TABLE_PRESETS}")
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for table in tables:
            write_csv(out / f"{table.name}.csv", table.columns, table.rows)
            (out / f"{table.name}.md").write_text(table.render_markdown())
    return tables
