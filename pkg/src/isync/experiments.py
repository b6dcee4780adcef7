"""Expanding scenario configs into runs, executing them, and writing CSV reports."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .metrics import MetricsReport, integration_gain
from .scenario import ScenarioConfig, Scheme, check_axis, load_config, with_value
from .simulation import TRACE_COLUMNS, run_scenario

SUMMARY_COLUMNS = [
    "run", "scheme", "n_ues", "seed", "precision_target_ns", "comm_latency_ns",
    "sync_satisfaction", "comm_satisfaction", "satisfaction", "integration_gain",
    "mean_precision_ns", "p95_precision_ns", "mean_timeliness_ns",
    "control_plane_bytes", "user_plane_bytes", "total_overhead_bytes",
    "header_bytes_per_ue_session", "ue_sessions", "sessions_completed", "sessions_failed",
    "piggybacked", "blocks_used", "comm_dropped",
]
HEATMAP_COLUMNS = ["sync_req", "comm_req", "scheme", "satisfaction", "gain",
                   "sync_satisfaction", "comm_satisfaction", "overhead_bytes"]
SWEEP_TAIL = ["scheme", "satisfaction", "overhead_bytes", "sync_satisfaction", "comm_satisfaction", "gain"]

PRESETS = ("fig5a.grid", "fig5b.sweep", "minimal.smoke")


def preset_path(name: str) -> Path:
    return Path(str(resources.files("isync") / "presets" / name))


def resolve_config(path: str) -> Path:
    """A file path, or the bare name of a shipped preset."""
    p = Path(path)
    if not p.exists() and path in PRESETS:
        return preset_path(path)
    return p


@dataclass
class RunSpec:
    index: int
    cfg: ScenarioConfig
    point: tuple = ()


@dataclass
class RunOutcome:
    spec: RunSpec
    report: MetricsReport
    trace: list = field(default_factory=list)
    gain: float = 0.0


def _set(cfg: ScenarioConfig, **updates) -> ScenarioConfig:
    out = cfg
    for dotted, value in updates.items():
        out = with_value(out, dotted.replace("__", "."), value)
    return out


def expand(cfg: ScenarioConfig) -> list:
    """Runs described by a config; grid and sweep presets keep one seed for every point."""
    exp = cfg.experiment
    specs = []
    if exp.kind == "run":
        return [RunSpec(0, cfg, ())]
    if exp.kind == "grid":
        for lat in exp.grid.comm_latencies_ns:
            for prec in exp.grid.precision_targets_ns:
                for scheme in exp.schemes:
                    c = _set(cfg, sync__precision_target_ns=prec, comm__max_latency_ns=lat, scheme=scheme.value)
                    specs.append(RunSpec(len(specs), c, (prec, lat)))
        return specs
    axis = exp.sweep.axis
    for v in exp.sweep.values:
        for scheme in exp.schemes:
            c = _set(cfg, **{axis.replace(".", "__"): v, "scheme": scheme.value})
            specs.append(RunSpec(len(specs), c, (v,)))
    return specs


def sweep_specs(cfg: ScenarioConfig, axis: str, values: list) -> list:
    """One run per value of ``axis``; point i uses seed + i."""
    check_axis(axis)
    specs = []
    for i, v in enumerate(values):
        c = with_value(cfg, axis, v)
        if axis != "seed":
            c = with_value(c, "seed", cfg.seed + i)
        specs.append(RunSpec(i, c, (v,)))
    return specs


def _execute_one(args) -> RunOutcome:
    spec, trace = args
    res = run_scenario(spec.cfg, trace=trace)
    return RunOutcome(spec, res.report, res.trace)


def execute(specs: list, parallel: int = 1, trace: bool = False) -> list:
    jobs = [(s, trace) for s in specs]
    if parallel <= 1 or len(specs) <= 1:
        outcomes = [_execute_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_execute_one, jobs))
    _attach_gains(outcomes)
    return outcomes


def _attach_gains(outcomes: list) -> None:
    baseline = {}
    for o in outcomes:
        if o.spec.cfg.scheme is Scheme.SEPARATED:
            baseline[o.spec.point] = o.report
    for o in outcomes:
        b = baseline.get(o.spec.point)
        if b is not None and o.spec.cfg.scheme is not Scheme.SEPARATED:
            o.gain = integration_gain(o.report, b, o.spec.cfg.metrics.lam)
        o.report.integration_gain = o.gain


# --------------------------------------------------------------------------
# CSV


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.6f}"
    if hasattr(x, "value"):
        return str(x.value)
    return str(x)


def to_csv(columns: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def summary_row(o: RunOutcome) -> dict:
    r, c = o.report, o.spec.cfg
    return {
        "run": o.spec.index, "scheme": c.scheme, "n_ues": c.n_ues, "seed": c.seed,
        "precision_target_ns": c.sync.precision_target_ns, "comm_latency_ns": c.comm.max_latency_ns,
        "sync_satisfaction": r.sync_satisfaction, "comm_satisfaction": r.comm_satisfaction,
        "satisfaction": r.satisfaction, "integration_gain": o.gain,
        "mean_precision_ns": r.mean_precision, "p95_precision_ns": r.p95_precision,
        "mean_timeliness_ns": r.mean_timeliness,
        "control_plane_bytes": r.control_plane_bytes, "user_plane_bytes": r.user_plane_bytes,
        "total_overhead_bytes": r.total_overhead_bytes,
        "header_bytes_per_ue_session": r.header_bytes_per_ue_session, "ue_sessions": r.ue_sessions,
        "sessions_completed": r.sessions_completed, "sessions_failed": r.sessions_failed,
        "piggybacked": r.piggybacked, "blocks_used": r.blocks_used, "comm_dropped": r.comm_dropped,
    }


def heatmap_rows(outcomes: list) -> list:
    rows = []
    for o in outcomes:
        prec, lat = o.spec.point
        r = o.report
        rows.append({"sync_req": prec, "comm_req": lat, "scheme": o.spec.cfg.scheme,
                     "satisfaction": r.satisfaction, "gain": o.gain,
                     "sync_satisfaction": r.sync_satisfaction, "comm_satisfaction": r.comm_satisfaction,
                     "overhead_bytes": r.total_overhead_bytes})
    return rows


def sweep_rows(outcomes: list, axis: str) -> tuple:
    name = axis.split(".")[-1]
    ordered = sorted(outcomes, key=lambda o: (o.spec.point[0], o.spec.index))
    rows = []
    for o in ordered:
        v = o.spec.point[0]
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        r = o.report
        rows.append({name: v, "scheme": o.spec.cfg.scheme, "satisfaction": r.satisfaction,
                     "overhead_bytes": r.total_overhead_bytes, "sync_satisfaction": r.sync_satisfaction,
                     "comm_satisfaction": r.comm_satisfaction, "gain": o.gain})
    return [name] + SWEEP_TAIL, rows


def render_outputs(cfg: ScenarioConfig, outcomes: list, axis: Optional[str] = None,
                   trace: bool = False) -> dict:
    """All output files for a finished experiment, as ``{filename: text}``."""
    files = {"summary.csv": to_csv(SUMMARY_COLUMNS, [summary_row(o) for o in outcomes])}
    if axis is None and cfg.experiment.kind == "grid":
        files["heatmap.csv"] = to_csv(HEATMAP_COLUMNS, heatmap_rows(outcomes))
    sweep_axis = axis or (cfg.experiment.sweep.axis if cfg.experiment.kind == "sweep" else None)
    if sweep_axis is not None:
        cols, rows = sweep_rows(outcomes, sweep_axis)
        files["sweep.csv"] = to_csv(cols, rows)
    if trace:
        for o in outcomes:
            name = "trace.csv" if len(outcomes) == 1 else f"trace_{o.spec.index:03d}.csv"
            files[name] = to_csv(TRACE_COLUMNS, o.trace)
    return files


def write_outputs(files: dict, out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        p = out_dir / name
        p.write_text(text)
        written.append(p)
    return written


def run_config(path, parallel: int = 1, trace: bool = False, seed: Optional[int] = None) -> tuple:
    cfg = load_config(resolve_config(str(path)))
    if seed is not None:
        cfg = with_value(cfg, "seed", seed)
    outcomes = execute(expand(cfg), parallel, trace)
    return cfg, outcomes, render_outputs(cfg, outcomes, trace=trace)
