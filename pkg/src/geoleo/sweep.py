"""Sweep orchestration and delimited output (CSV, plot data, run manifest)."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import analytic
from .config import RunConfig, config_to_dict
from .montecarlo import CoverageReport, estimate
from .scenario import GEO, LEO, ScenarioConfig, geo_density_from_count, leo_density_from_count

# column name -> CoverageBreakdown attribute
QUANTITIES = {
    "p_vis_geo": "p_vis_geo",
    "p_vis_leo": "p_vis_leo",
    "p_assc_geo": "p_assc_geo",
    "p_assc_leo": "p_assc_leo",
    "p_cov_geo": "p_cov_geo",
    "p_cov_leo": "p_cov_leo",
    "p_cov_nocross_geo": "p_cov_geo_nocross",
    "p_cov_nocross_leo": "p_cov_leo_nocross",
    "p_cov_total": "p_cov_total",
    "p_cov_given_visible": "p_cov_given_visible",
    "p_cov_geo_only_network": "p_cov_geo_only_network",
    "p_cov_leo_only_network": "p_cov_leo_only_network",
}
_MC_PER_TAU = {
    "p_cov_geo",
    "p_cov_leo",
    "p_cov_nocross_geo",
    "p_cov_nocross_leo",
    "p_cov_total",
    "p_cov_given_visible",
    "p_cov_geo_only_network",
    "p_cov_leo_only_network",
}
_MC_ATTR = {"p_cov_nocross_geo": "p_cov_geo_nocross", "p_cov_nocross_leo": "p_cov_leo_nocross"}

# plot-data curve groups: scenario -> column
PLOT_SCENARIOS = {
    "hybrid": "p_cov_total",
    "geo_only": "p_cov_geo_only_network",
    "leo_only": "p_cov_leo_only_network",
    "assc_geo": "p_assc_geo",
    "assc_leo": "p_assc_leo",
}


def columns_for(mode: str, variable: str) -> list[str]:
    cols = [variable]
    if mode == "analytic":
        cols += list(QUANTITIES)
    elif mode == "montecarlo":
        for q in QUANTITIES:
            cols += [q, f"{q}_se"]
        cols.append("n_trials")
    elif mode == "validate":
        for q in QUANTITIES:
            cols += [f"{q}_analytic", f"{q}_mc", f"{q}_se"]
        cols += ["n_trials", "z_max"]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    cols.append("error")
    return cols


@dataclass
class SweepResult:
    mode: str
    variable: str
    grid: list[float]
    columns: list[str]
    rows: list[dict[str, object]]
    runtimes_s: list[float] = field(default_factory=list)

    def column(self, name: str) -> list[float]:
        return [r.get(name, math.nan) for r in self.rows]

    @property
    def z_max(self) -> float:
        zs = [r["z_max"] for r in self.rows if isinstance(r.get("z_max"), float) and not math.isnan(r["z_max"])]
        return max(zs) if zs else 0.0

    @property
    def failed_points(self) -> int:
        return sum(1 for r in self.rows if r.get("error"))


def apply_sweep_value(cfg: ScenarioConfig, variable: str, value: float, tau_db: float) -> tuple[ScenarioConfig, float]:
    """Scenario and SINR threshold (dB) for one grid point."""
    if variable == "tau_db":
        return cfg, value
    if variable == "latitude_deg":
        return cfg.with_latitude(math.radians(value)), tau_db
    if variable == "bias_ratio_db":
        return cfg.with_link(GEO, bias=cfg.leo.link.bias * 10.0 ** (value / 10.0)), tau_db
    if variable == "leo_count":
        return cfg.with_density(LEO, leo_density_from_count(value, cfg.geom)), tau_db
    if variable == "geo_count":
        return cfg.with_density(GEO, geo_density_from_count(value, cfg.geom)), tau_db
    if variable == "pathloss_ratio":
        return cfg.with_link(GEO, pathloss_exp=value * cfg.leo.link.pathloss_exp), tau_db
    raise ValueError(f"unknown sweep variable {variable!r}")


def _analytic_values(cfg: ScenarioConfig, tau_db: float, run: RunConfig) -> dict[str, float]:
    joint = run.settings.association == "joint"
    b = analytic.p_cov_total(10.0 ** (tau_db / 10.0), cfg, run.settings.quad, exact_association=joint)
    return {col: float(getattr(b, attr)) for col, attr in QUANTITIES.items()}


def _mc_values(report: CoverageReport, k: int) -> dict[str, object]:
    out: dict[str, object] = {}
    for q in QUANTITIES:
        est = getattr(report, _MC_ATTR.get(q, q))
        if q in _MC_PER_TAU:
            est = est[k]
        out[q] = est
    return out


def _error_text(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def _analytic_point(args) -> tuple[dict[str, object], float]:
    run, value = args
    t0 = time.perf_counter()
    row: dict[str, object] = {run.sweep.variable: value}
    try:
        cfg, tau_db = apply_sweep_value(run.scenario, run.sweep.variable, value, run.settings.tau_db)
        row.update(_analytic_values(cfg, tau_db, run))
    except Exception as exc:  # recorded in-row; the sweep continues
        row["error"] = _error_text(exc)
    return row, time.perf_counter() - t0


def _mc_point(args) -> tuple[dict[str, object], float]:
    run, value, seed, trials = args
    t0 = time.perf_counter()
    row: dict[str, object] = {run.sweep.variable: value}
    try:
        cfg, tau_db = apply_sweep_value(run.scenario, run.sweep.variable, value, run.settings.tau_db)
        report = estimate(cfg, [10.0 ** (tau_db / 10.0)], trials, seed)
        row["_mc"] = _mc_values(report, 0)
        row["n_trials"] = report.n_trials
    except Exception as exc:
        row["error"] = _error_text(exc)
    return row, time.perf_counter() - t0


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _mc_rows(run: RunConfig, seed: int, trials: int, workers: int):
    grid = list(run.sweep.grid)
    if run.sweep.variable == "tau_db":
        t0 = time.perf_counter()
        taus = [10.0 ** (v / 10.0) for v in grid]
        try:
            report = estimate(run.scenario, taus, trials, seed, workers=workers)
        except Exception as exc:
            err = _error_text(exc)
            return [({"tau_db": v, "error": err}, 0.0) for v in grid]
        share = (time.perf_counter() - t0) / len(grid)
        return [({"tau_db": v, "_mc": _mc_values(report, k), "n_trials": report.n_trials}, share) for k, v in enumerate(grid)]
    return _map(_mc_point, [(run, v, seed, trials) for v in grid], workers)


def _flatten_mc(row: dict[str, object], prefix_value: bool) -> None:
    mc = row.pop("_mc", None)
    if mc is None:
        return
    for q, est in mc.items():
        row[f"{q}_mc" if prefix_value else q] = est.mean
        row[f"{q}_se"] = est.std_error


def run_sweep(run: RunConfig, mode: str | None = None, *, seed: int = 0, trials: int = 100_000, workers: int = 1) -> SweepResult:
    """Evaluate every grid point; rows come back in grid order.

    Per-point failures are recorded in the ``error`` column.
    """
    mode = mode or run.sweep.mode
    variable = run.sweep.variable
    grid = list(run.sweep.grid)
    columns = columns_for(mode, variable)

    if mode == "analytic":
        out = _map(_analytic_point, [(run, v) for v in grid], workers)
        rows = [r for r, _ in out]
        return SweepResult(mode, variable, grid, columns, rows, [t for _, t in out])

    mc_out = _mc_rows(run, seed, trials, workers)
    if mode == "montecarlo":
        rows = []
        for r, _ in mc_out:
            _flatten_mc(r, prefix_value=False)
            rows.append(r)
        return SweepResult(mode, variable, grid, columns, rows, [t for _, t in mc_out])

    an_out = _map(_analytic_point, [(run, v) for v in grid], workers)
    rows = []
    runtimes = []
    for (mr, mt), (ar, at) in zip(mc_out, an_out):
        row: dict[str, object] = {variable: mr[variable]}
        errors = [e for e in (ar.get("error"), mr.get("error")) if e]
        mc = mr.get("_mc")
        z_max = math.nan
        for q in QUANTITIES:
            a = ar.get(q, math.nan)
            row[f"{q}_analytic"] = a
            if mc is not None:
                est = mc[q]
                row[f"{q}_mc"] = est.mean
                row[f"{q}_se"] = est.std_error
                z = est.z_score(a) if not math.isnan(a) else math.nan
                if not math.isnan(z):
                    z_max = abs(z) if math.isnan(z_max) else max(z_max, abs(z))
        row["n_trials"] = mr.get("n_trials", "")
        row["z_max"] = z_max
        if errors:
            row["error"] = "; ".join(errors)
        rows.append(row)
        runtimes.append(mt + at)
    return SweepResult(mode, variable, grid, columns, rows, runtimes)


# --------------------------------------------------------------------- emission


def _cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else format(value, ".10g")
    return str(value)


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_cell(row.get(c, "")) for c in result.columns])
    return buf.getvalue()


def _plot_values(result: SweepResult, row: dict[str, object], col: str) -> tuple[object, object, object]:
    if result.mode == "analytic":
        return row.get(col), None, None
    if result.mode == "montecarlo":
        return None, row.get(col), row.get(f"{col}_se")
    return row.get(f"{col}_analytic"), row.get(f"{col}_mc"), row.get(f"{col}_se")


PLOT_COLUMNS = ("scenario", "x", "analytic", "mc", "mc_se")


def plot_data_text(result: SweepResult) -> str:
    """gnuplot-style blocks, one per scenario, separated by two blank lines.

    Every data line has the columns ``scenario x analytic mc mc_se``; missing
    values are written as ``nan``.
    """
    lines = [
        f"# geoleo {__version__} plot data; x = {result.variable}; mode = {result.mode}",
        "# columns: " + " ".join(PLOT_COLUMNS),
    ]
    for b, (scenario, col) in enumerate(PLOT_SCENARIOS.items()):
        if b:
            lines += ["", ""]
        lines.append(f"# scenario: {scenario} ({col})")
        for row in result.rows:
            vals = _plot_values(result, row, col)
            cells = [_cell(v) or "nan" for v in vals]
            lines.append(" ".join([scenario, _cell(row[result.variable])] + cells))
    return "\n".join(lines) + "\n"


def emit_plotdata(result: SweepResult, path) -> Path:
    path = Path(path)
    try:
        path.write_text(plot_data_text(result), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc.strerror}") from exc
    return path


def manifest(result: SweepResult, run: RunConfig, *, seed: int | None, trials: int | None, command: str) -> dict:
    cfg = config_to_dict(replace(run, sweep=replace(run.sweep, mode=result.mode)))
    return {
        "tool": "geoleo",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "command": command,
        "mode": result.mode,
        "seed": seed,
        "trials": trials,
        "config": cfg,
        "grid": result.grid,
        "per_point_runtime_s": [round(t, 6) for t in result.runtimes_s],
        "failed_points": result.failed_points,
    }


def write_outputs(result: SweepResult, run: RunConfig, out: Path, *, seed, trials, command: str) -> list[Path]:
    """Write ``out`` (CSV), ``out.with_suffix('.dat')`` and ``<out>.manifest.json``."""
    out = Path(out)
    dat = out.with_suffix(".dat")
    man = out.with_name(out.name + ".manifest.json")
    try:
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True)
        out.write_text(to_csv(result), encoding="utf-8")
        emit_plotdata(result, dat)
        man.write_text(json.dumps(manifest(result, run, seed=seed, trials=trials, command=command), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write outputs next to {out}: {exc}") from exc
    return [out, dat, man]
