"""Execute case studies and sweeps, writing every artifact to the output directory."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import metrics
from ..metrics import CaseReport, h2_cost
from ..network import Network
from ..optimizer import CaseConfig, ScheduleInvariantError, SolveError, check_schedule, run_case
from ..profiles import gen_profiles
from . import outputs
from .config import (ConfigError, RunManifest, case_configs, load_network, load_params,
                     load_profiles)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVE = 0, 1, 2
DEFAULT_PENETRATION = 1.2


@dataclass
class RunOutcome:
    status: int
    reports: list[CaseReport] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)


def case_files(out_dir: Path, case_id: str) -> dict[str, Path]:
    stem = Path(out_dir) / f"case_{case_id}"
    return {
        "schedule": stem.with_name(stem.name + "_schedule.csv"),
        "report": stem.with_name(stem.name + "_report.json"),
        "stack": stem.with_name(stem.name + "_generation_stack.csv"),
        "voltage": stem.with_name(stem.name + "_voltage_envelope.csv"),
        "bus_voltage": stem.with_name(stem.name + "_bus_voltage_range.csv"),
    }


def _solve_one(cfg: CaseConfig, manifest: RunManifest, net: Network):
    pen = cfg.pv.penetration if cfg.pv is not None else DEFAULT_PENETRATION
    profiles = load_profiles(manifest, pen, net)
    try:
        result = run_case(cfg, net, profiles)
    except SolveError as exc:
        dump = Path(manifest.out_dir) / f"case_{cfg.case_id}_failed.lp"
        dump.write_text(exc.lp_dump)
        return cfg.case_id, None, f"{exc} (problem written to {dump.name})"
    except ScheduleInvariantError as exc:
        return cfg.case_id, None, f"case {cfg.case_id}: {exc}"
    report = metrics.case_report(result, net, manifest.seed)
    files = case_files(manifest.out_dir, cfg.case_id)
    outputs.write_schedule(files["schedule"], result.schedule, manifest.seed)
    outputs.write_report(files["report"], report)
    outputs.write_generation_stack(files["stack"], result.schedule, manifest.seed)
    outputs.write_voltage_envelope(files["voltage"], result.schedule, net, manifest.seed)
    outputs.write_bus_voltage_range(files["bus_voltage"], result.schedule, net, manifest.seed)
    return cfg.case_id, report, None


def run(manifest: RunManifest) -> RunOutcome:
    """Run every selected case; exit status 0 ok, 1 configuration error, 2 solve failure.

    Cases run in parallel up to ``manifest.workers``; each writes its own
    files and the summary is assembled afterwards in manifest order, so the
    output bytes do not depend on the worker count.
    """
    try:
        manifest.check_files()
        params = load_params(manifest.costs)
        net = load_network(manifest)
        cfgs = case_configs(params, manifest.cases, manifest.network_mode, manifest.hours)
        for cfg in cfgs:
            # surface profile problems before any solving starts
            load_profiles(manifest, cfg.pv.penetration if cfg.pv else DEFAULT_PENETRATION, net)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return RunOutcome(EXIT_CONFIG, failures={"config": str(exc)})
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if manifest.workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=min(manifest.workers, len(cfgs))) as pool:
            results = list(pool.map(_solve_one, cfgs, [manifest] * len(cfgs), [net] * len(cfgs)))
    else:
        results = [_solve_one(cfg, manifest, net) for cfg in cfgs]
    outcome = RunOutcome(EXIT_OK)
    for cid, report, err in results:
        if err is not None:
            log.error("%s", err)
            outcome.failures[cid] = err
        else:
            outcome.reports.append(report)
            outcome.files += list(case_files(out, cid).values())
    summary = out / "summary.csv"
    outputs.write_summary(summary, outcome.reports)
    outcome.files.append(summary)
    if outcome.failures:
        outcome.status = EXIT_SOLVE
    return outcome


def validate(manifest: RunManifest) -> RunOutcome:
    """Check the manifest and inputs; re-check any schedules already in the output directory."""
    try:
        manifest.check_files()
        params = load_params(manifest.costs)
        net = load_network(manifest)
        cfgs = case_configs(params, manifest.cases, manifest.network_mode, manifest.hours)
        for cfg in cfgs:
            load_profiles(manifest, cfg.pv.penetration if cfg.pv else DEFAULT_PENETRATION, net)
    except ConfigError as exc:
        return RunOutcome(EXIT_CONFIG, failures={"config": str(exc)})
    outcome = RunOutcome(EXIT_OK)
    for cfg in cfgs:
        files = case_files(manifest.out_dir, cfg.case_id)
        if not files["schedule"].is_file():
            continue
        try:
            revalidate(files["schedule"], files["report"], cfg, net)
        except (ScheduleInvariantError, ValueError, KeyError) as exc:
            outcome.failures[cfg.case_id] = str(exc)
        outcome.files.append(files["schedule"])
    if outcome.failures:
        outcome.status = EXIT_SOLVE
    return outcome


def revalidate(schedule_path: Path, report_path: Path, cfg: CaseConfig, net: Network) -> list[str]:
    """Reload a written schedule and run the optimizer's invariant checks on it."""
    from ..optimizer import SizingResult

    sched, _ = outputs.read_schedule(schedule_path)
    sizing = outputs.read_report(report_path).sizing
    sz = SizingResult(sizing["battery_power_mw"], sizing["battery_energy_mwh"],
                      sizing["electrolyzer_mw"], sizing["tank_kg"], sizing["fuel_cell_mw"])
    return check_schedule(sched, sz, cfg, net if sched.voltages is not None else None)


# -- sweeps and profiles -------------------------------------------------------------------
@dataclass
class H2Sweep:
    ez_capex: np.ndarray
    pv_lcoe: np.ndarray
    compressor: bool
    comp_capex: float
    production: np.ndarray      # [capex, lcoe] $/kg
    total: np.ndarray           # production + storage
    target: float = 1.0

    @property
    def meets_target(self) -> np.ndarray:
        return self.total <= self.target


def sweep_h2(ez_capex, pv_lcoe, compressor: bool = False, comp_capex: float = 148.0,
             e_spec: float = metrics.E_SPEC, capex_rate: float = metrics.CAPEX_RATE,
             storage: float = metrics.STORAGE_COST, target: float = 1.0) -> H2Sweep:
    """H2 cost over an electrolyser-capex by PV-LCOE grid; cells at or below ``target`` are flagged."""
    ez = np.asarray(list(ez_capex), dtype=float)
    pv = np.asarray(list(pv_lcoe), dtype=float)
    if ez.size == 0 or pv.size == 0:
        raise ValueError("sweep grids must be non-empty")
    comp = comp_capex if compressor else 0.0
    prod = np.empty((ez.size, pv.size))
    tot = np.empty_like(prod)
    for i, c in enumerate(ez):
        for j, l in enumerate(pv):
            b = h2_cost(c, comp, l, e_spec, capex_rate, storage)
            prod[i, j] = b.production
            tot[i, j] = b.total
    return H2Sweep(ez, pv, compressor, comp, prod, tot, target)


def write_sweep(path: Path, sw: H2Sweep) -> None:
    """Matrix CSV: one block per quantity (production, total, meets_target), rows by capex."""
    buf = io.StringIO()
    buf.write(f"# h2 cost sweep compressor={'on' if sw.compressor else 'off'} "
              f"comp_capex={sw.comp_capex:g} target={sw.target:g} units=$/kg\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "ez_capex"] + [f"pv_lcoe_{l:g}" for l in sw.pv_lcoe])
    for name, mat in (("production", sw.production), ("total", sw.total)):
        for c, row in zip(sw.ez_capex, mat):
            w.writerow([name, f"{c:g}"] + [format(v, ".6g") for v in row])
    for c, row in zip(sw.ez_capex, sw.meets_target):
        w.writerow(["meets_target", f"{c:g}"] + [str(int(v)) for v in row])
    Path(path).write_text(buf.getvalue())


def write_profiles(path: Path, seed: int, penetration: float) -> None:
    p = gen_profiles(seed, penetration)
    buf = io.StringIO()
    buf.write(f"# profiles seed={seed} penetration={penetration:g}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hour", "load_factor", "load_mw", "pv_pu", "pv_mw"])
    for t, (lf, lm, pu, pm) in enumerate(zip(p.load, p.load_mw(), p.pv, p.pv_available_mw())):
        w.writerow([t] + [format(v, ".17g") for v in (lf, lm, pu, pm)])
    Path(path).write_text(buf.getvalue())
