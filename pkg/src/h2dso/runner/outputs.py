"""File formats for run outputs.

Schedules are written at full float precision so that reloading them is
lossless; summaries and plot series use 6 significant digits. Every file
starts with a ``#`` comment line carrying the case id and the seed.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from ..metrics import CaseReport
from ..network import Network, forward_sweep
from ..optimizer import ScheduleResult


def _full(x: float) -> str:
    return format(float(x), ".17g")


def _six(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".6g")


def _header(case_id: str, seed, extra: str = "") -> str:
    return f"# case={case_id} seed={seed}{(' ' + extra) if extra else ''}\n"


# -- schedules ------------------------------------------------------------------------
def schedule_columns(s: ScheduleResult) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {"hour": np.arange(s.hours, dtype=float), "load": s.load}
    for name, row in zip(s.dg_names, s.dg):
        cols[f"dg_{name}"] = row
    for bus, avail, disp in zip(s.pv_buses, s.pv_available, s.pv_dispatched):
        cols[f"pv_available_{bus}"] = avail
        cols[f"pv_dispatched_{bus}"] = disp
    for key in ("charge", "discharge", "soc", "electrolyzer", "fuel_cell", "tank", "grid_import"):
        cols[key] = getattr(s, key)
    for k, bus in enumerate(s.bus_ids):
        cols[f"p_load_{bus}"] = s.bus_load[:, k]
    for k, bus in enumerate(s.bus_ids):
        cols[f"q_load_{bus}"] = s.bus_load_q[:, k]
    if s.voltages is not None:
        for k, bus in enumerate(s.bus_ids):
            cols[f"v_{bus}"] = s.voltages[:, k]
    return cols


def write_schedule(path: Path, s: ScheduleResult, seed) -> None:
    meta = {
        "case_id": s.case_id, "seed": seed, "dg_names": list(s.dg_names),
        "dg_buses": list(s.dg_buses), "dg_capacity": [float(c) for c in s.dg_capacity],
        "pv_buses": list(s.pv_buses), "bus_ids": list(s.bus_ids),
        "battery_bus": s.battery_bus, "h2_bus": s.h2_bus, "slack_bus": s.slack_bus,
        "battery_eta": s.battery_eta, "h2_kg_in": s.h2_kg_in, "h2_kg_out": s.h2_kg_out,
        "warnings": list(s.warnings),
    }
    cols = schedule_columns(s)
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    data = np.column_stack(list(cols.values()))
    for row in data:
        w.writerow([_full(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_schedule(path: Path) -> tuple[ScheduleResult, dict]:
    """Inverse of :func:`write_schedule`; returns the schedule and its metadata."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing schedule metadata line")
    meta = json.loads(lines[0][2:])
    rows = list(csv.reader(lines[1:]))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]) if body else np.zeros((0, len(header)))
    col = {name: data[:, k] for k, name in enumerate(header)}
    T = data.shape[0]
    ids = meta["bus_ids"]

    def stack(prefix, keys):
        return np.array([col[f"{prefix}{k}"] for k in keys]) if keys else np.zeros((0, T))

    s = ScheduleResult(
        case_id=meta["case_id"],
        dg_names=tuple(meta["dg_names"]),
        dg_buses=tuple(meta["dg_buses"]),
        dg_capacity=np.array(meta["dg_capacity"], dtype=float),
        dg=stack("dg_", meta["dg_names"]),
        pv_buses=tuple(meta["pv_buses"]),
        pv_available=stack("pv_available_", meta["pv_buses"]),
        pv_dispatched=stack("pv_dispatched_", meta["pv_buses"]),
        charge=col["charge"], discharge=col["discharge"], soc=col["soc"],
        electrolyzer=col["electrolyzer"], fuel_cell=col["fuel_cell"], tank=col["tank"],
        grid_import=col["grid_import"], load=col["load"],
        bus_ids=tuple(ids),
        bus_load=stack("p_load_", ids).T,
        bus_load_q=stack("q_load_", ids).T,
        voltages=stack("v_", ids).T if f"v_{ids[0]}" in col else None,
        battery_bus=meta["battery_bus"], h2_bus=meta["h2_bus"], slack_bus=meta["slack_bus"],
        battery_eta=meta["battery_eta"], h2_kg_in=meta["h2_kg_in"], h2_kg_out=meta["h2_kg_out"],
        warnings=list(meta.get("warnings", [])),
    )
    return s, meta


# -- reports --------------------------------------------------------------------------
def write_report(path: Path, report: CaseReport) -> None:
    Path(path).write_text(report.to_json(indent=1) + "\n")


def read_report(path: Path) -> CaseReport:
    return CaseReport.from_json(Path(path).read_text())


SUMMARY_FIELDS = ("case_id", "seed", "network_mode", "green_fraction_pct", "fossil_fraction_pct",
                  "dlmp_mean", "dlmp_mean_joint", "pv_available_mwh", "pv_dispatched_mwh",
                  "pv_curtailed_mwh", "pv_curtailed_pct", "objective", "operation_cost",
                  "capital_cost", "battery_power_mw", "battery_energy_mwh", "electrolyzer_mw",
                  "tank_kg", "fuel_cell_mw", "converged")


def summary_row(r: CaseReport) -> dict:
    row = {
        "case_id": r.case_id, "seed": r.seed, "network_mode": r.network_mode,
        "green_fraction_pct": r.green_fraction, "fossil_fraction_pct": r.fossil_fraction,
        "dlmp_mean": r.dlmp_mean, "dlmp_mean_joint": r.dlmp_mean_joint,
        "pv_available_mwh": r.pv_available, "pv_dispatched_mwh": r.pv_dispatched,
        "pv_curtailed_mwh": r.pv_curtailed, "pv_curtailed_pct": r.pv_curtailed_pct,
        "objective": r.objective, "operation_cost": r.operation_cost, "capital_cost": r.capital_cost,
        "converged": "yes" if r.converged else "no",
    }
    row.update(r.sizing)
    for name, cf in r.capacity_factor.items():
        row[f"cf_{name}_pct"] = cf
    return row


def write_summary(path: Path, reports: list[CaseReport]) -> None:
    rows = [summary_row(r) for r in reports]
    extra = []
    for row in rows:
        for key in row:
            if key not in SUMMARY_FIELDS and key not in extra:
                extra.append(key)
    names = list(SUMMARY_FIELDS) + extra
    buf = io.StringIO()
    seeds = sorted({str(r.seed) for r in reports})
    buf.write(f"# summary seed={','.join(seeds)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in rows:
        w.writerow([_cell(row.get(k)) for k in names])
    Path(path).write_text(buf.getvalue())


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, float, np.floating)) and not isinstance(v, bool):
        return _six(v)
    return str(v)


def read_summary(path: Path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- plot data ---------------------------------------------------------------------------
def write_generation_stack(path: Path, s: ScheduleResult, seed) -> None:
    """Hourly supply by source (positive) and storage intake (negative), plus the load line."""
    cols = {"hour": np.arange(s.hours)}
    for name, row in zip(s.dg_names, s.dg):
        cols[name] = row
    cols["pv"] = s.pv_dispatched.sum(axis=0) if s.pv_dispatched.size else np.zeros(s.hours)
    cols["pv_curtailed"] = s.pv_curtailed.sum(axis=0) if s.pv_available.size else np.zeros(s.hours)
    cols["battery_discharge"] = s.discharge
    cols["fuel_cell"] = s.fuel_cell
    cols["grid_import"] = s.grid_import
    # adding 0.0 turns -0.0 into 0.0 so idle hours print as "0"
    cols["battery_charge"] = -s.charge + 0.0
    cols["electrolyzer"] = -s.electrolyzer + 0.0
    cols["load"] = s.load
    _write_series(path, cols, _header(s.case_id, seed, "units=MW"))


def voltage_envelope(s: ScheduleResult, net: Network) -> tuple[np.ndarray, bool]:
    """Hour-by-bus voltage magnitudes: solver values, or a post-hoc sweep in copperplate mode."""
    if s.voltages is not None:
        return s.voltages, True
    p, q = s.bus_injections(net)
    return forward_sweep(net, p, q).v, False


def write_voltage_envelope(path: Path, s: ScheduleResult, net: Network, seed) -> None:
    v, enforced = voltage_envelope(s, net)
    ids = np.array(s.bus_ids)
    cols = {
        "hour": np.arange(s.hours),
        "v_min": v.min(axis=1), "v_max": v.max(axis=1),
        "bus_at_min": ids[v.argmin(axis=1)], "bus_at_max": ids[v.argmax(axis=1)],
    }
    note = "units=pu band=enforced" if enforced else "units=pu band=not-enforced(post-hoc-sweep)"
    _write_series(path, cols, _header(s.case_id, seed, note))


def write_bus_voltage_range(path: Path, s: ScheduleResult, net: Network, seed) -> None:
    v, enforced = voltage_envelope(s, net)
    cols = {"bus": np.array(s.bus_ids), "v_min": v.min(axis=0), "v_max": v.max(axis=0)}
    note = "units=pu band=enforced" if enforced else "units=pu band=not-enforced(post-hoc-sweep)"
    _write_series(path, cols, _header(s.case_id, seed, note))


def _write_series(path: Path, cols: dict, header: str) -> None:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for k in range(len(next(iter(cols.values())))):
        w.writerow([_cell(c[k].item() if hasattr(c[k], "item") else c[k]) for c in cols.values()])
    Path(path).write_text(buf.getvalue())
