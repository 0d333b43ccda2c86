"""Post-solve analysis: green share, capacity factors, nodal prices, curtailment, H2 cost.

Everything here is a pure function of finished results, so cases can be
analysed in parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .assets import DgSpec
from .lpcore import Solution
from .network import Network

E_SPEC = 57.5          # kWh of electricity per kg of H2
CAPEX_RATE = 0.0033    # $/kg of H2 per $/kW of electrolyser (+compressor) capex
STORAGE_COST = 0.02    # $/kg

# Published production-cost sweeps used to calibrate the affine H2 cost model.
# Rows are (electrolyser + compressor capex $/kW, PV LCOE $/MWh, production $/kg).
CAPEX_SWEEP = tuple((c, 12.0, y) for c, y in zip(
    (50, 75, 100, 125, 150, 175, 200, 250), (0.85, 0.94, 1.02, 1.10, 1.19, 1.27, 1.35, 1.51)))
CAPEX_SWEEP_TOTALS = (0.87, 0.96, 1.04, 1.12, 1.21, 1.29, 1.37, 1.53)
LCOE_SWEEP = tuple((100.0, l, y) for l, y in zip(
    range(8, 14), (0.79, 0.85, 0.90, 0.96, 1.02, 1.08))) + tuple((248.0, l, y) for l, y in zip(
        range(8, 14), (1.28, 1.34, 1.40, 1.46, 1.51, 1.56)))


# -- green share ---------------------------------------------------------------------
def green_fraction(s) -> float:
    """Percent of load energy served from PV, directly or through storage.

    Storage is tracked with a charge-provenance ledger: each hour, charging
    (battery plus electrolyser) draws on PV first and on the rest of that
    hour's supply pro rata. Battery and tank are well-mixed pools whose green
    share follows what went in; inventory present at the start counts as
    green. DGs and grid import are fossil.
    """
    load = np.asarray(s.load, dtype=float)
    total = float(load.sum())
    if total <= 0:
        raise ValueError("green fraction undefined: zero total load")
    pv = s.pv_dispatched.sum(axis=0) if s.pv_dispatched.size else np.zeros_like(load)
    fossil = (s.dg.sum(axis=0) if s.dg.size else 0.0) + s.grid_import
    fossil = np.broadcast_to(np.asarray(fossil, dtype=float), load.shape)
    charge, dis = s.charge, s.discharge
    ez, fc = s.electrolyzer, s.fuel_cell
    # pools are tracked in stored units: MWh of state of charge, kg of hydrogen
    eta = s.battery_eta
    bat_in, bat_out = eta * charge, dis / eta
    h2_in, h2_out = s.h2_kg_in * ez, s.h2_kg_out * fc
    bat = _start_level(s.soc, bat_in, bat_out)
    h2 = _start_level(s.tank, h2_in, h2_out)
    bat_green, h2_green = bat, h2
    served = 0.0
    for t in range(len(load)):
        phi_b = bat_green / bat if bat > 1e-12 else 1.0
        phi_h = h2_green / h2 if h2 > 1e-12 else 1.0
        green_sup = pv[t] + phi_b * dis[t] + phi_h * fc[t]
        other = fossil[t] + dis[t] + fc[t]
        sink = charge[t] + ez[t]
        from_pv = min(pv[t], sink)
        share = (phi_b * dis[t] + phi_h * fc[t]) / other if other > 1e-12 else 0.0
        sink_green = from_pv + (sink - from_pv) * share
        served += min(max(green_sup - sink_green, 0.0), load[t])
        gshare = sink_green / sink if sink > 1e-12 else 0.0
        bat, bat_green = _mix(bat, bat_green, bat_in[t], bat_out[t], gshare)
        h2, h2_green = _mix(h2, h2_green, h2_in[t], h2_out[t], gshare)
    return float(np.clip(100.0 * served / total, 0.0, 100.0))


def _start_level(level, inflow, outflow) -> float:
    if len(level) == 0:
        return 0.0
    return max(float(level[0] - inflow[0] + outflow[0]), 0.0)


def _mix(level, green, inflow, outflow, in_share):
    # well-mixed pool: the hour's inflow joins before the outflow leaves
    level += inflow
    green += inflow * in_share
    share = green / level if level > 1e-12 else 0.0
    level = max(level - outflow, 0.0)
    green = max(green - outflow * share, 0.0)
    return level, min(green, level)


def fossil_fraction(s) -> float:
    f = 100.0 - green_fraction(s)
    return 0.0 if abs(f) < 1e-9 else f


# -- capacity factor and curtailment -----------------------------------------------------
def capacity_factor(s, g: DgSpec | str) -> float:
    """Percent of the DG's energy capability actually dispatched over the horizon."""
    name = g if isinstance(g, str) else g.name
    k = list(s.dg_names).index(name)
    cap = float(s.dg_capacity[k]) if isinstance(g, str) else g.capacity
    if s.hours == 0:
        raise ValueError("capacity factor undefined for an empty horizon")
    return 100.0 * float(np.sum(s.dg[k])) / (cap * s.hours)


@dataclass(frozen=True)
class CurtailmentStats:
    available: float
    curtailed: float
    percent: float

    @property
    def dispatched(self) -> float:
        return self.available - self.curtailed

    def __iter__(self):
        return iter((self.available, self.curtailed, self.percent))


def curtailment_stats(s) -> CurtailmentStats:
    avail = float(np.sum(s.pv_available))
    curt = float(np.sum(s.pv_available - s.pv_dispatched))
    pct = 100.0 * curt / avail if avail > 0 else 0.0
    return CurtailmentStats(avail, curt, pct)


# -- nodal prices ------------------------------------------------------------------------
@dataclass
class DlmpStats:
    prices: np.ndarray          # [hour, bus] $/MWh
    bus_ids: tuple[int, ...]
    mean: float                 # load-weighted over bus-hours (plain mean without loads)
    hourly: np.ndarray          # load-weighted mean across buses, per hour
    copperplate: bool
    restricted: bool            # duals taken from the LP with binaries fixed


def dlmp_stats(sol: Solution, net: Network, bus_load: np.ndarray | None = None) -> DlmpStats:
    """Nodal prices from the duals of the real-power balance rows."""
    if not sol.optimal:
        raise ValueError(f"no prices: solution status is {sol.status}")
    tags = sol.tags
    ids = tuple(b.id for b in net.buses)
    copper = "pbal[sys,0]" in tags
    if copper:
        rows = []
        while f"pbal[sys,{len(rows)}]" in tags:
            rows.append(tags[f"pbal[sys,{len(rows)}]"])
        prices = np.repeat(sol.duals[rows][:, None], len(ids), axis=1)
    else:
        if f"pbal[{ids[0]},0]" not in tags:
            raise ValueError("solution has no tagged nodal balance rows")
        T = 0
        while f"pbal[{ids[0]},{T}]" in tags:
            T += 1
        idx = np.array([[tags[f"pbal[{b},{t}]"] for b in ids] for t in range(T)])
        prices = sol.duals[idx]
    if bus_load is not None:
        w = np.asarray(bus_load, dtype=float)[:prices.shape[0]]
        tot = w.sum()
        mean = float((prices * w).sum() / tot) if tot > 0 else float(prices.mean())
        row = w.sum(axis=1)
        hourly = np.where(row > 0, (prices * w).sum(axis=1) / np.where(row > 0, row, 1.0),
                          prices.mean(axis=1))
    else:
        mean = float(prices.mean())
        hourly = prices.mean(axis=1)
    return DlmpStats(prices, ids, mean, hourly, copper, bool(sol.restricted_duals))


# -- hydrogen cost model -----------------------------------------------------------------
@dataclass(frozen=True)
class H2CostBreakdown:
    energy_component: float
    capex_component: float
    storage_component: float
    total: float
    ez_capex: float
    comp_capex: float
    pv_lcoe: float
    e_spec: float
    capex_rate: float

    @property
    def production(self) -> float:
        return self.energy_component + self.capex_component


def h2_cost(ez_capex: float, comp_capex: float = 0.0, pv_lcoe: float = 12.0,
            e_spec: float = E_SPEC, capex_rate: float = CAPEX_RATE,
            storage: float = STORAGE_COST) -> H2CostBreakdown:
    """Affine $/kg cost: electricity + annualised electrolyser/compressor capex + storage."""
    vals = (ez_capex, comp_capex, pv_lcoe, e_spec, capex_rate, storage)
    if any(v < 0 or not math.isfinite(v) for v in vals):
        raise ValueError("H2 cost inputs must be finite and non-negative")
    energy = e_spec / 1000.0 * pv_lcoe
    capex = (ez_capex + comp_capex) * capex_rate
    return H2CostBreakdown(energy, capex, storage, energy + capex + storage,
                           ez_capex, comp_capex, pv_lcoe, e_spec, capex_rate)


@dataclass(frozen=True)
class H2Fit:
    e_spec: float
    capex_rate: float
    max_residual: float

    def __iter__(self):
        return iter((self.e_spec, self.capex_rate))


def fit_h2_params(capex_rows, lcoe_rows) -> H2Fit:
    """Calibrate ``(e_spec, capex_rate)`` of the affine cost model.

    Rows are ``(capex $/kW, pv_lcoe $/MWh, production $/kg)``. The capex rate
    is the least-squares slope of cost against capex in ``capex_rows``
    (one intercept per LCOE level). The energy coefficient is then the
    through-origin least-squares slope of ``cost - rate * capex`` against
    LCOE in ``lcoe_rows``, since the model has no constant production term.
    The residual is the worst absolute misfit over all rows.
    """
    a = np.asarray(capex_rows, dtype=float).reshape(-1, 3)
    b = np.asarray(lcoe_rows, dtype=float).reshape(-1, 3)
    if len(np.unique(a[:, 0])) < 2:
        raise ValueError("degenerate input: need at least two distinct capex points")
    if len(np.unique(b[:, 1])) < 2:
        raise ValueError("degenerate input: need at least two distinct LCOE points")
    xc = a[:, 0].copy()
    yc = a[:, 2].copy()
    for level in np.unique(a[:, 1]):
        grp = a[:, 1] == level
        xc[grp] -= xc[grp].mean()
        yc[grp] -= yc[grp].mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("degenerate input: capex does not vary within any LCOE level")
    rate = float(xc @ yc) / sxx
    lc = b[:, 1]
    energy = float(lc @ (b[:, 2] - rate * b[:, 0])) / float(lc @ lc)
    rows = np.vstack([a, b])
    resid = np.abs(energy * rows[:, 1] + rate * rows[:, 0] - rows[:, 2])
    return H2Fit(1000.0 * energy, rate, float(resid.max()))


# -- case report ---------------------------------------------------------------------------
@dataclass
class CaseReport:
    case_id: str
    green_fraction: float
    fossil_fraction: float
    capacity_factor: dict[str, float]
    dlmp_mean: float
    dlmp_hourly: list[float]
    dlmp_mean_joint: float
    pv_available: float
    pv_dispatched: float
    pv_curtailed: float
    pv_curtailed_pct: float
    objective: float
    operation_cost: float
    capital_cost: float
    sizing: dict[str, float]
    voltage_min: list[float] | None = None
    voltage_max: list[float] | None = None
    dlmp_by_bus: list[list[float]] | None = None
    bus_ids: list[int] = field(default_factory=list)
    network_mode: str = "copperplate"
    restricted_duals: bool = False
    converged: bool = True
    seed: int | None = None
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.green_fraction <= 100.0:
            raise ValueError("green fraction outside [0, 100]")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "CaseReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "CaseReport":
        return cls.from_dict(json.loads(text))


def case_report(run, net: Network, seed: int | None = None) -> CaseReport:
    """Assemble every reported figure for one solved case (a :class:`CaseRun`)."""
    s, sizing, sol = run.schedule, run.sizing, run.solution
    cfg = run.config
    curt = curtailment_stats(s)
    prices = dlmp_stats(run.prices or sol, net, s.bus_load)
    joint = prices if run.prices is None else dlmp_stats(sol, net, s.bus_load)
    caps = run.model.capital_terms
    capital = (caps.get("battery", 0.0) * sizing.battery_power
               + caps.get("electrolyzer", 0.0) * sizing.electrolyzer
               + caps.get("tank", 0.0) * sizing.tank
               + caps.get("fuel_cell", 0.0) * sizing.fuel_cell)
    green = green_fraction(s)
    rep = CaseReport(
        case_id=cfg.case_id,
        green_fraction=green,
        fossil_fraction=0.0 if abs(100.0 - green) < 1e-9 else 100.0 - green,
        capacity_factor={name: capacity_factor(s, name) for name in s.dg_names},
        dlmp_mean=prices.mean,
        dlmp_hourly=prices.hourly.tolist(),
        dlmp_mean_joint=joint.mean,
        pv_available=curt.available,
        pv_dispatched=curt.dispatched,
        pv_curtailed=curt.curtailed,
        pv_curtailed_pct=curt.percent,
        objective=float(sol.objective_value),
        operation_cost=float(sol.objective_value) - capital,
        capital_cost=capital,
        sizing=sizing.as_dict(),
        bus_ids=list(prices.bus_ids),
        network_mode=cfg.network_mode,
        restricted_duals=prices.restricted,
        converged=bool(run.converged),
        seed=seed,
        warnings=list(s.warnings),
    )
    if s.voltages is not None:
        rep.voltage_min = s.voltages.min(axis=0).tolist()
        rep.voltage_max = s.voltages.max(axis=0).tolist()
    if not prices.copperplate:
        rep.dlmp_by_bus = prices.prices.tolist()
    return rep
