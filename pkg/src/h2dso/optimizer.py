"""Joint dispatch and storage sizing over the study horizon.

One LP (or MILP with exact commitment) covers every hour, so storage can
carry energy across days. Costs are the DG and PV energy prices, grid
imports, DG no-load charges, an optional curtailment penalty, and the
horizon share of the capital cost of every sized asset.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import assets as A
from .assets import BatterySpec, DgSpec, FinParams, H2Spec, PvSpec
from .lpcore import Problem, Solution, VarHandle, dump_lp, solve_lp, solve_milp
from .network import Network, build_lindistflow, forward_sweep
from .profiles import ProfileSet

log = logging.getLogger(__name__)

CASE_IDS = ("1", "2", "3", "4", "5a", "5b", "6a", "6b", "7a", "7b")
PRICE_CAP = 11_400.0
CF_FLOOR = 0.001
IMPORT_PRICE = 100.0
CURTAIL_PENALTY_6B = 30.0
BALANCE_TOL = 1e-6


class SolveError(RuntimeError):
    """Solver did not return an optimal solution; ``lp_dump`` holds the model text."""

    def __init__(self, message: str, lp_dump: str = "", status: str = ""):
        super().__init__(message)
        self.lp_dump = lp_dump
        self.status = status


class ScheduleInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class CaseConfig:
    case_id: str
    dgs: tuple[DgSpec, ...] = field(default_factory=A.default_dgs)
    pv: PvSpec | None = None
    battery: BatterySpec | None = None
    h2: H2Spec | None = None
    fin: FinParams = field(default_factory=FinParams)
    curtail_penalty: float = 0.0
    commitment_mode: str = "relaxed"
    network_mode: str = "copperplate"
    import_price: float = IMPORT_PRICE
    allow_import: bool = True
    horizon: int = 336
    update_lcoe: bool = False
    dgs_priced_out: bool = False
    price_cap: float = PRICE_CAP
    cf_floor: float = CF_FLOOR
    max_fixed_point_iter: int = 10
    cf_tol: float = 0.01
    mip_gap: float = 1e-4          # exact commitment only
    node_cap: int = 2000

    def __post_init__(self):
        if self.commitment_mode not in ("relaxed", "exact"):
            raise ValueError(f"commitment_mode must be relaxed or exact, not {self.commitment_mode!r}")
        if self.network_mode not in ("copperplate", "full"):
            raise ValueError(f"network_mode must be full or copperplate, not {self.network_mode!r}")
        if self.curtail_penalty < 0:
            raise ValueError("curtail_penalty must be non-negative")

    @property
    def effective_dgs(self) -> tuple[DgSpec, ...]:
        """DG specs with the LCOE actually priced into the objective."""
        if self.dgs_priced_out:
            return tuple(g.with_lcoe(self.price_cap) for g in self.dgs)
        return self.dgs


def case_config(case_id: str, **overrides) -> CaseConfig:
    """Default roster for one of the ten case studies; keyword overrides win."""
    cid = str(case_id).lower()
    if cid not in CASE_IDS:
        raise ValueError(f"unknown case {case_id!r}; expected one of {CASE_IDS}")
    kw: dict = {"case_id": cid}
    if cid != "1":
        kw["pv"] = PvSpec(penetration=1.5 if cid.startswith("7") else 1.2)
    if cid in ("3", "6a", "6b"):
        kw["battery"] = A.LI_ION
    elif cid in ("4", "7a", "7b"):
        kw["battery"] = A.FLOW
    if cid in ("5a", "5b", "6a", "6b", "7a"):
        kw["h2"] = H2Spec(init_frac=0.10, final_frac=0.10)
    elif cid == "7b":
        kw["h2"] = H2Spec(init_frac=0.50, final_frac=0.50)
    if cid == "5b":
        kw["update_lcoe"] = True
    if cid == "6b":
        kw["curtail_penalty"] = CURTAIL_PENALTY_6B
    if cid.startswith("7"):
        # fossil-free scenario: no wholesale purchases, DGs only as a last resort
        kw["dgs_priced_out"] = True
        kw["allow_import"] = False
    kw.update(overrides)
    return CaseConfig(**kw)


# -- results ---------------------------------------------------------------------
@dataclass
class SizingResult:
    battery_power: float = 0.0
    battery_energy: float = 0.0
    electrolyzer: float = 0.0
    tank: float = 0.0
    fuel_cell: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "battery_power_mw": self.battery_power,
            "battery_energy_mwh": self.battery_energy,
            "electrolyzer_mw": self.electrolyzer,
            "tank_kg": self.tank,
            "fuel_cell_mw": self.fuel_cell,
        }


@dataclass
class ScheduleResult:
    """Hourly operation. Arrays are indexed ``[unit, hour]`` or ``[hour]``."""

    case_id: str
    dg_names: tuple[str, ...]
    dg_buses: tuple[int, ...]
    dg_capacity: np.ndarray
    dg: np.ndarray
    pv_buses: tuple[int, ...]
    pv_available: np.ndarray
    pv_dispatched: np.ndarray
    charge: np.ndarray
    discharge: np.ndarray
    soc: np.ndarray
    electrolyzer: np.ndarray
    fuel_cell: np.ndarray
    tank: np.ndarray
    grid_import: np.ndarray
    load: np.ndarray
    bus_ids: tuple[int, ...] = ()
    bus_load: np.ndarray | None = None        # [hour, bus] MW
    bus_load_q: np.ndarray | None = None      # [hour, bus] Mvar
    voltages: np.ndarray | None = None        # [hour, bus] p.u. magnitude
    battery_bus: int | None = None
    h2_bus: int | None = None
    slack_bus: int = 1
    battery_eta: float = 1.0                  # one-way efficiency
    h2_kg_in: float = 0.0                     # kg stored per MWh into the electrolyser
    h2_kg_out: float = 0.0                    # kg drawn per MWh out of the fuel cell
    warnings: list[str] = field(default_factory=list)

    @property
    def hours(self) -> int:
        return len(self.load)

    @property
    def pv_curtailed(self) -> np.ndarray:
        return self.pv_available - self.pv_dispatched

    def supply(self) -> np.ndarray:
        return (self.dg.sum(axis=0) + self.pv_dispatched.sum(axis=0) + self.discharge
                + self.fuel_cell + self.grid_import)

    def demand(self) -> np.ndarray:
        return self.load + self.charge + self.electrolyzer

    def balance_residual(self) -> np.ndarray:
        return self.supply() - self.demand()

    def bus_injections(self, net: Network) -> tuple[np.ndarray, np.ndarray]:
        """Net real/reactive injection per hour and bus (generation minus withdrawals)."""
        if self.bus_load is None:
            raise ValueError("injection set incomplete: schedule has no bus-level loads")
        p = -self.bus_load.copy()
        q = -(self.bus_load_q.copy() if self.bus_load_q is not None else np.zeros_like(p))
        if p.shape[1] != net.n_bus:
            raise ValueError("injection set incomplete: bus count differs from network")
        for g, bus in enumerate(self.dg_buses):
            p[:, net.idx(bus)] += self.dg[g]
        for k, bus in enumerate(self.pv_buses):
            p[:, net.idx(bus)] += self.pv_dispatched[k]
        if self.battery_bus is not None:
            p[:, net.idx(self.battery_bus)] += self.discharge - self.charge
        if self.h2_bus is not None:
            p[:, net.idx(self.h2_bus)] += self.fuel_cell - self.electrolyzer
        p[:, net.idx(self.slack_bus)] += self.grid_import
        return p, q


@dataclass
class CaseRun:
    config: CaseConfig
    schedule: ScheduleResult
    sizing: SizingResult
    solution: Solution
    model: "CaseModel"
    history: list = field(default_factory=list)
    converged: bool = True
    prices: Solution | None = None     # short-run re-solve whose duals are the nodal prices

    def __iter__(self):
        # allows ``schedule, sizing, solution = run_case(...)``
        return iter((self.schedule, self.sizing, self.solution))


# -- model assembly -----------------------------------------------------------------
@dataclass
class CaseModel:
    problem: Problem
    config: CaseConfig
    hours: int
    load: np.ndarray
    bus_load: np.ndarray | None
    bus_load_q: np.ndarray | None
    pv_avail: np.ndarray
    dg_p: list[list[VarHandle]] = field(default_factory=list)
    dg_u: list[list[VarHandle] | None] = field(default_factory=list)
    pv: list[list[VarHandle]] = field(default_factory=list)
    imp: list[VarHandle] = field(default_factory=list)
    bat_size: VarHandle | None = None
    ch: list[VarHandle] = field(default_factory=list)
    dis: list[VarHandle] = field(default_factory=list)
    soc: list[VarHandle] = field(default_factory=list)
    ez_size: VarHandle | None = None
    tank_size: VarHandle | None = None
    fc_size: VarHandle | None = None
    ez: list[VarHandle] = field(default_factory=list)
    fc: list[VarHandle] = field(default_factory=list)
    mass: list[VarHandle] = field(default_factory=list)
    flows: object = None
    balance_tags: list[list[str]] = field(default_factory=list)   # [hour][bus index] or [hour][0]
    capital_terms: dict[str, float] = field(default_factory=dict)


def _unit_capex(cfg: CaseConfig) -> dict[str, float]:
    """Horizon capital charge per MW (or per kg of tank)."""
    fin = cfg.fin
    out = {}
    if cfg.battery is not None:
        out["battery"] = A.horizon_capex(1000.0, cfg.battery.capex_per_kw, fin, cfg.battery.lifetime_key)
    if cfg.h2 is not None:
        h2 = cfg.h2
        ez = A.horizon_capex(1000.0, h2.ez_capex, fin, "electrolyzer")
        if h2.include_compressor:
            ez += A.horizon_capex(1000.0, h2.comp_capex, fin, "compressor")
        out["electrolyzer"] = ez
        out["tank"] = A.horizon_capex(1.0, h2.tank_capex, fin, "tank")
        out["fuel_cell"] = A.horizon_capex(1000.0, h2.fc_capex, fin, "fuel_cell")
    return out


def build_problem(cfg: CaseConfig, net: Network, profiles: ProfileSet) -> CaseModel:
    """Assemble the case LP. The returned model exposes the Problem and every handle."""
    T = min(cfg.horizon, profiles.hours)
    if T < 1:
        raise ValueError("profiles must cover at least one hour")
    if profiles.hours < cfg.horizon:
        raise ValueError(f"profiles cover {profiles.hours} h, case needs {cfg.horizon} h")
    prob = Problem(f"case-{cfg.case_id}")
    bus_load = profiles.bus_load(net.load_kw / 1000.0)[:T]
    bus_load_q = profiles.bus_load(net.load_kvar / 1000.0)[:T]
    load = bus_load.sum(axis=1)
    if cfg.pv is not None:
        total_pv = profiles.pv_available_mw(cfg.pv.penetration)[:T]
        pv_avail = np.tile(total_pv / len(cfg.pv.buses), (len(cfg.pv.buses), 1))
    else:
        pv_avail = np.zeros((0, T))
    model = CaseModel(prob, cfg, T, load, bus_load, bus_load_q, pv_avail)
    capex = _unit_capex(cfg)
    model.capital_terms = capex
    obj: list[tuple[VarHandle, float]] = []
    const = 0.0
    binary = cfg.commitment_mode == "exact"

    # bus -> injection terms, per hour
    inj: list[dict[int, list]] = [dict() for _ in range(T)]

    def put(t, bus, var, coef):
        inj[t].setdefault(bus, []).append((var, coef))

    # DGs
    for g in cfg.effective_dgs:
        p = [prob.add_var(0.0, g.capacity, name=f"{g.name}[{t}]") for t in range(T)]
        needs_u = binary or g.no_load_cost > 0 or g.min_output > 0
        u = None
        if needs_u:
            kind = "binary" if binary else "continuous"
            u = [prob.add_var(0.0, 1.0, kind=kind, name=f"u_{g.name}[{t}]") for t in range(T)]
            for t in range(T):
                prob.add_constraint([(p[t], 1.0), (u[t], -g.capacity)], "<=", 0.0)
                if g.min_output > 0:
                    prob.add_constraint([(p[t], 1.0), (u[t], -g.min_output)], ">=", 0.0)
                obj.append((u[t], g.no_load_cost))
        for t in range(T):
            obj.append((p[t], g.lcoe))
            put(t, g.bus, p[t], 1.0)
            if t > 0:
                prob.add_range([(p[t], 1.0), (p[t - 1], -1.0)], -g.ramp, g.ramp,
                               f"ramp[{g.name},{t}]")
        model.dg_p.append(p)
        model.dg_u.append(u)

    # PV (curtailment is availability minus dispatch)
    if cfg.pv is not None:
        price = cfg.pv.lcoe - cfg.curtail_penalty
        for k, bus in enumerate(cfg.pv.buses):
            pk = [prob.add_var(0.0, pv_avail[k, t], name=f"pv{bus}[{t}]") for t in range(T)]
            for t in range(T):
                obj.append((pk[t], price))
                put(t, bus, pk[t], 1.0)
            model.pv.append(pk)
        const += cfg.curtail_penalty * float(pv_avail.sum())

    # grid import at the substation
    imp_cap = math.inf if cfg.allow_import else 0.0
    model.imp = [prob.add_var(0.0, imp_cap, name=f"import[{t}]") for t in range(T)]
    for t in range(T):
        obj.append((model.imp[t], cfg.import_price))
        put(t, net.slack, model.imp[t], 1.0)

    # battery
    if cfg.battery is not None:
        b = cfg.battery
        if b.power_rating is None:
            size = prob.add_var(0.0, name="battery_power")
        else:
            size = prob.add_var(b.power_rating, b.power_rating, name="battery_power")
        obj.append((size, capex["battery"]))
        eta = b.eta
        ch = [prob.add_var(0.0, name=f"charge[{t}]") for t in range(T)]
        dis = [prob.add_var(0.0, name=f"discharge[{t}]") for t in range(T)]
        soc = [prob.add_var(0.0, name=f"soc[{t}]") for t in range(T)]
        for t in range(T):
            prob.add_constraint([(ch[t], 1.0), (size, -1.0)], "<=", 0.0)
            prob.add_constraint([(dis[t], 1.0), (size, -1.0)], "<=", 0.0)
            prob.add_constraint([(soc[t], 1.0), (size, -b.duration)], "<=", 0.0)
            terms = [(soc[t], 1.0), (ch[t], -eta), (dis[t], 1.0 / eta)]
            if t == 0:
                terms.append((size, -b.boundary_frac * b.duration))
            else:
                terms.append((soc[t - 1], -1.0))
            prob.add_constraint(terms, "=", 0.0, f"soc_dyn[{t}]")
            put(t, b.bus, dis[t], 1.0)
            put(t, b.bus, ch[t], -1.0)
        prob.add_constraint([(soc[-1], 1.0), (size, -b.boundary_frac * b.duration)], "=", 0.0,
                            "soc_final")
        model.bat_size, model.ch, model.dis, model.soc = size, ch, dis, soc

    # hydrogen chain
    if cfg.h2 is not None:
        h = cfg.h2
        ez_size = prob.add_var(0.0, name="electrolyzer_mw")
        tank_size = prob.add_var(0.0, name="tank_kg")
        fc_size = prob.add_var(0.0, name="fuel_cell_mw")
        obj += [(ez_size, capex["electrolyzer"]), (tank_size, capex["tank"]),
                (fc_size, capex["fuel_cell"])]
        ez = [prob.add_var(0.0, name=f"ez[{t}]") for t in range(T)]
        fc = [prob.add_var(0.0, name=f"fc[{t}]") for t in range(T)]
        mass = [prob.add_var(0.0, name=f"tank[{t}]") for t in range(T)]
        kin, kout = h.kg_per_mwh_in, h.kg_per_mwh_out
        for t in range(T):
            prob.add_constraint([(ez[t], 1.0), (ez_size, -1.0)], "<=", 0.0)
            prob.add_constraint([(fc[t], 1.0), (fc_size, -1.0)], "<=", 0.0)
            prob.add_constraint([(mass[t], 1.0), (tank_size, -1.0)], "<=", 0.0)
            terms = [(mass[t], 1.0), (ez[t], -kin), (fc[t], kout)]
            if t == 0:
                terms.append((tank_size, -h.init_frac))
            else:
                terms.append((mass[t - 1], -1.0))
            prob.add_constraint(terms, "=", 0.0, f"tank_dyn[{t}]")
            put(t, h.bus, fc[t], 1.0)
            put(t, h.bus, ez[t], -1.0)
        prob.add_constraint([(mass[-1], 1.0), (tank_size, -h.final_frac)], "=", 0.0, "tank_final")
        model.ez_size, model.tank_size, model.fc_size = ez_size, tank_size, fc_size
        model.ez, model.fc, model.mass = ez, fc, mass

    # power balance
    if cfg.network_mode == "copperplate":
        for t in range(T):
            terms = [term for bus_terms in inj[t].values() for term in bus_terms]
            tag = f"pbal[sys,{t}]"
            prob.add_constraint(_merge(terms), "=", float(load[t]), tag)
            model.balance_tags.append([tag])
    else:
        q_inj = []
        for t in range(T):
            qimp = prob.add_var(-math.inf, math.inf, name=f"q_import[{t}]")
            q_inj.append({net.slack: [(qimp, 1.0)]})
        p_inj = [{bus: _merge(terms) for bus, terms in inj[t].items()} for t in range(T)]
        model.flows = build_lindistflow(prob, net, T, p_inj, q_inj, bus_load, bus_load_q)
        model.balance_tags = [[f"pbal[{b.id},{t}]" for b in net.buses] for t in range(T)]

    prob.set_objective(obj, constant=const)
    return model


def _merge(terms):
    acc: dict[int, list] = {}
    for v, a in terms:
        if v.index in acc:
            acc[v.index][1] += a
        else:
            acc[v.index] = [v, a]
    return [(v, a) for v, a in acc.values()]


# -- solve and unpack ------------------------------------------------------------------
def _values(sol: Solution, handles) -> np.ndarray:
    return np.array([sol.primal[v.index] for v in handles]) if handles else np.zeros(0)


def solve_model(model: CaseModel, warm_start: Solution | None = None) -> Solution:
    cfg = model.config
    if cfg.commitment_mode == "exact":
        sol = solve_milp(model.problem, cfg.mip_gap, cfg.node_cap)
    else:
        sol = solve_lp(model.problem, warm_start=warm_start)
    if sol.status != "optimal":
        raise SolveError(f"case {cfg.case_id}: solver status {sol.status} {sol.message}".strip(),
                         dump_lp(model.problem), sol.status)
    return sol


def unpack(model: CaseModel, sol: Solution, net: Network) -> tuple[ScheduleResult, SizingResult]:
    cfg = model.config
    T = model.hours
    zeros = np.zeros(T)
    dg = np.array([_values(sol, p) for p in model.dg_p]) if model.dg_p else np.zeros((0, T))
    pv = np.array([_values(sol, p) for p in model.pv]) if model.pv else np.zeros((0, T))
    # dispatched PV cannot exceed availability; clip solver round-off at the bounds
    pv = np.clip(pv, 0.0, model.pv_avail)
    sched = ScheduleResult(
        case_id=cfg.case_id,
        dg_names=tuple(g.name for g in cfg.dgs),
        dg_buses=tuple(g.bus for g in cfg.dgs),
        dg_capacity=np.array([g.capacity for g in cfg.dgs]),
        dg=dg,
        pv_buses=tuple(cfg.pv.buses) if cfg.pv else (),
        pv_available=model.pv_avail.copy(),
        pv_dispatched=pv,
        charge=_values(sol, model.ch) if model.ch else zeros.copy(),
        discharge=_values(sol, model.dis) if model.dis else zeros.copy(),
        soc=_values(sol, model.soc) if model.soc else zeros.copy(),
        electrolyzer=_values(sol, model.ez) if model.ez else zeros.copy(),
        fuel_cell=_values(sol, model.fc) if model.fc else zeros.copy(),
        tank=_values(sol, model.mass) if model.mass else zeros.copy(),
        grid_import=_values(sol, model.imp),
        load=model.load.copy(),
        bus_ids=tuple(b.id for b in net.buses),
        bus_load=model.bus_load.copy(),
        bus_load_q=model.bus_load_q.copy(),
        battery_bus=cfg.battery.bus if cfg.battery else None,
        h2_bus=cfg.h2.bus if cfg.h2 else None,
        slack_bus=net.slack,
        battery_eta=cfg.battery.eta if cfg.battery else 1.0,
        h2_kg_in=cfg.h2.kg_per_mwh_in if cfg.h2 else 0.0,
        h2_kg_out=cfg.h2.kg_per_mwh_out if cfg.h2 else 0.0,
    )
    if model.flows is not None:
        sched.voltages = np.sqrt(np.maximum(np.array([_values(sol, vv) for vv in model.flows.v]), 0.0))
    sizing = SizingResult()
    if model.bat_size is not None:
        sizing.battery_power = max(0.0, sol.value(model.bat_size))
        sizing.battery_energy = cfg.battery.duration * sizing.battery_power
    if model.ez_size is not None:
        sizing.electrolyzer = max(0.0, sol.value(model.ez_size))
        sizing.tank = max(0.0, sol.value(model.tank_size))
        sizing.fuel_cell = max(0.0, sol.value(model.fc_size))
    return sched, sizing


def check_schedule(sched: ScheduleResult, sizing: SizingResult, cfg: CaseConfig,
                   net: Network | None = None, tol: float = BALANCE_TOL) -> list[str]:
    """Raise on a broken invariant; return soft warnings (e.g. simultaneous charge/discharge)."""
    res = np.abs(sched.balance_residual())
    if res.size and res.max() > tol:
        raise ScheduleInvariantError(f"power balance residual {res.max():.3g} MW at hour {res.argmax()}")
    if np.any(sched.pv_dispatched > sched.pv_available + tol) or np.any(sched.pv_dispatched < -tol):
        raise ScheduleInvariantError("PV dispatch outside [0, available]")
    for g, spec in enumerate(cfg.dgs):
        steps = np.abs(np.diff(sched.dg[g]))
        if steps.size and steps.max() > spec.ramp + tol:
            raise ScheduleInvariantError(f"{spec.name} ramp {steps.max():.4g} exceeds {spec.ramp:.4g}")
    if cfg.h2 is not None and sched.hours:
        scale = 1.0 + sizing.tank
        if abs(sched.tank[-1] - cfg.h2.final_frac * sizing.tank) > tol * scale:
            raise ScheduleInvariantError("final tank level differs from its boundary value")
        first = A.tank_transition(cfg.h2.init_frac * sizing.tank, sched.electrolyzer[0],
                                  sched.fuel_cell[0], cfg.h2)
        if abs(first - sched.tank[0]) > tol * scale:
            raise ScheduleInvariantError("initial tank level differs from its boundary value")
    if cfg.battery is not None and abs(sizing.battery_energy - cfg.battery.duration * sizing.battery_power) > 0:
        raise ScheduleInvariantError("battery energy rating is not duration x power")
    warnings = []
    both = np.flatnonzero((sched.charge > 1e-6) & (sched.discharge > 1e-6))
    if both.size:
        warnings.append(f"simultaneous battery charge/discharge in {both.size} hour(s)")
    both = np.flatnonzero((sched.electrolyzer > 1e-6) & (sched.fuel_cell > 1e-6))
    if both.size:
        warnings.append(f"simultaneous electrolysis/fuel-cell operation in {both.size} hour(s)")
    if sched.voltages is not None and net is not None:
        p_net, q_net = sched.bus_injections(net)
        recomputed = forward_sweep(net, p_net, q_net).v
        dev = float(np.max(np.abs(recomputed - sched.voltages)))
        if dev > 1e-6:
            raise ScheduleInvariantError(f"forward-sweep voltages deviate from solver by {dev:.3g} p.u.")
        if not (np.all(recomputed >= net.v_min - 1e-6) and np.all(recomputed <= net.v_max + 1e-6)):
            raise ScheduleInvariantError("voltage outside the allowed band")
    return warnings


def pricing_solution(model: CaseModel, sol: Solution) -> Solution:
    """Re-solve the dispatch with sizing (and any commitment binaries) held at ``sol``.

    The duals of this short-run problem are the reported nodal prices; the
    joint problem's duals also carry the capacity rent of the storage assets.
    Returns ``sol`` itself when the case has nothing to size.
    """
    prob = model.problem
    held = [h for h in (model.bat_size, model.ez_size, model.tank_size, model.fc_size) if h is not None]
    held += [u for us in model.dg_u if us is not None for u in us if u.kind == "binary"]
    if not held:
        return sol
    saved = {h.index: prob.bounds(h) for h in held}
    try:
        for h in held:
            val = float(sol.primal[h.index])
            prob.set_bounds(h, val, val)
        fixed = solve_lp(prob, relax_integrality=True)
    finally:
        for h in held:
            prob.set_bounds(h, *saved[h.index])
    if fixed.status != "optimal":
        raise SolveError(f"case {model.config.case_id}: pricing re-solve status {fixed.status}",
                         dump_lp(prob), fixed.status)
    fixed.restricted_duals = sol.restricted_duals
    return fixed


def run_case(cfg: CaseConfig, net: Network, profiles: ProfileSet,
             warm_start: Solution | None = None) -> CaseRun:
    """Build, solve, unpack and verify one case.

    Case 5b (``cfg.update_lcoe``) is routed through :func:`run_case_5b`.
    """
    if cfg.update_lcoe:
        return run_case_5b(cfg, net, profiles)
    model = build_problem(cfg, net, profiles)
    sol = solve_model(model, warm_start)
    sched, sizing = unpack(model, sol, net)
    sched.warnings = check_schedule(sched, sizing, cfg, net if cfg.network_mode == "full" else None)
    if sol.message:
        sched.warnings.append(sol.message)
    log.info("case %s: objective %.2f in %d iterations", cfg.case_id, sol.objective_value, sol.iterations)
    return CaseRun(cfg, sched, sizing, sol, model, prices=pricing_solution(model, sol))


# -- LCOE fixed point --------------------------------------------------------------------
def update_lcoe(spec: DgSpec, actual_cf: float, price_cap: float = PRICE_CAP,
                cf_floor: float = CF_FLOOR) -> float:
    """Re-price a DG at its realised capacity factor.

    ``nrel_cf / actual_cf * lcoe``; below ``cf_floor`` the LCOE is the
    price cap. ``spec.lcoe`` must hold the reference (not an updated) LCOE.
    """
    if actual_cf < 0:
        raise ValueError("capacity factor must be non-negative")
    if actual_cf < cf_floor:
        return price_cap
    return spec.nrel_cf / actual_cf * spec.lcoe


def dg_capacity_factors(sched: ScheduleResult) -> np.ndarray:
    """Fractional capacity factor per DG over the schedule horizon."""
    if sched.hours == 0:
        return np.zeros(len(sched.dg_capacity))
    return sched.dg.sum(axis=1) / (sched.dg_capacity * sched.hours)


@dataclass
class FixedPointStep:
    lcoe: tuple[float, ...]
    capacity_factor: tuple[float, ...]
    schedule: ScheduleResult
    sizing: SizingResult
    objective: float


def run_case_5b(cfg: CaseConfig, net: Network, profiles: ProfileSet) -> CaseRun:
    """Solve, re-price DGs at their realised capacity factors, and repeat.

    Every iteration re-sizes storage. Stops when no DG capacity factor moves
    by ``cfg.cf_tol`` or more between successive solves, or after
    ``cfg.max_fixed_point_iter`` solves (then ``converged`` is False).
    """
    reference = cfg.dgs
    current = replace(cfg, update_lcoe=False)
    history: list[FixedPointStep] = []
    prev_cf = None
    sol = None
    converged = False
    run = None
    for _ in range(cfg.max_fixed_point_iter):
        model = build_problem(current, net, profiles)
        sol = solve_model(model, warm_start=sol)
        sched, sizing = unpack(model, sol, net)
        sched.warnings = check_schedule(sched, sizing, current,
                                        net if current.network_mode == "full" else None)
        cf = dg_capacity_factors(sched)
        history.append(FixedPointStep(tuple(g.lcoe for g in current.dgs), tuple(cf), sched, sizing,
                                      sol.objective_value))
        run = CaseRun(cfg, sched, sizing, sol, model)
        if prev_cf is not None and np.max(np.abs(cf - prev_cf)) < cfg.cf_tol:
            converged = True
            break
        prev_cf = cf
        new = tuple(g.with_lcoe(update_lcoe(g, c, cfg.price_cap, cfg.cf_floor))
                    for g, c in zip(reference, cf))
        current = replace(current, dgs=new)
    run.history = history
    run.converged = converged
    run.prices = pricing_solution(run.model, run.solution)
    run.schedule.case_id = cfg.case_id
    return run
