"""Radial feeder data, LinDistFlow constraints and independent voltage checks.

Voltages are handled in squared per-unit form. For a line ``i -> j`` carrying
``P`` MW and ``Q`` Mvar towards ``j``::

    v_j = v_i - 2 * (r_pu * P + x_pu * Q) / s_base

which is lossless LinDistFlow with impedances on the (v_base, s_base) base.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .lpcore import INF, Problem, VarHandle

LOAD_CLASSES = ("critical", "moderately-critical", "non-critical")

# voltage exponents for the post-solve load diagnostic (P = P0 * V**k)
DEFAULT_LOAD_EXPONENTS = {"critical": 0.0, "moderately-critical": 0.5, "non-critical": 1.0}


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    p_load: float = 0.0
    q_load: float = 0.0
    load_class: str = "non-critical"


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    r: float
    x: float
    flow_limit: float | None = None


@dataclass(frozen=True)
class Network:
    """Immutable radial feeder. Loads in kW/kvar, impedances in ohm."""

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    v_base: float = 12.66
    s_base: float = 10.0
    v_min: float = 0.95
    v_max: float = 1.05
    slack: int = 1
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise NetworkError(f"duplicate bus id(s) {dup}")
        if self.slack not in ids:
            raise NetworkError(f"slack bus {self.slack} is missing")
        for b in self.buses:
            if b.p_load < 0:
                raise NetworkError(f"bus {b.id}: negative real load")
            if b.load_class not in LOAD_CLASSES:
                raise NetworkError(f"bus {b.id}: unknown load class {b.load_class!r}")
        for ln in self.lines:
            if ln.r < 0 or ln.x < 0:
                raise NetworkError(f"line {ln.from_bus}-{ln.to_bus}: negative impedance")
            if ln.from_bus not in ids or ln.to_bus not in ids:
                raise NetworkError(f"line {ln.from_bus}-{ln.to_bus} references an unknown bus")
        if not self.v_min <= 1.0 <= self.v_max:
            raise NetworkError("voltage band must contain 1.0 p.u.")
        self._index.update({b.id: k for k, b in enumerate(self.buses)})

    # -- topology --------------------------------------------------------
    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def z_base(self) -> float:
        return self.v_base ** 2 / self.s_base

    def idx(self, bus_id: int) -> int:
        return self._index[bus_id]

    def bus(self, bus_id: int) -> Bus:
        return self.buses[self._index[bus_id]]

    def r_pu(self, line: Line) -> float:
        return line.r / self.z_base

    def x_pu(self, line: Line) -> float:
        return line.x / self.z_base

    def oriented(self) -> list[tuple[int, int, int]]:
        """``(line_index, parent_bus, child_bus)`` in breadth-first order from the slack."""
        adj: dict[int, list[tuple[int, int]]] = {b.id: [] for b in self.buses}
        for k, ln in enumerate(self.lines):
            adj[ln.from_bus].append((k, ln.to_bus))
            adj[ln.to_bus].append((k, ln.from_bus))
        out = []
        seen = {self.slack}
        queue = deque([self.slack])
        while queue:
            u = queue.popleft()
            for k, w in sorted(adj[u], key=lambda t: t[1]):
                if w not in seen:
                    seen.add(w)
                    out.append((k, u, w))
                    queue.append(w)
        return out

    def path_to(self, bus_id: int) -> list[int]:
        """Bus ids from the slack down to ``bus_id``."""
        parent = {child: par for _, par, child in self.oriented()}
        path = [bus_id]
        while path[-1] != self.slack:
            path.append(parent[path[-1]])
        return path[::-1]

    @property
    def load_kw(self) -> np.ndarray:
        return np.array([b.p_load for b in self.buses])

    @property
    def load_kvar(self) -> np.ndarray:
        return np.array([b.q_load for b in self.buses])


def validate_radial(net: Network) -> bool:
    """True iff the lines form a spanning tree over the buses (rooted at the slack)."""
    if len(net.lines) != net.n_bus - 1:
        return False
    return len(net.oriented()) == net.n_bus - 1


# -- parsing -----------------------------------------------------------------
def parse_network(source, slack: int | None = None) -> Network:
    """Parse the comma-separated feeder format.

    The first data line holds ``v_base_kv,s_base_mva``; every following line
    is ``from,to,r_ohm,x_ohm,p_kw,q_kvar,load_class`` with the load attached
    to the receiving bus. ``#`` comments and a column-name line are skipped.
    ``source`` may be a path or the file's text.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = str(source)
    header = None
    rows = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts[0].lower() in ("from", "from_bus"):
            continue
        if header is None:
            if len(parts) != 2:
                raise NetworkError(f"line {lineno}: expected header 'v_base_kv,s_base_mva'")
            header = (float(parts[0]), float(parts[1]))
            continue
        if len(parts) not in (6, 7):
            raise NetworkError(f"line {lineno}: expected 7 fields, got {len(parts)}")
        try:
            f, t = int(parts[0]), int(parts[1])
            r, x, p, q = (float(v) for v in parts[2:6])
        except ValueError as exc:
            raise NetworkError(f"line {lineno}: {exc}") from None
        cls = parts[6] if len(parts) == 7 and parts[6] else "non-critical"
        rows.append((f, t, r, x, p, q, cls))
    if header is None:
        raise NetworkError("missing 'v_base_kv,s_base_mva' header")

    # a repeated receiving bus is only legal as a load-free branch (it will then
    # fail the radiality check below); with a load it is a duplicate bus definition
    defined: dict[int, tuple] = {}
    for row in rows:
        t = row[1]
        if t in defined and (row[4] or row[5]):
            raise NetworkError(f"duplicate bus id(s) [{t}]")
        defined.setdefault(t, row)
    receivers = set(defined)
    senders = {r[0] for r in rows}
    roots = sorted(senders - receivers)
    if slack is None:
        if len(roots) != 1:
            raise NetworkError("missing slack bus: no unique bus without an incoming line"
                               if not roots else f"several root buses {roots}")
        slack = roots[0]
    if slack in receivers:
        raise NetworkError(f"slack bus {slack} has an incoming line")
    buses = [Bus(slack, 0.0, 0.0, "non-critical")]
    buses += [Bus(t, row[4], row[5], row[6]) for t, row in defined.items()]
    lines = [Line(f, t, r, x) for (f, t, r, x, *_rest) in rows]
    net = Network(tuple(buses), tuple(lines), v_base=header[0], s_base=header[1], slack=slack)
    if not validate_radial(net):
        raise NetworkError("non-radial topology: lines do not form a spanning tree")
    return net


def ieee33() -> Network:
    """The Baran-Wu 33-bus feeder shipped with the package."""
    text = resources.files("h2dso.data").joinpath("ieee33.csv").read_text()
    return parse_network(text)


# -- LinDistFlow ---------------------------------------------------------------
@dataclass
class FlowVars:
    p: list[list[VarHandle]]          # [hour][line]
    q: list[list[VarHandle]]
    v: list[list[VarHandle]]          # [hour][bus index], squared voltage
    balance_rows: list[list[int]]     # [hour][bus index], real-power balance


def balance_tag(bus_id: int, hour: int) -> str:
    return f"pbal[{bus_id},{hour}]"


def build_lindistflow(problem: Problem, net: Network, hours: int, p_injection, q_injection=None,
                      p_load_mw=None, q_load_mvar=None) -> FlowVars:
    """Add LinDistFlow flow, balance and voltage-band rows for ``hours`` periods.

    ``p_injection[t][bus_id]`` is a list of ``(VarHandle, coefficient)``
    terms in MW injected at the bus (negative coefficients for withdrawals);
    buses without an entry inject nothing. ``p_load_mw[t, k]`` is the fixed
    demand at bus index ``k``. Real-power balance rows read
    ``inflow - outflow + injection = load`` and are tagged with
    :func:`balance_tag`, so their duals are nodal marginal prices.
    """
    n = net.n_bus
    if p_load_mw is None:
        p_load_mw = np.zeros((hours, n))
    if q_load_mvar is None:
        q_load_mvar = np.zeros((hours, n))
    p_load_mw = np.asarray(p_load_mw, dtype=float)
    q_load_mvar = np.asarray(q_load_mvar, dtype=float)
    if p_load_mw.shape != (hours, n) or q_load_mvar.shape != (hours, n):
        raise ValueError(f"load arrays must have shape {(hours, n)}")
    order = net.oriented()
    vlo, vhi = net.v_min ** 2, net.v_max ** 2
    slack_k = net.idx(net.slack)
    flows = FlowVars([], [], [], [])
    for t in range(hours):
        p_inj = p_injection[t] if p_injection is not None else {}
        q_inj = q_injection[t] if q_injection is not None else {}
        lim = [ln.flow_limit if ln.flow_limit is not None else INF for ln in net.lines]
        pv = [problem.add_var(-lim[k], lim[k], name=f"P[{ln.from_bus}-{ln.to_bus},{t}]")
              for k, ln in enumerate(net.lines)]
        qv = [problem.add_var(-lim[k], lim[k], name=f"Q[{ln.from_bus}-{ln.to_bus},{t}]")
              for k, ln in enumerate(net.lines)]
        vv = []
        for k, b in enumerate(net.buses):
            if k == slack_k:
                vv.append(problem.add_var(1.0, 1.0, name=f"v[{b.id},{t}]"))
            else:
                vv.append(problem.add_var(vlo, vhi, name=f"v[{b.id},{t}]"))
        p_terms: list[list] = [[] for _ in range(n)]
        q_terms: list[list] = [[] for _ in range(n)]
        for k, par, child in order:
            pk, ck = net.idx(par), net.idx(child)
            p_terms[ck].append((pv[k], 1.0))
            p_terms[pk].append((pv[k], -1.0))
            q_terms[ck].append((qv[k], 1.0))
            q_terms[pk].append((qv[k], -1.0))
            ln = net.lines[k]
            problem.add_constraint(
                [(vv[ck], 1.0), (vv[pk], -1.0),
                 (pv[k], 2.0 * net.r_pu(ln) / net.s_base),
                 (qv[k], 2.0 * net.x_pu(ln) / net.s_base)],
                "=", 0.0, f"vdrop[{par}-{child},{t}]")
        rows = []
        for k, b in enumerate(net.buses):
            terms = p_terms[k] + list(p_inj.get(b.id, []))
            rows.append(problem.add_constraint(terms, "=", p_load_mw[t, k], balance_tag(b.id, t)))
            qt = q_terms[k] + list(q_inj.get(b.id, []))
            problem.add_constraint(qt, "=", q_load_mvar[t, k], f"qbal[{b.id},{t}]")
        flows.p.append(pv)
        flows.q.append(qv)
        flows.v.append(vv)
        flows.balance_rows.append(rows)
    return flows


# -- independent voltage recomputation -------------------------------------------
@dataclass
class VoltageProfile:
    """Per-hour, per-bus voltage magnitude in p.u. (rows = hours, columns = bus index)."""

    v: np.ndarray
    bus_ids: tuple[int, ...]

    @property
    def v_min_bus(self) -> np.ndarray:
        return self.v.min(axis=0)

    @property
    def v_max_bus(self) -> np.ndarray:
        return self.v.max(axis=0)

    def within(self, lo: float, hi: float, tol: float = 1e-9) -> bool:
        return bool(np.all(self.v >= lo - tol) and np.all(self.v <= hi + tol))


def forward_sweep(net: Network, p_net_mw: np.ndarray, q_net_mvar: np.ndarray) -> VoltageProfile:
    """Voltages from nodal net injections (generation minus load) by subtree sums.

    Each line carries the total net withdrawal of the subtree below it; the
    voltage recursion is then applied from the slack outwards.
    """
    p_net_mw = np.atleast_2d(np.asarray(p_net_mw, dtype=float))
    q_net_mvar = np.atleast_2d(np.asarray(q_net_mvar, dtype=float))
    if p_net_mw.shape[1] != net.n_bus or q_net_mvar.shape != p_net_mw.shape:
        raise ValueError(f"injection set incomplete: need {net.n_bus} buses per hour")
    order = net.oriented()
    hours = p_net_mw.shape[0]
    sub_p = -p_net_mw.copy()
    sub_q = -q_net_mvar.copy()
    for k, par, child in reversed(order):
        sub_p[:, net.idx(par)] += sub_p[:, net.idx(child)]
        sub_q[:, net.idx(par)] += sub_q[:, net.idx(child)]
    vsq = np.ones((hours, net.n_bus))
    for k, par, child in order:
        ln = net.lines[k]
        ck = net.idx(child)
        vsq[:, ck] = vsq[:, net.idx(par)] - 2.0 * (net.r_pu(ln) * sub_p[:, ck]
                                                  + net.x_pu(ln) * sub_q[:, ck]) / net.s_base
    return VoltageProfile(np.sqrt(np.maximum(vsq, 0.0)), tuple(b.id for b in net.buses))


def verify_voltages(net: Network, schedule) -> VoltageProfile:
    """Recompute voltages for a schedule from its nodal injections, not its flows."""
    p_net, q_net = schedule.bus_injections(net)
    return forward_sweep(net, p_net, q_net)


def voltage_dependent_demand(net: Network, profile: VoltageProfile, load_kw: np.ndarray,
                             exponents: dict[str, float] | None = None) -> np.ndarray:
    """Diagnostic only: re-evaluate hourly bus demand as ``P0 * V**k`` per load class."""
    exponents = exponents or DEFAULT_LOAD_EXPONENTS
    k = np.array([exponents[b.load_class] for b in net.buses])
    return np.asarray(load_kw) * profile.v ** k


__all__ = [
    "Bus", "Line", "Network", "NetworkError", "VoltageProfile", "FlowVars", "LOAD_CLASSES",
    "balance_tag", "build_lindistflow", "forward_sweep", "ieee33", "parse_network",
    "validate_radial", "verify_voltages", "voltage_dependent_demand",
]
