import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import two_bus
from h2dso.lpcore import Problem, solve_lp
from h2dso.network import (Network, NetworkError, Bus, Line, build_lindistflow, forward_sweep,
                           ieee33, parse_network, validate_radial, verify_voltages,
                           voltage_dependent_demand)


def test_builtin_feeder_shape(net):
    assert net.n_bus == 33
    assert len(net.lines) == 32
    assert net.slack == 1
    assert validate_radial(net)
    assert net.load_kw.sum() == pytest.approx(3715.0)
    assert net.load_kvar.sum() == pytest.approx(2300.0)


def test_two_bus_feeder():
    net = two_bus()
    assert net.n_bus == 2 and len(net.lines) == 1
    assert net.bus(2).load_class == "critical"


def test_loop_closing_line_is_rejected():
    text = ieee33_text() + "33,18,0.5,0.5,0,0\n"
    with pytest.raises(NetworkError, match="non-radial|duplicate"):
        parse_network(text)


def test_duplicate_bus_rejected():
    with pytest.raises(NetworkError, match="duplicate"):
        parse_network("12.66,10\n1,2,0.1,0.1,10,0\n1,3,0.1,0.1,10,0\n3,2,0.1,0.1,5,0\n")


def test_missing_slack_rejected():
    with pytest.raises(NetworkError, match="slack|root"):
        parse_network("12.66,10\n1,2,0.1,0.1,10,0\n2,1,0.1,0.1,10,0\n")


def test_negative_impedance_rejected():
    with pytest.raises(NetworkError, match="impedance|negative"):
        parse_network("12.66,10\n1,2,-0.1,0.1,10,0\n")


def test_missing_header_rejected():
    with pytest.raises(NetworkError, match="header"):
        parse_network("1,2,0.1,0.1,10,0,critical\n")


def test_radiality_predicate():
    assert validate_radial(Network((Bus(1),), ()))
    cyc = Network((Bus(1), Bus(2), Bus(3)),
                  (Line(1, 2, 0.1, 0.1), Line(2, 3, 0.1, 0.1), Line(3, 1, 0.1, 0.1)))
    assert not validate_radial(cyc)
    split = Network((Bus(1), Bus(2), Bus(3), Bus(4)),
                    (Line(1, 2, 0.1, 0.1), Line(3, 4, 0.1, 0.1), Line(4, 3, 0.1, 0.1)))
    assert not validate_radial(split)


def ieee33_text():
    from importlib import resources
    return resources.files("h2dso.data").joinpath("ieee33.csv").read_text()


def _solve_flow(net, p_load_mw, q_load_mvar=None):
    prob = Problem("flow")
    imp = prob.add_var(-np.inf, np.inf)
    qimp = prob.add_var(-np.inf, np.inf)
    flows = build_lindistflow(prob, net, 1, [{net.slack: [(imp, 1.0)]}], [{net.slack: [(qimp, 1.0)]}],
                              np.atleast_2d(p_load_mw), None if q_load_mvar is None
                              else np.atleast_2d(q_load_mvar))
    prob.set_objective([(imp, 1.0)])
    sol = solve_lp(prob)
    assert sol.optimal
    return np.sqrt(sol.value(flows.v[0]))


def test_zero_injection_keeps_nominal_voltage():
    v = _solve_flow(two_bus(0.0), [0.0, 0.0])
    assert v == pytest.approx([1.0, 1.0])


def test_voltage_drop_by_hand():
    # r chosen as 0.01 p.u. on the 12.66 kV / 10 MVA base, 1 MW load; s_base enters per-unit power
    net = two_bus()
    z = net.z_base
    net = parse_network(f"12.66,10\n1,2,{0.01 * z},0,0,0\n")
    v = _solve_flow(net, [0.0, 10.0])
    assert v[1] ** 2 == pytest.approx(1 - 2 * 0.01 * 1.0)
    assert v[1] == pytest.approx(0.98995, abs=1e-5)


def test_solver_voltages_match_forward_sweep(net):
    rng = np.random.default_rng(3)
    load = net.load_kw / 1000.0 * rng.uniform(0.2, 0.5, net.n_bus)
    qload = net.load_kvar / 1000.0 * 0.3
    v = _solve_flow(net, load, qload)
    swept = forward_sweep(net, -load[None, :], -qload[None, :]).v[0]
    assert np.max(np.abs(v - swept)) <= 1e-6


def test_flat_profile_at_zero_load(net):
    prof = forward_sweep(net, np.zeros((3, 33)), np.zeros((3, 33)))
    assert np.all(prof.v == 1.0)
    assert prof.within(0.95, 1.05)


def test_incomplete_injections_rejected(net):
    with pytest.raises(ValueError, match="incomplete"):
        forward_sweep(net, np.zeros((1, 10)), np.zeros((1, 10)))


def test_verify_voltages_needs_bus_loads(net):
    class Bare:
        bus_load = None

        def bus_injections(self, n):
            raise ValueError("injection set incomplete: schedule has no bus-level loads")

    with pytest.raises(ValueError, match="incomplete"):
        verify_voltages(net, Bare())


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 33), st.floats(0.01, 2.0))
def test_monotone_drop_towards_loaded_leaf(leaf_index, mw):
    net = ieee33()
    leaf = net.buses[leaf_index - 1].id
    p = np.zeros((1, net.n_bus))
    p[0, net.idx(leaf)] = -mw
    v = forward_sweep(net, p, np.zeros_like(p)).v[0]
    path = net.path_to(leaf)
    drops = np.diff([v[net.idx(b)] for b in path])
    assert np.all(drops <= 1e-15)


def test_load_diagnostic_uses_class_exponents(net):
    prof = forward_sweep(net, -np.outer([1.0], net.load_kw / 1000.0), -np.outer([1.0], net.load_kvar / 1000.0))
    demand = voltage_dependent_demand(net, prof, net.load_kw)
    for k, b in enumerate(net.buses):
        if b.load_class == "critical":
            assert demand[0, k] == pytest.approx(net.load_kw[k])
        elif b.p_load > 0:
            assert demand[0, k] <= net.load_kw[k] + 1e-9
