import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h2dso.assets import default_dgs
from h2dso.metrics import (CAPEX_SWEEP, LCOE_SWEEP, CaseReport, capacity_factor, case_report,
                           curtailment_stats, dlmp_stats, fit_h2_params, fossil_fraction,
                           green_fraction, h2_cost)
from h2dso.optimizer import ScheduleResult, case_config, run_case
from h2dso.profiles import gen_profiles


def sched(load, dg=None, pv=None, pv_avail=None, imp=None, charge=None, dis=None, soc=None,
          eta=1.0, caps=(0.8,)):
    load = np.asarray(load, dtype=float)
    T = len(load)
    z = np.zeros(T)
    dg = np.zeros((len(caps), T)) if dg is None else np.atleast_2d(np.asarray(dg, dtype=float))
    pv = np.zeros((0, T)) if pv is None else np.atleast_2d(np.asarray(pv, dtype=float))
    avail = pv.copy() if pv_avail is None else np.atleast_2d(np.asarray(pv_avail, dtype=float))
    return ScheduleResult(
        case_id="t", dg_names=tuple(f"G{k}" for k in range(len(caps))),
        dg_buses=(2,) * len(caps), dg_capacity=np.array(caps, dtype=float), dg=dg,
        pv_buses=(2,) * len(pv), pv_available=avail, pv_dispatched=pv,
        charge=z if charge is None else np.asarray(charge, dtype=float),
        discharge=z if dis is None else np.asarray(dis, dtype=float),
        soc=z if soc is None else np.asarray(soc, dtype=float),
        electrolyzer=z, fuel_cell=z, tank=z,
        grid_import=z if imp is None else np.asarray(imp, dtype=float),
        load=load, battery_eta=eta)


# -- green share ---------------------------------------------------------------------
def test_all_pv_is_fully_green():
    s = sched([1.0, 2.0], pv=[[1.0, 2.0]])
    assert green_fraction(s) == 100.0
    assert fossil_fraction(s) == 0.0


def test_all_fossil_is_zero_green():
    s = sched([1.0, 1.0], dg=[[0.5, 0.5]], imp=[0.5, 0.5])
    assert green_fraction(s) == 0.0
    assert fossil_fraction(s) == 100.0


def test_zero_load_is_undefined():
    with pytest.raises(ValueError, match="zero"):
        green_fraction(sched([0.0, 0.0]))


def test_stored_pv_stays_green():
    # hour 0: 2 MW of PV, 1 to load, 1 into a lossless battery; hour 1: battery serves the load
    s = sched([1.0, 1.0], pv=[[2.0, 0.0]], charge=[1.0, 0.0], dis=[0.0, 1.0], soc=[1.0, 0.0])
    assert green_fraction(s) == pytest.approx(100.0)


def test_stored_fossil_stays_fossil():
    s = sched([1.0, 1.0], dg=[[2.0, 0.0]], charge=[1.0, 0.0], dis=[0.0, 1.0], soc=[1.0, 0.0],
              caps=(2.0,))
    assert green_fraction(s) == pytest.approx(0.0)


def test_mixed_charge_is_split_pro_rata():
    # charge 1 MWh from 0.5 PV surplus + 0.5 DG, then discharge it all
    s = sched([1.0, 1.0], dg=[[1.5, 0.0]], pv=[[0.5, 0.0]], charge=[1.0, 0.0],
              dis=[0.0, 1.0], soc=[1.0, 0.0], caps=(2.0,))
    # PV goes to the charge first, so the battery holds 0.5 green of 1.0
    assert green_fraction(s) == pytest.approx(25.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 3), st.floats(0, 1)), min_size=1, max_size=24))
def test_green_and_fossil_sum_to_hundred(rows):
    load = np.array([r[0] for r in rows])
    pv = load * np.array([r[1] for r in rows])
    s = sched(load, pv=[pv], imp=load - pv)
    g = green_fraction(s)
    assert 0.0 <= g <= 100.0
    assert g + fossil_fraction(s) == pytest.approx(100.0)
    assert g == pytest.approx(100.0 * pv.sum() / load.sum())


# -- capacity factor and curtailment -----------------------------------------------------
def test_capacity_factor_examples():
    dg8 = default_dgs()[0]
    T = 336
    full = sched(np.ones(T), dg=[np.full(T, 0.8)], caps=(0.8,))
    half = sched(np.ones(T), dg=[np.full(T, 0.4)], caps=(0.8,))
    assert full.dg.sum() == pytest.approx(268.8)
    assert capacity_factor(full, "G0") == pytest.approx(100.0)
    assert half.dg.sum() == pytest.approx(134.4)
    assert capacity_factor(half, "G0") == pytest.approx(50.0)
    renamed = sched(np.ones(T), dg=[np.full(T, 0.4)], caps=(0.8,))
    object.__setattr__(renamed, "dg_names", (dg8.name,))
    assert capacity_factor(renamed, dg8) == pytest.approx(50.0)


def test_no_pv_means_no_curtailment():
    assert tuple(curtailment_stats(sched([1.0]))) == (0.0, 0.0, 0.0)


def test_curtailment_identity():
    s = sched([1.0, 1.0], pv=[[0.5, 1.0]], pv_avail=[[2.0, 1.0]])
    c = curtailment_stats(s)
    assert (c.available, c.curtailed) == (3.0, 1.5)
    assert c.percent == pytest.approx(50.0)
    assert c.dispatched + c.curtailed == c.available


@pytest.mark.parametrize("pen,energy", [(1.2, 1110.0), (1.5, 1387.5)])
def test_available_pv_energy_tracks_penetration(pen, energy):
    prof = gen_profiles(0, pen)
    assert prof.pv_available_mw().sum() == pytest.approx(energy, abs=1.0)
    assert prof.load_mw().sum() == pytest.approx(925.0, rel=1e-12)


# -- nodal prices ------------------------------------------------------------------------
@pytest.fixture(scope="module")
def case2_run(net, profiles):
    return run_case(case_config("2", horizon=24), net, profiles)


def test_copperplate_prices_are_uniform(case2_run, net):
    st_ = dlmp_stats(case2_run.solution, net, case2_run.schedule.bus_load)
    assert st_.copperplate and not st_.restricted
    assert st_.prices.shape == (24, 33)
    assert np.all(st_.prices == st_.prices[:, :1])
    assert st_.hourly == pytest.approx(st_.prices[:, 0])
    w = case2_run.schedule.bus_load
    assert st_.mean == pytest.approx((st_.prices * w).sum() / w.sum())


def test_unweighted_mean_without_loads(case2_run, net):
    st_ = dlmp_stats(case2_run.solution, net)
    assert st_.mean == pytest.approx(st_.prices.mean())


def test_exact_commitment_flags_restricted_duals(net, profiles):
    r = run_case(case_config("1", horizon=4, commitment_mode="exact"), net, profiles)
    assert dlmp_stats(r.solution, net).restricted


def test_prices_need_an_optimal_solution(case2_run, net):
    from dataclasses import replace
    bad = replace(case2_run.solution, status="infeasible")
    with pytest.raises(ValueError, match="infeasible"):
        dlmp_stats(bad, net)


# -- hydrogen cost -----------------------------------------------------------------------
def test_h2_cost_examples():
    assert h2_cost(100, 0, 12).production == pytest.approx(1.02, abs=0.005)
    assert h2_cost(100, 0, 12).total == pytest.approx(1.04, abs=0.005)
    assert h2_cost(100, 148, 12).production == pytest.approx(1.51, abs=0.005)
    assert h2_cost(0, 0, 0).total == pytest.approx(0.02)
    with pytest.raises(ValueError):
        h2_cost(-1.0)


@given(st.floats(0, 500), st.floats(0, 500), st.floats(0, 50))
def test_h2_cost_is_affine(ez, dz, lcoe):
    a = h2_cost(ez, 0, lcoe)
    b = h2_cost(ez + dz, 0, lcoe)
    assert b.total - a.total == pytest.approx(dz * a.capex_rate, abs=1e-9)
    assert a.total == pytest.approx(a.energy_component + a.capex_component + a.storage_component)


def test_fit_on_published_tables():
    fit = fit_h2_params(CAPEX_SWEEP, LCOE_SWEEP)
    assert fit.e_spec == pytest.approx(57.6, abs=0.2)
    assert fit.capex_rate == pytest.approx(0.0033, abs=2e-5)
    assert fit.max_residual < 0.01


def test_fit_recovers_exact_parameters():
    rows = [(c, l, 0.06 * l + 0.004 * c) for c in (50, 150, 250) for l in (8, 12)]
    e, r = fit_h2_params(rows, rows)
    assert (e, r) == (pytest.approx(60.0), pytest.approx(0.004))
    assert fit_h2_params(rows, rows).max_residual < 1e-12


def test_fit_rejects_degenerate_input():
    with pytest.raises(ValueError, match="degenerate"):
        fit_h2_params([(100, 12, 1.0), (100, 12, 1.0)], LCOE_SWEEP)
    with pytest.raises(ValueError, match="degenerate"):
        fit_h2_params(CAPEX_SWEEP, [(100, 12, 1.0), (200, 12, 1.3)])


# -- report --------------------------------------------------------------------------------
def test_case_report_round_trip(case2_run, net):
    rep = case_report(case2_run, net, seed=0)
    again = CaseReport.from_json(rep.to_json())
    assert again == rep
    d = json.loads(rep.to_json())
    assert d["case_id"] == "2" and d["seed"] == 0
    assert rep.pv_dispatched + rep.pv_curtailed == pytest.approx(rep.pv_available)
    assert rep.objective == pytest.approx(rep.operation_cost + rep.capital_cost)
    assert rep.dlmp_by_bus is None


def test_report_rejects_impossible_green_share():
    with pytest.raises(ValueError):
        CaseReport("x", 120.0, -20.0, {}, 0.0, [], 0.0, 0, 0, 0, 0, 0, 0, 0, {})
