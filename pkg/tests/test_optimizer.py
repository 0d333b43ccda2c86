from dataclasses import replace

import numpy as np
import pytest

from conftest import flat_profiles, two_bus
from h2dso.assets import FLOW, LI_ION, DgSpec
from h2dso.metrics import curtailment_stats, green_fraction
from h2dso.optimizer import (CASE_IDS, ScheduleInvariantError, SolveError, build_problem,
                             case_config, check_schedule, dg_capacity_factors, pricing_solution,
                             run_case, run_case_5b, solve_model, unpack)

HOURS = 48


@pytest.fixture(scope="module")
def short_runs(net, profiles):
    return {cid: run_case(case_config(cid, horizon=HOURS), net, profiles)
            for cid in ("1", "2", "5a", "6a", "6b", "7b")}


def test_rosters():
    assert case_config("1").pv is None and case_config("1").battery is None
    assert case_config("2").pv.penetration == 1.2
    assert case_config("3").battery is LI_ION and case_config("6b").battery is LI_ION
    assert case_config("4").battery is FLOW and case_config("7a").battery is FLOW
    assert case_config("5a").h2.init_frac == 0.10 and case_config("5a").battery is None
    assert case_config("5b").update_lcoe
    assert case_config("6b").curtail_penalty > 0
    assert all(case_config(c).curtail_penalty == 0 for c in CASE_IDS if c != "6b")
    for cid in ("7a", "7b"):
        cfg = case_config(cid)
        assert cfg.pv.penetration == 1.5 and cfg.dgs_priced_out and not cfg.allow_import
        assert all(g.lcoe == cfg.price_cap for g in cfg.effective_dgs)
    assert case_config("7b").h2.final_frac == 0.5
    with pytest.raises(ValueError):
        case_config("8")
    with pytest.raises(ValueError):
        case_config("2", network_mode="meshed")


def test_case1_has_no_sizing_variables(net, profiles):
    model = build_problem(case_config("1", horizon=4), net, profiles)
    assert model.bat_size is None and model.ez_size is None
    assert not model.pv and len(model.imp) == 4


def test_single_hour_toy():
    dg = (DgSpec("G", 2, 5.0, 36.0, 0.88, no_load_cost=0.0),)
    r = run_case(case_config("1", dgs=dg, horizon=1), two_bus(1000.0), flat_profiles([1.0]))
    assert r.schedule.dg[0, 0] == pytest.approx(1.0)
    assert r.solution.objective_value == pytest.approx(36.0)


def test_zero_load_gives_zero_cost(net):
    r = run_case(case_config("1", horizon=4), net, flat_profiles(np.zeros(4)))
    assert r.solution.objective_value == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.abs(r.schedule.dg) <= 1e-9)


def test_infeasible_roster_carries_problem_dump():
    dg = (DgSpec("G", 2, 0.5, 36.0, 0.88, no_load_cost=0.0),)
    cfg = case_config("1", dgs=dg, horizon=2, allow_import=False)
    with pytest.raises(SolveError) as info:
        run_case(cfg, two_bus(1000.0), flat_profiles([1.0, 1.0]))
    assert info.value.status == "infeasible"
    assert "Subject To" in info.value.lp_dump


def test_profiles_must_cover_horizon(net):
    with pytest.raises(ValueError, match="cover"):
        build_problem(case_config("1", horizon=10), net, flat_profiles(np.ones(4)))


def test_schedule_invariants(short_runs):
    for cid, r in short_runs.items():
        s, cfg = r.schedule, r.config
        assert np.max(np.abs(s.balance_residual())) <= 1e-6
        assert np.allclose(s.pv_dispatched + s.pv_curtailed, s.pv_available)
        for g, spec in enumerate(cfg.dgs):
            assert np.all(np.abs(np.diff(s.dg[g])) <= spec.ramp + 1e-7), (cid, spec.name)
        if cfg.h2 is not None:
            assert s.tank[-1] == pytest.approx(cfg.h2.final_frac * r.sizing.tank, abs=1e-6)
            assert np.all(s.tank <= r.sizing.tank + 1e-6)
            assert np.all(s.electrolyzer <= r.sizing.electrolyzer + 1e-7)


def test_storage_never_raises_cost(short_runs):
    assert short_runs["5a"].solution.objective_value <= short_runs["2"].solution.objective_value + 1e-6
    assert short_runs["6a"].solution.objective_value <= short_runs["5a"].solution.objective_value + 1e-6


def test_curtailment_penalty_never_increases_curtailment(short_runs):
    a = curtailment_stats(short_runs["6a"].schedule).curtailed
    b = curtailment_stats(short_runs["6b"].schedule).curtailed
    assert b <= a + 1e-6


def test_green_extremes(short_runs):
    assert green_fraction(short_runs["1"].schedule) == 0.0
    assert green_fraction(short_runs["7b"].schedule) == pytest.approx(100.0)


def test_pricing_resolve_keeps_dispatch_cost(short_runs):
    r = short_runs["6a"]
    assert r.prices is not r.solution
    assert r.prices.objective_value == pytest.approx(r.solution.objective_value, rel=1e-9)
    # no sizing: the joint solution already gives the prices
    r2 = short_runs["2"]
    assert pricing_solution(r2.model, r2.solution) is r2.solution


def test_exact_commitment_bounds_relaxation(net, profiles):
    relaxed = run_case(case_config("1", horizon=6), net, profiles)
    exact = run_case(case_config("1", horizon=6, commitment_mode="exact"), net, profiles)
    assert exact.solution.objective_value >= relaxed.solution.objective_value - 1e-7
    assert exact.solution.restricted_duals


def test_check_schedule_rejects_imbalance(short_runs):
    r = short_runs["2"]
    broken = replace(r.schedule, load=r.schedule.load + 0.5)
    with pytest.raises(ScheduleInvariantError, match="balance"):
        check_schedule(broken, r.sizing, r.config)


def test_check_schedule_rejects_ramp_violation(short_runs):
    r = short_runs["1"]
    dg = r.schedule.dg.copy()
    dg[0, 1] = dg[0, 0] + 0.5
    imp = r.schedule.grid_import - (dg.sum(axis=0) - r.schedule.dg.sum(axis=0))
    broken = replace(r.schedule, dg=dg, grid_import=imp)
    with pytest.raises(ScheduleInvariantError, match="ramp"):
        check_schedule(broken, r.sizing, r.config)


def test_simultaneous_storage_use_is_only_a_warning(short_runs):
    r = short_runs["6a"]
    s = replace(r.schedule, charge=r.schedule.charge + 0.01, discharge=r.schedule.discharge + 0.01)
    assert any("simultaneous" in w for w in check_schedule(s, r.sizing, r.config))


def test_full_network_voltages_in_band(net, profiles):
    r = run_case(case_config("2", network_mode="full", horizon=6), net, profiles)
    assert r.schedule.voltages.shape == (6, 33)
    assert r.schedule.voltages.min() >= 0.95 - 1e-9
    assert r.schedule.voltages[:, net.idx(net.slack)] == pytest.approx(1.0)


def test_fixed_point_cap_is_absorbing():
    dgs = (DgSpec("A", 2, 2.0, 36.0, 0.88, ramp=2.0, no_load_cost=0.0),
           DgSpec("B", 2, 2.0, 150.0, 0.12, ramp=2.0, no_load_cost=0.0))
    cfg = case_config("5b", dgs=dgs, pv=None, h2=None, horizon=3)
    r = run_case_5b(cfg, two_bus(1000.0), flat_profiles(np.ones(3)))
    assert r.converged and len(r.history) == 2
    assert r.history[1].lcoe[1] == 11_400.0


def test_fixed_point_iteration_cap():
    dgs = (DgSpec("A", 2, 0.8, 36.0, 0.88, ramp=0.8, no_load_cost=0.0),
           DgSpec("B", 2, 2.4, 95.0, 0.12, ramp=2.4, no_load_cost=0.0))
    cfg = case_config("5b", dgs=dgs, pv=None, h2=None, horizon=4, max_fixed_point_iter=1)
    r = run_case_5b(cfg, two_bus(1000.0), flat_profiles(np.ones(4)))
    assert not r.converged and len(r.history) == 1


def test_capacity_factor_fractions():
    dg = (DgSpec("G", 2, 2.0, 36.0, 0.88, ramp=2.0, no_load_cost=0.0),)
    r = run_case(case_config("1", dgs=dg, horizon=2), two_bus(1000.0), flat_profiles([1.0, 1.0]))
    assert dg_capacity_factors(r.schedule) == pytest.approx([0.5])


def test_warm_start_reuses_basis(net, profiles):
    cfg = case_config("2", horizon=24)
    model = build_problem(cfg, net, profiles)
    cold = solve_model(model)
    warm = solve_model(build_problem(cfg, net, profiles), warm_start=cold)
    assert warm.objective_value == pytest.approx(cold.objective_value, rel=1e-12)
    assert warm.iterations <= cold.iterations
    sched, sizing = unpack(model, cold, net)
    assert sizing.battery_power == 0.0
