import pytest
from hypothesis import given
from hypothesis import strategies as st

from h2dso.assets import (FLOW, LI_ION, BatterySpec, DgSpec, FinParams, H2Spec, PvSpec, crf,
                          default_dgs, horizon_capex, soc_transition, tank_transition)


def test_crf_values():
    assert crf(0.10, 10) == pytest.approx(0.16275, abs=1e-5)
    assert crf(0.07, 20) == pytest.approx(0.09439, abs=1e-5)
    assert crf(1e-9, 10) == pytest.approx(0.1, rel=1e-6)


@given(st.floats(1e-6, 0.5), st.integers(1, 60))
def test_crf_at_least_straight_line(i, n):
    assert crf(i, n) >= 1.0 / n - 1e-12


def test_crf_rejects_short_life():
    with pytest.raises(ValueError):
        crf(0.07, 0.5)


def test_horizon_capex_arithmetic():
    fin = FinParams(horizon_fraction=14 / 365)
    assert horizon_capex(0.0, 100.0, fin, crf_value=0.1) == 0.0
    assert horizon_capex(1000.0, 100.0, fin, crf_value=0.1) == pytest.approx(383.56, abs=0.01)
    assert horizon_capex(1000.0, 240.0, fin, crf_value=0.1) == pytest.approx(920.55, abs=0.01)
    with pytest.raises(ValueError):
        horizon_capex(-1.0, 100.0, fin)


@given(st.floats(0, 1e4), st.floats(0, 2000))
def test_horizon_capex_is_linear_in_capacity(cap, capex):
    fin = FinParams()
    one = horizon_capex(cap, capex, fin, "battery")
    assert horizon_capex(2 * cap, capex, fin, "battery") == pytest.approx(2 * one, rel=1e-12, abs=1e-12)


def test_fin_params_validation():
    with pytest.raises(ValueError):
        FinParams(interest=0.0)
    with pytest.raises(ValueError):
        FinParams(lifetimes={"battery": 0})
    assert FinParams().crf("tank") == pytest.approx(crf(0.07, 20))


def test_dg_defaults_and_validation():
    dg8, dg13, dg30 = default_dgs()
    assert (dg8.capacity, dg8.lcoe, dg8.nrel_cf) == (0.8, 36.0, 0.88)
    assert (dg13.capacity, dg13.lcoe) == (2.4, 95.0)
    assert (dg30.capacity, dg30.lcoe) == (1.0, 98.0)
    assert dg8.ramp == pytest.approx(0.2)
    assert dg8.no_load_cost == pytest.approx(0.02 * 36.0 * 0.8)
    with pytest.raises(ValueError):
        DgSpec("x", 2, 1.0, 50.0, 0.0)
    with pytest.raises(ValueError):
        DgSpec("x", 2, 1.0, 50.0, 0.5, ramp=0.0)
    with pytest.raises(ValueError):
        DgSpec("x", 2, 1.0, 50.0, 0.5, min_output=2.0)
    assert dg8.with_lcoe(40.0).lcoe == 40.0


def test_battery_specs():
    assert LI_ION.duration == 4.0 and LI_ION.rte == 0.81
    assert FLOW.duration == 10.0 and FLOW.rte == 0.67
    sized = BatterySpec("b", power_rating=2.5, duration=4.0)
    assert sized.energy_rating == 10.0
    with pytest.raises(ValueError):
        BatterySpec("b", rte=1.2)
    with pytest.raises(ValueError):
        BatterySpec("b", duration=0.0)


def test_pv_spec():
    assert PvSpec().buses == (10, 18, 19, 25, 28, 33)
    with pytest.raises(ValueError):
        PvSpec(penetration=0.0)


def test_h2_spec():
    h2 = H2Spec()
    assert h2.rte == pytest.approx(0.42)
    assert h2.kg_per_mwh_in == pytest.approx(17.391, abs=1e-3)
    assert h2.ez_capex_total == 248.0
    with pytest.raises(ValueError):
        H2Spec(init_frac=1.5)
    with pytest.raises(ValueError):
        H2Spec(e_spec=0.0)
    with pytest.raises(ValueError):
        H2Spec(eta_fc=1.2)


def test_idle_storage_is_unchanged():
    assert soc_transition(3.2, 0.0, 0.0, LI_ION) == 3.2
    assert tank_transition(50.0, 0.0, 0.0, H2Spec()) == 50.0


@given(st.floats(0.01, 100), st.sampled_from([LI_ION, FLOW]))
def test_battery_cycle_returns_rte(amount, spec):
    soc = soc_transition(0.0, amount, 0.0, spec)
    assert soc * spec.eta == pytest.approx(spec.rte * amount, rel=1e-12)


@given(st.floats(0.01, 100))
def test_h2_cycle_returns_chain_efficiency(mwh_in):
    h2 = H2Spec()
    mass = tank_transition(0.0, mwh_in, 0.0, h2)
    assert mass / h2.kg_per_mwh_out == pytest.approx(0.42 * mwh_in, rel=1e-12)
