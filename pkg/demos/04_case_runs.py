# %% [markdown]
# # Case studies over two days
#
# Each case adds assets to the feeder: PV, a battery, hydrogen storage. The
# optimiser sizes the storage and schedules everything hour by hour; the
# metrics then report green share, curtailment and nodal prices. A 48 h
# window keeps this quick; the CLI runs the full two weeks. Capital is
# charged per hour of the year, so the short window carries its own share.

# %%
import numpy as np

from h2dso.assets import FinParams
from h2dso.metrics import case_report
from h2dso.network import ieee33
from h2dso.optimizer import case_config, run_case
from h2dso.profiles import gen_profiles

net = ieee33()
fin = FinParams(horizon_fraction=48 / 8760)
print("case  green%  curtailed%  $/MWh   battery MW  electrolyser MW  tank kg")
for cid in ("1", "2", "3", "5a", "6a", "6b", "7b"):
    cfg = case_config(cid, horizon=48, fin=fin)
    prof = gen_profiles(0, cfg.pv.penetration if cfg.pv else 1.2)
    rep = case_report(run_case(cfg, net, prof), net)
    sz = rep.sizing
    print(f"{cid:>4}  {rep.green_fraction:6.1f}  {rep.pv_curtailed_pct:10.1f}  {rep.dlmp_mean:6.1f}"
          f"  {sz['battery_power_mw']:10.2f}  {sz['electrolyzer_mw']:15.2f}  {sz['tank_kg']:7.0f}")

# %% [markdown]
# With the full network model the balance holds at every bus, so prices
# can differ along the feeder when a voltage limit binds.

# %%
run = run_case(case_config("2", network_mode="full", horizon=24), net, gen_profiles(0, 1.2))
rep = case_report(run, net)

prices = np.array(rep.dlmp_by_bus)
spread = prices.max(axis=1) - prices.min(axis=1)
h = int(spread.argmax())
print(f"widest nodal spread {spread[h]:.2f} $/MWh at hour {h}; "
      f"voltages {run.schedule.voltages.min():.4f}..{run.schedule.voltages.max():.4f} p.u.")
