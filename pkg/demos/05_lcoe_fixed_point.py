# %% [markdown]
# # Re-pricing DGs at their realised capacity factor
#
# A DG's LCOE assumes a reference capacity factor. When storage displaces
# it, its energy gets dearer, which can displace it further. The fixed
# point re-solves until the capacity factors stop moving; a unit that is
# barely used is priced at the cap.

# %%
import numpy as np

from h2dso.assets import DgSpec
from h2dso.network import parse_network
from h2dso.optimizer import case_config, run_case_5b, update_lcoe
from h2dso.profiles import ProfileSet

dg8 = DgSpec("DG8", 2, 0.8, 36.0, 0.88)
for cf in (0.88, 0.44, 0.2, 0.0005):
    print(f"CF {cf:7.4f}: {update_lcoe(dg8, cf):8.2f} $/MWh")

# %% [markdown]
# A two-bus toy: 1 MW of flat load, a cheap and a dear unit, grid import at
# $100/MWh.

# %%
net = parse_network("12.66,10\n1,2,0.01,0.01,1000,0,critical\n")
flat = ProfileSet(load=np.ones(4), pv=np.zeros(4), base_load_mw=1.0, penetration=1.0,
                  seed=None, pv_scale_mw=1.0)
dgs = (DgSpec("A", 2, 0.8, 36.0, 0.88, ramp=0.8, no_load_cost=0.0),
       DgSpec("B", 2, 2.4, 95.0, 0.12, ramp=2.4, no_load_cost=0.0))
run = run_case_5b(case_config("5b", dgs=dgs, pv=None, h2=None, horizon=4), net, flat)
for k, step in enumerate(run.history):
    print(f"iteration {k}: LCOE {np.round(step.lcoe, 2)}  CF {np.round(step.capacity_factor, 3)}")
print("converged:", run.converged)
