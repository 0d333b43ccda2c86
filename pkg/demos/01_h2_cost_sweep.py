# %% [markdown]
# # Hydrogen production cost
#
# The cost model is affine: electricity at the PV LCOE, plus annualised
# electrolyser (and optionally compressor) capex, plus a flat storage charge.
# Here we calibrate its two coefficients on the packaged cost tables and
# then sweep capex against PV LCOE.

# %%
import numpy as np

from h2dso.metrics import CAPEX_SWEEP, LCOE_SWEEP, fit_h2_params, h2_cost
from h2dso.runner import sweep_h2

fit = fit_h2_params(CAPEX_SWEEP, LCOE_SWEEP)
print(f"fitted: {fit.e_spec:.2f} kWh/kg, {fit.capex_rate:.6f} $/kg per $/kW "
      f"(worst misfit {fit.max_residual:.4f} $/kg)")

# %% [markdown]
# One point, broken down.

# %%
b = h2_cost(ez_capex=100, comp_capex=148, pv_lcoe=12)
print(f"energy {b.energy_component:.3f} + capex {b.capex_component:.3f} "
      f"+ storage {b.storage_component:.3f} = {b.total:.3f} $/kg")

# %% [markdown]
# The grid, with and without the compressor. Cells at or under $1/kg are marked.

# %%
capex = [50, 100, 150, 200, 250]
lcoe = np.arange(8, 14)
for comp in (False, True):
    sw = sweep_h2(capex, lcoe, compressor=comp)
    print("\ncompressor" if comp else "\nelectrolyser only")
    print("capex  " + " ".join(f"{l:6.0f}" for l in lcoe))
    for c, row, ok in zip(capex, sw.total, sw.meets_target):
        print(f"{c:5d}  " + " ".join(f"{v:5.2f}{'*' if k else ' '}" for v, k in zip(row, ok)))
