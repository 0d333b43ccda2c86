# %% [markdown]
# # Voltages on the 33-bus feeder
#
# The linearised branch-flow model lives inside the optimiser; an
# independent forward sweep over the same tree recomputes voltages from any
# set of injections. Here: the feeder at peak load, then with 1 MW of
# generation at the far end of the long lateral.

# %%
import numpy as np

from h2dso.network import forward_sweep, ieee33, voltage_dependent_demand

net = ieee33()
print(f"{net.n_bus} buses, {len(net.lines)} lines, "
      f"{net.load_kw.sum():.0f} kW / {net.load_kvar.sum():.0f} kvar")

p = -net.load_kw[None, :] / 1000.0
q = -net.load_kvar[None, :] / 1000.0
base = forward_sweep(net, p, q)
k = int(base.v[0].argmin())
print(f"lowest voltage {base.v[0, k]:.4f} p.u. at bus {net.buses[k].id}")

# %%
p2 = p.copy()
p2[0, net.idx(18)] += 1.0
helped = forward_sweep(net, p2, q)
path = net.path_to(18)
for b in path[::3]:
    i = net.idx(b)
    print(f"bus {b:2d}: {base.v[0, i]:.4f} -> {helped.v[0, i]:.4f}")

# %% [markdown]
# Voltage-sensitive loads draw less when the voltage sags; critical loads
# are constant power.

# %%
d = voltage_dependent_demand(net, base, net.load_kw)
print(f"demand at nominal {net.load_kw.sum():.0f} kW, at swept voltages {d.sum():.0f} kW")
