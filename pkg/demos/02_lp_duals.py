# %% [markdown]
# # Linear programs, duals and commitment
#
# The package carries its own bounded simplex. A tiny two-generator dispatch
# shows what the duals mean: the price on the balance row is the cost of
# serving one more MWh.

# %%
from h2dso.lpcore import INF, Problem, certificate, dual_of, dump_lp, solve_lp, solve_milp

p = Problem("dispatch")
cheap = p.add_var(0, 0.8, name="cheap")
dear = p.add_var(0, 2.4, name="dear")
grid = p.add_var(0, INF, name="grid")
p.add_constraint([(cheap, 1), (dear, 1), (grid, 1)], "=", 1.5, "balance")
p.set_objective([(cheap, 36.0), (dear, 95.0), (grid, 100.0)])
print(dump_lp(p))

sol = solve_lp(p)
print("dispatch:", sol.value([cheap, dear, grid]))
print("price on balance:", dual_of(sol, "balance"))   # the dear unit is marginal
print("certificate:", certificate(p, sol))

# %% [markdown]
# Past the dear unit's rating, import sets the price.

# %%
p.set_bounds(dear, 0, 0.5)
print("price with dear unit derated:", dual_of(solve_lp(p), "balance"))

# %% [markdown]
# Give each unit an on/off decision with a minimum output and a no-load
# cost, and solve by branch and bound. Duals come from the LP with the
# binaries fixed at their optimal values.

# %%
q = Problem("commit")
on = [q.add_var(kind="binary") for _ in range(2)]
x = [q.add_var(0, 0.8), q.add_var(0, 2.4)]
for xi, ui, cap in zip(x, on, (0.8, 2.4)):
    q.add_constraint([(xi, 1), (ui, -cap)], "<=", 0)
    q.add_constraint([(xi, 1), (ui, -0.3 * cap)], ">=", 0)
q.add_constraint([(x[0], 1), (x[1], 1)], "=", 1.0, "balance")
q.set_objective([(x[0], 36.0), (x[1], 95.0), (on[0], 10.0), (on[1], 40.0)])
m = solve_milp(q, gap_tol=0.0)
print("on:", m.value(on), "output:", m.value(x), "cost:", m.objective_value,
      "nodes:", m.nodes, "restricted duals:", m.restricted_duals)
