# %% [markdown]
# # The irreversible four-cycle
#
# `0 -> X -> Y -> Z -> 0` with kinetic orders `gZ`, `X`, `aX + Y`, `bY + Z`.
# At unit rates and `x = 1` the Jacobian is a 3x3 matrix depending on
# `(a, b, g)`. Whether every complex-balanced equilibrium is stable for
# every choice of rates comes down to D-stability of that matrix.

# %%
import numpy as np

from gmas_stab.analysis import analyze_cycle_network
from gmas_stab.catalog import FOUR_CYCLE_ROWS, four_cycle, four_cycle_matrix
from gmas_stab.dynamics import integrate, jacobian
from gmas_stab.linalg import is_P0plus_matrix
from gmas_stab.stability import is_D_stable, is_diagonally_stable, is_stable

np.set_printoptions(precision=4, suppress=True)

# %% [markdown]
# ## Five parameter settings

# %%
for row, label in FOUR_CYCLE_ROWS.items():
    A = four_cycle_matrix(*row)
    st, dv, gv = is_stable(A), is_D_stable(A), is_diagonally_stable(A)
    print(f"{str(row):12} stable={st.status.value:6} P0+={is_P0plus_matrix(A)!s:5} "
          f"D={dv.status.value:6} diag={gv.status.value:6}  expected: {label}")

# %% [markdown]
# The closed-form matrix agrees with the Jacobian of the network at `x = 1`.

# %%
net = four_cycle(3, 4, -4)
print(jacobian(net, np.ones(4), np.ones(3)))
print(four_cycle_matrix(3, 4, -4))

# %% [markdown]
# ## A concrete unstable equilibrium
#
# `(3, 4, -4)` is stable at unit rates but not D-stable. The analysis turns
# the destabilizing scaling `D` into rates `k` and an equilibrium `x* = 1/D`.

# %%
out = analyze_cycle_network(net)
w = out["witness"]
k, x_star = np.array(w["k"]), np.array(w["x_star"])
print("x* =", x_star)
print("k  =", k)
print("leading eigenvalue:", complex(*w["eigenvalue"]))

# %% [markdown]
# Start a hair away from `x*` and watch the deviation grow.

# %%
rng = np.random.default_rng(0)
u = rng.standard_normal(3)
x0 = x_star + 1e-3 * np.linalg.norm(x_star) * u / np.linalg.norm(u)
traj = integrate(net, k, x0, 10.0)
dev = np.linalg.norm(traj.x - x_star, axis=1)
for t in (0.0, 1.0, 2.0, 4.0, 8.0):
    i = np.searchsorted(traj.t, t)
    print(f"t={traj.t[min(i, len(dev) - 1)]:6.2f}  |x - x*| = {dev[min(i, len(dev) - 1)]:.3e}")

# %% [markdown]
# For `(0, 0, 0)` the same experiment relaxes back.

# %%
stable = four_cycle(0, 0, 0)
traj = integrate(stable, np.ones(4), np.array([1.01, 0.99, 1.0]), 40.0)
print("final distance:", np.linalg.norm(traj.x[-1] - 1.0))
