# %% [markdown]
# # Sign vectors and uniqueness
#
# Complex-balanced equilibria are unique in every stoichiometric class when
# no nonzero sign pattern is shared by `S` and the orthogonal complement of
# the kinetic subspace. A shared pattern gives rates and an equilibrium
# where the Jacobian has a kernel vector inside `S`.

# %%
import numpy as np

from gmas_stab.analysis import uniqueness_check
from gmas_stab.catalog import overlap_nonunique, xy_unique
from gmas_stab.dynamics import jacobian
from gmas_stab.linalg import orthogonal_complement, sign_vectors_intersect
from gmas_stab.network import kinetic_subspace, stoichiometric_subspace

# %%
for net in (xy_unique(), overlap_nonunique()):
    S = stoichiometric_subspace(net)
    Sp = orthogonal_complement(kinetic_subspace(net))
    print(net.species, "S basis:", S.basis.ravel().round(4), " complement basis:", Sp.basis.ravel().round(4))
    print("  shared sign vector:", sign_vectors_intersect(Sp, S) is not None)

# %% [markdown]
# For `0 (0) <-> X + Y (X - Y)` the two subspaces coincide.

# %%
net = overlap_nonunique()
res = uniqueness_check(net)
print("u =", res.u, " v =", res.v)
print("x* =", res.x_star, " k =", res.k)
J = jacobian(net, res.k, res.x_star)
print("J v =", J @ res.v, " bound:", res.bound)

# %% [markdown]
# With these rates the equilibria are the points where `x / y = k1 / k2 = 1`.
# That diagonal lies inside the single class `x - y = 0`, so this class holds
# a whole line of complex-balanced equilibria.

# %%
from gmas_stab.dynamics import rhs

for t in (0.5, 1.0, 2.0):
    x = np.array([t, t])
    print(x, "rhs =", rhs(net, res.k, x))
