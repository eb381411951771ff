# %% [markdown]
# # Screening weakly reversible networks cycle by cycle
#
# Each simple cycle `C` contributes a matrix `A_C` on its own subspace `S_C`.
# If some `A_C` is not D-semistable, pushing the other cycles' rates to zero
# produces an unstable equilibrium of the whole network.

# %%
import numpy as np

from gmas_stab.analysis import analyze_weakly_reversible
from gmas_stab.catalog import reversible_chain, s_system
from gmas_stab.dynamics import epsilon_family
from gmas_stab.network import enumerate_cycles

# %% [markdown]
# ## A reversible chain
#
# Along the edge `c2 <-> c3` the stoichiometry of `X` goes up while its
# kinetic order goes down.

# %%
Y = [[0, 1, 2, 3], [0, 0, 1, 1]]
Yt = [[0, 1, 0, 1], [0, 0, 1, 1]]
chain = reversible_chain(Y, Yt, ("X", "Y"))
out = analyze_weakly_reversible(chain)
for e in out["cycles"]:
    v = e["D_semistable"]
    print(" <-> ".join(e["vertices"][:2]), v["status"], v["method"], v["clauses"].get("violated", ""))
print(out["conclusion"])

# %%
for e in (c for c in out["cycles"] if c.get("witness")):
    w = e["witness"]
    print("eps =", w["eps"], " x* =", np.round(w["x_star"], 4), " eigenvalue =", w["eigenvalue"])

# %% [markdown]
# ## How fast does the perturbed Jacobian approach the cycle limit?
#
# The rates are affine in `eps`, so the error shrinks by a factor of ten per decade.

# %%
cycles = enumerate_cycles(chain)
x = np.array([0.8, 1.3])
for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    m = epsilon_family(chain, cycles[1], x, eps, cycles)
    print(f"eps={eps:.0e}  |J - limit| = {m.error:.3e}  balanced={m.balanced}")

# %% [markdown]
# ## S-systems
#
# Pairs `0 <-> X_i`. A diagonal kinetic order that is larger on the
# production side than on the degradation side breaks the screen.

# %%
H = [[0.5, 0.0], [0.0, 1.0]]
for G in ([[1.5, -0.5], [1.0, 0.0]], [[-0.5, -0.5], [1.0, 0.0]]):
    res = analyze_weakly_reversible(s_system(G, H))
    print("G =", G, "->", res["conclusion"])
