# # Exact boundary influence on small lattices
#
# Up to 12 free nodes the invariant measure is computed by power iteration on
# all 2^n configurations. Clamp the boundary to 0, then to 1, and compare the
# centre node's marginal.

# %%
from tban import boundary_influence, build_lattice, symmetric_potentials
from tban.exact_markov import (build_chain, check_conditional_identity, check_projectivity_identities,
                               invariant_measure, tv_distance)

p = symmetric_potentials(w1=1.0, w2=1.0, T=1.0)

# %% [markdown]
# A single node has a closed form: its next state ignores its current one.

# %%
r = boundary_influence(build_lattice(1, 1), p)
print(r.to_dict())
print("p0 + p1 =", r.p0 + r.p1)

# %% [markdown]
# On 3x3 the influence of the boundary fades as temperature rises.

# %%
topo = build_lattice(3, 3)
for T in (0.5, 1.0, 2.0, 4.0):
    sync = boundary_influence(topo, p.with_(T=T), "synchronous")
    asyn = boundary_influence(topo, p.with_(T=T), "asynchronous")
    print(f"T={T:<4} delta sync={sync.delta:.5f} async={asyn.delta:.5f}")

# %% [markdown]
# The invariant measure satisfies the cylinder additivity identities and the
# one-step conditional identity. On the symmetric locus, flipping every state
# maps the 0-boundary measure onto the 1-boundary one.

# %%
small = build_lattice(2, 2)
chain0 = build_chain(small, p, 0)
mu0 = invariant_measure(chain0)
mu1 = invariant_measure(build_chain(small, p, 1))
print("projectivity residual", check_projectivity_identities(mu0))
print("conditional residual ", check_conditional_identity(mu0, chain0))
print("tv(mu0, flip(mu1))   ", tv_distance(mu0, mu1.flipped()))
