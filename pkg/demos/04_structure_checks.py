# # Structural hypotheses on arbitrary weights
#
# Uniform lattice weights are isotropic, translation invariant, symmetric and
# attractive. Break each property in turn and see which checks notice.

# %%
from tban.lattice import NodeId, build_lattice, centre, lattice_digraph, uniform_weights, validate_structure

topo = build_lattice(5, 5)
print(len(topo.free_nodes), "free nodes,", len(topo.boundary_nodes), "clamped boundary nodes")
print("centre:", centre(lattice_digraph(topo, clamped=False)))

# %%
weights = uniform_weights(topo, w0=-3.0, w1=1.0)
print(validate_structure(weights, topo).to_dict())

# %% [markdown]
# One stronger arc breaks isotropy, translation invariance and symmetry.

# %%
weights[(NodeId(2, 2), NodeId(1, 2))] = 1.5
report = validate_structure(weights, topo)
print(sorted(report.failed()))
for pair, reason in report.violations:
    print(pair, reason)

# %% [markdown]
# Inhibitory couplings keep the lattice regular but are not attractive.

# %%
print(sorted(validate_structure(uniform_weights(topo, -3.0, -1.0), topo).failed()))
