# # Where does the projectivity matrix go singular?
#
# The 16x16 matrix built from a potential set is singular exactly when the
# alternating sum of the conditional activation probabilities vanishes. This
# script walks along w0 at fixed couplings and shows the zero crossing.

# %%
import numpy as np

from tban import PotentialSet, phase_transition_report, symmetric_potentials
from tban.projectivity import alternating_sum, build_projectivity_matrix, determinant

# %% [markdown]
# Start from the symmetric point: w1 = 1, w2 = 1, w3 = -1, w4 = 0 forces w0 = -3.

# %%
p = symmetric_potentials(w1=1.0, w2=1.0, T=1.0)
print(p)
print(phase_transition_report(p).to_dict())

# %% [markdown]
# Scan w0. The determinant tracks the negated alternating sum, so both cross
# zero together, and only at w0 = -3.

# %%
for w0 in np.linspace(-4, -2, 9):
    q = p.with_(w0=float(w0))
    det, scale = determinant(build_projectivity_matrix(q))
    print(f"w0={w0:+.2f}  det={det:+.3e}  alt_sum={alternating_sum(q):+.3e}  singular={abs(det) < 1e-9 * scale}")

# %% [markdown]
# Temperature rescales every reduced potential by the same factor, so the
# singular locus does not move with T.

# %%
for T in (0.25, 1.0, 4.0):
    print(T, alternating_sum(p.with_(T=T)))

# %% [markdown]
# The linear case (k = 2) has the locus u0 = -2 u1.

# %%
print(alternating_sum(PotentialSet.from_reduced(-2.0, 1.0, k=2)))
print(alternating_sum(PotentialSet.from_reduced(-1.0, 1.0, k=2)))
