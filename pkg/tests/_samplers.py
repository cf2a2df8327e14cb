"""Random potential sets shared by the property and acceptance tests.

Generic sets keep reduced couplings of order one. With u1 near zero the
alternating sum shrinks like u1**4 and lands between the absolute and the
scaled nullity tolerances, which says nothing about either predicate.
"""

import numpy as np

from tban.dynamics import PotentialSet, symmetric_potentials


def generic_potentials(rng: np.random.Generator) -> PotentialSet:
    T = rng.uniform(0.25, 2.0)
    k = int(rng.integers(2, 6))
    w1 = rng.uniform(0.5, 2.0)
    w0 = rng.uniform(-4.0 * w1, 0.0)
    w2, w3, w4 = rng.uniform(-1.0, 1.0, 3)
    return PotentialSet(T, k, w0, w1, w2, w3, w4)


def symmetric_draw(rng: np.random.Generator) -> PotentialSet:
    # attractive: w1 > 0 and w0 = -2 w1 - w2 < 0
    w1 = rng.uniform(0.2, 2.0)
    w2 = rng.uniform(-w1, 2.0)
    return symmetric_potentials(w1, w2, rng.uniform(0.25, 4.0), int(rng.integers(4, 6)))


def mixed_potentials(rng: np.random.Generator, n: int):
    return [symmetric_draw(rng) if i % 2 else generic_potentials(rng) for i in range(n)]
