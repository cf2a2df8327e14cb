import json
import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tban.dynamics import PotentialSet, symmetric_potentials
from tban.errors import ConfigurationError, ConvergenceError, DomainError, SizeCapError
from tban.exact_markov import (Distribution, boundary_influence, build_chain, check_conditional_identity,
                               check_projectivity_identities, cylinder_probability, invariant_measure,
                               tv_distance)
from tban.lattice import build_lattice
from tban.projectivity import Cylinder

SYM = PotentialSet(1.0, 5, -3, 1, 1, -1, 0)


def sigma(E):
    return math.exp(E) / (1 + math.exp(E))


def brute_kernel(width, height, p, beta, mode):
    """Kernel from scratch: states as tuples, neighbours by coordinates."""
    cells = [(r, c) for r in range(height) for c in range(width)]
    n = len(cells)
    u0, u1, u2, u3, u4 = p.reduced
    coeff = {2: u2, 3: u3, 4: u4}

    def prob_on(x, i):
        r, c = cells[i]
        m = 0
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nb = (r + dr, c + dc)
            m += x[cells.index(nb)] if nb in cells else beta
        phi = sum(math.comb(m, s) * coeff[s] for s in range(2, min(p.k - 1, 4) + 1))
        return sigma(u0 + u1 * m + phi)

    states = list(product((0, 1), repeat=n))
    index = {s: sum(b << i for i, b in enumerate(s)) for s in states}
    P = np.zeros((2 ** n, 2 ** n))
    for x in states:
        probs = [prob_on(x, i) for i in range(n)]
        if mode == "synchronous":
            for y in states:
                P[index[x], index[y]] = math.prod(q if b else 1 - q for q, b in zip(probs, y))
        else:
            for i in range(n):
                for b in (0, 1):
                    y = list(x)
                    y[i] = b
                    P[index[x], index[tuple(y)]] += (probs[i] if b else 1 - probs[i]) / n
    return P


def stationary_by_eig(P):
    vals, vecs = np.linalg.eig(P.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    return v / v.sum()


# -- kernel --------------------------------------------------------------------


def test_single_node_rows_identical():
    K = build_chain(build_lattice(1, 1), SYM, 0, "synchronous").kernel
    assert np.array_equal(K[0], K[1])
    assert K[0, 1] == pytest.approx(sigma(-3), abs=1e-15)


@pytest.mark.parametrize("mode", ["synchronous", "asynchronous"])
@pytest.mark.parametrize("beta", [0, 1])
@pytest.mark.parametrize("size", [(2, 1), (2, 2), (3, 2)])
def test_kernel_matches_brute_force(size, beta, mode):
    p = PotentialSet(1.3, 5, -2.1, 0.9, 0.4, -0.2, 0.3)
    chain = build_chain(build_lattice(*size), p, beta, mode)
    np.testing.assert_allclose(chain.kernel, brute_kernel(*size, p, beta, mode), atol=1e-15)
    assert np.abs(chain.kernel.sum(axis=1) - 1).max() < 1e-14


def test_async_rows_are_sparse():
    K = build_chain(build_lattice(2, 1), SYM, 0, "asynchronous").kernel
    assert K.shape == (4, 4)
    assert all(np.count_nonzero(row) <= 3 for row in K)


@pytest.mark.parametrize("mode", ["synchronous", "asynchronous"])
def test_step_equals_kernel_product(mode):
    chain = build_chain(build_lattice(2, 2), SYM, 1, mode)
    mu = np.random.default_rng(0).dirichlet(np.ones(16))
    np.testing.assert_allclose(chain.step(mu), mu @ chain.kernel, atol=1e-15)


# -- invariant measure ---------------------------------------------------------


@pytest.mark.parametrize("beta,expected", [(0, 0.047425873177566635), (1, 0.9525741268224334)])
def test_single_node_closed_form(beta, expected):
    mu = invariant_measure(build_chain(build_lattice(1, 1), SYM, beta))
    assert mu.probabilities[1] == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(sigma(-3 if beta == 0 else 3), abs=1e-15)


@pytest.mark.parametrize("mode", ["synchronous", "asynchronous"])
@pytest.mark.parametrize("size", [(2, 2), (3, 2)])
def test_invariant_measure_matches_eigenvector(size, mode):
    p = PotentialSet(0.8, 4, -2.5, 1.1, 0.3, -0.3, 0.0)
    chain = build_chain(build_lattice(*size), p, 1, mode)
    mu = invariant_measure(chain)
    oracle = stationary_by_eig(brute_kernel(*size, p, 1, mode))
    assert np.abs(mu.probabilities - oracle).max() < 1e-10
    assert np.abs(mu.probabilities @ chain.kernel - mu.probabilities).sum() < 1e-12
    assert mu.probabilities.min() >= 0 and abs(mu.probabilities.sum() - 1) < 1e-12


def test_non_convergence_raises_with_residual():
    chain = build_chain(build_lattice(2, 2), SYM, 0, "asynchronous")
    with pytest.raises(ConvergenceError) as info:
        invariant_measure(chain, max_iter=1)
    assert info.value.residual > 0


# -- cylinders -----------------------------------------------------------------


def test_cylinder_examples():
    topo = build_lattice(2, 1)
    mu = invariant_measure(build_chain(topo, SYM, 1))
    a, b = topo.free_nodes
    assert cylinder_probability(mu, Cylinder(set(), set())) == pytest.approx(1.0, abs=1e-15)
    for node in (a, b):
        total = cylinder_probability(mu, Cylinder({node}, set())) + cylinder_probability(mu, Cylinder(set(), {node}))
        assert total == pytest.approx(1.0, abs=1e-15)
    # a active, b inactive: bit 0 set, bit 1 clear
    assert cylinder_probability(mu, Cylinder({a}, {b})) == mu.probabilities[0b01]
    with pytest.raises(DomainError):
        cylinder_probability(mu, Cylinder({a}, {a}))


def test_projectivity_identities():
    topo = build_lattice(2, 2)
    uniform = Distribution(np.full(16, 1 / 16), topo)
    assert check_projectivity_identities(uniform) == 0.0
    mu = invariant_measure(build_chain(topo, SYM, 0, "asynchronous"))
    assert check_projectivity_identities(mu) < 1e-12
    corrupted = Distribution(mu.probabilities * 1.5, topo)
    assert check_projectivity_identities(corrupted) > 0.1


def explicit_conditional_rhs(mu, chain, i):
    """Sum over complete cylinders [A, B] on the other nodes, Phi from the kernel's own activation."""
    n = chain.n
    others = [j for j in range(n) if j != i]
    total = 0.0
    for bits in product((0, 1), repeat=n - 1):
        A = {mu.topology.free_nodes[j] for j, b in zip(others, bits) if b}
        B = {mu.topology.free_nodes[j] for j, b in zip(others, bits) if not b}
        state = sum(1 << j for j, b in zip(others, bits) if b)
        total += chain.activation[state, i] * cylinder_probability(mu, Cylinder(A, B))
    return total


@pytest.mark.parametrize("mode", ["synchronous", "asynchronous"])
def test_conditional_identity(mode):
    one = build_chain(build_lattice(1, 1), SYM, 1, mode)
    assert check_conditional_identity(invariant_measure(one), one) == 0.0

    chain = build_chain(build_lattice(2, 2), SYM, 0, mode)
    mu = invariant_measure(chain)
    assert check_conditional_identity(mu, chain) < 1e-10
    for i in range(chain.n):
        lhs = mu.marginal(mu.topology.free_nodes[i])
        assert abs(lhs - explicit_conditional_rhs(mu, chain, i)) < 1e-10


def test_conditional_identity_flags_non_invariant_measure():
    topo = build_lattice(2, 2)
    chain = build_chain(topo, PotentialSet(1.0, 2, -1, 1), 1)
    uniform = Distribution(np.full(16, 1 / 16), topo)
    assert check_conditional_identity(uniform, chain) > 0.1


# -- boundary influence ----------------------------------------------------------


def test_single_node_influence_closed_form():
    r = boundary_influence(build_lattice(1, 1), SYM)
    assert r.delta == pytest.approx(sigma(3) - sigma(-3), abs=1e-15)
    assert r.delta == pytest.approx(math.tanh(1.5), abs=1e-15)
    assert r.p0 + r.p1 == 1.0
    assert json.loads(json.dumps(r.to_dict())).keys() == {"p0", "p1", "delta", "tv_distance", "n_free", "mode", "T"}


@pytest.mark.parametrize("T", [0.3, 1.0, 2.5, 7.0])
def test_single_node_pairing_at_every_temperature(T):
    r = boundary_influence(build_lattice(1, 1), SYM.with_(T=T))
    assert r.p0 + r.p1 == 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 16), st.integers(-8, 16), st.floats(0.05, 50))
def test_single_node_pairing_is_bitwise_for_representable_weights(w1_q, w2_q, T):
    # quarter-integer weights keep the symmetry residual exactly zero in floats
    p = symmetric_potentials(w1_q / 4, w2_q / 4, T)
    r = boundary_influence(build_lattice(1, 1), p)
    assert r.p0 + r.p1 == 1.0


def test_high_temperature_kills_influence():
    deltas = [boundary_influence(build_lattice(1, 1), SYM.with_(T=T)).delta for T in (1, 10, 100, 1e4)]
    assert deltas == sorted(deltas, reverse=True)
    assert deltas[-1] < 1e-3


def test_three_by_three_influence_falls_with_temperature():
    topo = build_lattice(3, 3)
    hot = boundary_influence(topo, SYM.with_(T=4.0))
    cold = boundary_influence(topo, SYM.with_(T=0.5))
    assert cold.delta > hot.delta > 0


@pytest.mark.parametrize("mode", ["synchronous", "asynchronous"])
def test_global_flip_symmetry(mode):
    topo = build_lattice(2, 2)
    mu0 = invariant_measure(build_chain(topo, SYM, 0, mode))
    mu1 = invariant_measure(build_chain(topo, SYM, 1, mode))
    assert tv_distance(mu0, mu1.flipped()) < 1e-10
    assert tv_distance(mu0, mu1) > 0.1


def test_influence_nonnegative_for_attractive_sets():
    rng = np.random.default_rng(4)
    for _ in range(20):
        w1 = rng.uniform(0.2, 2)
        p = symmetric_potentials(w1, rng.uniform(0, 2), rng.uniform(0.3, 3))
        for size in ((1, 1), (2, 2), (3, 1)):
            r = boundary_influence(build_lattice(*size), p, rng.choice(["synchronous", "asynchronous"]))
            assert r.delta >= 0 and 0 <= r.tv_distance <= 1


# -- errors ----------------------------------------------------------------------


def test_size_cap():
    with pytest.raises(SizeCapError, match="12"):
        build_chain(build_lattice(13, 1), SYM)
    build_chain(build_lattice(4, 3), SYM)


def test_bad_mode_and_boundary():
    with pytest.raises(ConfigurationError):
        build_chain(build_lattice(1, 1), SYM, 0, "parallel")
    with pytest.raises(ConfigurationError):
        build_chain(build_lattice(1, 1), SYM, 2)
    with pytest.raises(ConfigurationError):
        PotentialSet(-1.0, 5, -3, 1)
