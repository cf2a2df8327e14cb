"""Exact invariant measures on small clamped lattices.

State ``s`` in ``[0, 2**n)`` encodes the free nodes: bit ``i`` is the state of
free node ``i`` in lexical order. Boundary nodes are clamped to ``beta``.

Two update schemes define the chain:

* ``"synchronous"``: every free node is resampled at once from its local
  law, so ``P(x -> y)`` is a product of n logistic factors.
* ``"asynchronous"``: one free node, picked uniformly, is resampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .dynamics import PotentialSet, probability_table
from .errors import ConfigurationError, ConvergenceError, SizeCapError
from .lattice import NetworkTopology
from .projectivity import Cylinder

MAX_EXACT_NODES = 12
MODES = ("synchronous", "asynchronous")


@dataclass(frozen=True)
class ChainSpec:
    topology: NetworkTopology
    potentials: PotentialSet
    beta: int = 0
    mode: str = "synchronous"

    @property
    def n(self) -> int:
        return self.topology.n_free

    @cached_property
    def states(self) -> np.ndarray:
        return np.arange(1 << self.n, dtype=np.int64)

    @cached_property
    def bits(self) -> np.ndarray:
        """``(2**n, n)`` bool matrix of node states per configuration."""
        return ((self.states[:, None] >> np.arange(self.n)) & 1).astype(bool)

    @cached_property
    def active_counts(self) -> np.ndarray:
        """``(2**n, n)`` number of active strict neighbours of each node in each state."""
        nbr = self.topology.neighbour_table
        counts = self.beta * self.topology.boundary_degree[None, :].repeat(len(self.states), axis=0)
        for slot in range(nbr.shape[1]):
            j = nbr[:, slot]
            free = j >= 0
            counts[:, free] += self.bits[:, j[free]]
        return counts

    @cached_property
    def activation(self) -> np.ndarray:
        """``(2**n, n)`` probability that node i is active after an update from state s."""
        return probability_table(self.potentials)[self.active_counts]

    @cached_property
    def kernel(self) -> np.ndarray:
        """Dense transition matrix (rows: current state). Used for the synchronous
        scheme and for cross-checks; the asynchronous scheme is applied matrix-free."""
        if self.mode == "synchronous":
            K = np.ones((len(self.states), len(self.states)))
            for i in range(self.n):
                p = self.activation[:, i][:, None]
                K *= np.where(self.bits[None, :, i], p, 1.0 - p)
            return K
        K = np.zeros((len(self.states), len(self.states)))
        rows = self.states
        for i in range(self.n):
            p = self.activation[:, i]
            on, off = rows | (1 << i), rows & ~(1 << i)
            np.add.at(K, (rows, on), p / self.n)
            np.add.at(K, (rows, off), (1.0 - p) / self.n)
        return K

    def step(self, mu: np.ndarray) -> np.ndarray:
        """One application ``mu -> mu P``."""
        if self.mode == "synchronous":
            return mu @ self.kernel
        out = np.zeros_like(mu)
        for i in range(self.n):
            bit = self.bits[:, i]
            p = self.activation[:, i]  # independent of node i's own state
            out += (mu + mu[self.states ^ (1 << i)]) * np.where(bit, p, 1.0 - p)
        return out / self.n


def build_chain(topology: NetworkTopology, p: PotentialSet, beta: int = 0,
                mode: str = "synchronous") -> ChainSpec:
    if topology.n_free > MAX_EXACT_NODES:
        raise SizeCapError(
            f"exact analysis is capped at {MAX_EXACT_NODES} free nodes; lattice has {topology.n_free}"
        )
    if beta not in (0, 1):
        raise ConfigurationError(f"boundary value must be 0 or 1, got {beta!r}")
    if mode not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
    if not p.T > 0:
        raise ConfigurationError("temperature must be positive")
    return ChainSpec(topology, p, int(beta), mode)


@dataclass(frozen=True)
class Distribution:
    probabilities: np.ndarray
    topology: NetworkTopology

    @property
    def n(self) -> int:
        return self.topology.n_free

    def marginal(self, node) -> float:
        """Probability that a free node is active."""
        i = self.topology.node_index(node)
        return float(self.probabilities[(np.arange(len(self.probabilities)) >> i) & 1 == 1].sum())

    def flipped(self) -> "Distribution":
        """Law of the complemented configuration (every bit inverted)."""
        return Distribution(self.probabilities[::-1].copy(), self.topology)


def invariant_measure(chain: ChainSpec, tol: float = 1e-12, max_iter: int = 200_000) -> Distribution:
    """Power iteration from the uniform law until ``||mu P - mu||_1 < tol``."""
    mu = np.full(1 << chain.n, 1.0 / (1 << chain.n))
    residual = np.inf
    for _ in range(max_iter):
        nxt = chain.step(mu)
        nxt /= nxt.sum()
        residual = np.abs(nxt - mu).sum()
        mu = nxt
        if residual < tol:
            return Distribution(mu, chain.topology)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (last residual {residual:.3e})", residual
    )


def tv_distance(a: Distribution, b: Distribution) -> float:
    return 0.5 * float(np.abs(a.probabilities - b.probabilities).sum())


# ---------------------------------------------------------------------------
# Cylinders and identities
# ---------------------------------------------------------------------------


def _masks(topology: NetworkTopology, cyl: Cylinder):
    a = sum(1 << topology.node_index(v) for v in cyl.A)
    b = sum(1 << topology.node_index(v) for v in cyl.B)
    return a, b


def cylinder_probability(mu: Distribution, cyl: Cylinder) -> float:
    """Total mass of the states with ones on A and zeros on B."""
    if not isinstance(cyl, Cylinder):
        cyl = Cylinder(*cyl)
    a, b = _masks(mu.topology, cyl)
    s = np.arange(len(mu.probabilities))
    return float(mu.probabilities[((s & a) == a) & ((s & b) == 0)].sum())


def check_projectivity_identities(mu: Distribution) -> float:
    """Largest residual of ``mu[A,B] + mu[A-i, B+i] - mu[A-i, B]`` over all cylinders.

    Each cylinder probability is summed directly from the state vector. The
    root identity ``mu[{},{}] = 1`` is included, so an unnormalised vector is
    flagged. Cost is O(3^n 2^n); meant for n up to about 8.
    """
    n = mu.n
    probs = mu.probabilities
    s = np.arange(len(probs))
    table = {}
    for digits in product((0, 1, 2), repeat=n):  # 1: in A, 0: in B, 2: free
        a = sum(1 << i for i, d in enumerate(digits) if d == 1)
        b = sum(1 << i for i, d in enumerate(digits) if d == 0)
        table[(a, b)] = probs[((s & a) == a) & ((s & b) == 0)].sum()
    worst = abs(table[(0, 0)] - 1.0)
    for (a, b), value in table.items():
        for i in range(n):
            if a >> i & 1:
                a_minus = a & ~(1 << i)
                res = value + table[(a_minus, b | (1 << i))] - table[(a_minus, b)]
                worst = max(worst, abs(res))
    return float(worst)


def check_conditional_identity(mu: Distribution, chain: ChainSpec) -> float:
    """Max over free nodes of ``|mu(x_i = 1) - sum_{A,B} Phi_i(A,B) mu([A,B])|``.

    The sum runs over the complete cylinders on the other free nodes; ``Phi_i``
    sees the clamped boundary at ``beta``.
    """
    probs = mu.probabilities
    worst = 0.0
    for i in range(chain.n):
        bit = chain.bits[:, i]
        lhs = probs[bit].sum()
        rest = chain.states[~bit]
        # complete cylinder on the other nodes = the two states differing only at i
        cyl = probs[rest] + probs[rest | (1 << i)]
        rhs = (chain.activation[rest, i] * cyl).sum()
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


# ---------------------------------------------------------------------------
# Boundary influence
# ---------------------------------------------------------------------------


@dataclass
class InfluenceResult:
    p0: float
    p1: float
    delta: float
    tv_distance: float
    n_free: int
    mode: str
    T: float

    def to_dict(self) -> dict:
        return {"p0": self.p0, "p1": self.p1, "delta": self.delta, "tv_distance": self.tv_distance,
                "n_free": self.n_free, "mode": self.mode, "T": self.T}


def boundary_influence(topology: NetworkTopology, p: PotentialSet, mode: str = "synchronous",
                       tol: float = 1e-12, max_iter: int = 200_000) -> InfluenceResult:
    """Centre-node activation under the all-0 and all-1 clamped boundaries."""
    mu0 = invariant_measure(build_chain(topology, p, 0, mode), tol, max_iter)
    mu1 = invariant_measure(build_chain(topology, p, 1, mode), tol, max_iter)
    centre = topology.centre_node
    p0, p1 = mu0.marginal(centre), mu1.marginal(centre)
    return InfluenceResult(p0, p1, p1 - p0, tv_distance(mu0, mu1), topology.n_free, mode, p.T)

