"""Potentials, the coalition (nonlinear) term and the local update rules.

Weights are isotropic: one scalar per interaction order. ``w0`` is the
auto-interaction (it plays the threshold role), ``w1`` the couple weight,
``w2``, ``w3``, ``w4`` the weights of active pairs, triples and quadruples of
strict neighbours. Reduced potentials are ``u = w / T``.

Coalitions are subsets of the strict neighbourhood only, so the local field of
a node depends on the number ``m`` of its active strict neighbours and nothing
else. Most of the package works from the five-entry table ``E(m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Tuple, Union

import numpy as np

from .errors import ConfigurationError, DomainError
from .lattice import NetworkTopology, NodeId

ActiveSet = Union[int, Iterable]

NEIGHBOURHOOD_SIZE = 4
FULL_MASK = (1 << NEIGHBOURHOOD_SIZE) - 1


@dataclass(frozen=True)
class PotentialSet:
    T: float
    k: int
    w0: float
    w1: float
    w2: float = 0.0
    w3: float = 0.0
    w4: float = 0.0

    def __post_init__(self):
        for name in ("T", "w0", "w1", "w2", "w3", "w4"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ConfigurationError(f"potential {name} must be a finite number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not self.T > 0:
            raise ConfigurationError(f"temperature T must be > 0, got {self.T!r}")
        if isinstance(self.k, bool) or int(self.k) != self.k or not 2 <= self.k <= 5:
            raise ConfigurationError(f"order k must be an integer in [2, 5], got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def from_reduced(cls, u0, u1, u2=0.0, u3=0.0, u4=0.0, k=5, T=1.0) -> "PotentialSet":
        return cls(T, k, u0 * T, u1 * T, u2 * T, u3 * T, u4 * T)

    @property
    def weights(self) -> Tuple[float, float, float, float, float]:
        return (self.w0, self.w1, self.w2, self.w3, self.w4)

    @property
    def reduced(self) -> Tuple[float, float, float, float, float]:
        return tuple(w / self.T for w in self.weights)

    u0 = property(lambda self: self.w0 / self.T)
    u1 = property(lambda self: self.w1 / self.T)
    u2 = property(lambda self: self.w2 / self.T)
    u3 = property(lambda self: self.w3 / self.T)
    u4 = property(lambda self: self.w4 / self.T)

    @property
    def attractive(self) -> bool:
        return self.w0 < 0 and self.w1 > 0

    def with_(self, **changes) -> "PotentialSet":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {"T": self.T, "k": self.k, "w0": self.w0, "w1": self.w1,
                "w2": self.w2, "w3": self.w3, "w4": self.w4}


def _size(K: ActiveSet) -> int:
    if isinstance(K, (int, np.integer)):
        if not 0 <= K <= FULL_MASK:
            raise DomainError(f"active-set mask {K} is not a subset of the 4-node strict neighbourhood")
        return int(K).bit_count()
    members = set(K)
    if len(members) > NEIGHBOURHOOD_SIZE:
        raise DomainError(f"active set has {len(members)} members; the strict neighbourhood has 4")
    return len(members)


def coalition_sum(m: int, c2: float, c3: float, c4: float, k: int) -> float:
    """Sum of coalition weights over all subsets of size 2..min(k-1, 4) of m active nodes."""
    coeffs = (c2, c3, c4)
    return sum(math.comb(m, s) * coeffs[s - 2] for s in range(2, min(k - 1, 4) + 1))


def coalition_term(K: ActiveSet, p: PotentialSet, reduced: bool = True) -> float:
    """Nonlinear term phi^k(K) for an active set K of strict neighbours.

    ``K`` is a 4-bit mask or a collection of neighbour labels. With
    ``reduced=False`` the raw weights are used instead of ``w / T``.
    """
    _, _, c2, c3, c4 = p.reduced if reduced else p.weights
    return coalition_sum(_size(K), c2, c3, c4, p.k)


def exponent(m: int, p: PotentialSet) -> float:
    """Local field ``u0 + u1*m + phi(m)`` of a node with m active strict neighbours.

    Evaluated as an even plus an odd part under ``m -> 4 - m``, in raw
    weights, then divided by T once. The odd part negates bitwise, so a set
    whose even part is exactly zero gives ``exponent(4 - m) == -exponent(m)``
    at every temperature.
    """
    w0, w1, w2, w3, w4 = p.weights
    phi, phi_c = (coalition_sum(j, w2, w3, w4, p.k) for j in (m, NEIGHBOURHOOD_SIZE - m))
    even = (w0 + 2 * w1) + (phi + phi_c) / 2
    odd = w1 * (m - 2) + (phi - phi_c) / 2
    return (even + odd) / p.T


def exponent_table(p: PotentialSet) -> np.ndarray:
    return np.array([exponent(m, p) for m in range(NEIGHBOURHOOD_SIZE + 1)])


def logistic(E):
    """``e^E / (1 + e^E)``, overflow-free.

    The negative branch is the exact complement of the positive one, so
    ``logistic(E) + logistic(-E) == 1`` holds bitwise.
    """
    E = np.asarray(E, dtype=float)
    s = 1.0 / (1.0 + np.exp(-np.abs(E)))
    out = np.where(E >= 0, s, 1.0 - s)
    return float(out) if out.ndim == 0 else out


def probability_table(p: PotentialSet) -> np.ndarray:
    """P(x_i(t+1) = 1) as a function of the active-neighbour count m = 0..4."""
    return logistic(exponent_table(p))


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Configuration:
    """States of the free nodes plus the clamped boundary value ``beta``."""

    topology: NetworkTopology
    states: Tuple[int, ...]
    beta: int = 0

    def __post_init__(self):
        states = tuple(int(s) for s in self.states)
        if len(states) != self.topology.n_free:
            raise DomainError(f"configuration has {len(states)} states for {self.topology.n_free} free nodes")
        if any(s not in (0, 1) for s in states) or self.beta not in (0, 1):
            raise DomainError("states and boundary value must be 0 or 1")
        object.__setattr__(self, "states", states)

    @classmethod
    def from_mask(cls, topology: NetworkTopology, mask: int, beta: int = 0) -> "Configuration":
        return cls(topology, tuple((mask >> i) & 1 for i in range(topology.n_free)), beta)

    @property
    def mask(self) -> int:
        return sum(s << i for i, s in enumerate(self.states))

    def value(self, node) -> int:
        """State of a free node, or ``beta`` for a boundary node."""
        idx = self.topology.index.get(NodeId(*node))
        return self.beta if idx is None else self.states[idx]

    def active_neighbours(self, node) -> int:
        return sum(self.value(j) for j in self.topology.strict_neighbourhood(node))


def local_exponent(i, x: Configuration, p: PotentialSet) -> float:
    return exponent(x.active_neighbours(i), p)


def activation_probability(i, x: Configuration, p: PotentialSet) -> float:
    return logistic(local_exponent(i, x, p))


def deterministic_update(x: Configuration, weights: Mapping, thresholds=0.0) -> Configuration:
    """Synchronous threshold step ``x_i <- H(sum_{j in N_i} w_ij x_j - theta_i)``.

    ``H(v) = 0`` for ``v <= 0``. The sum runs over the full neighbourhood, so the
    self weight multiplies the node's current state; boundary nodes contribute
    ``beta``. ``thresholds`` is a scalar or a per-free-node sequence.
    """
    topo = x.topology
    theta = np.broadcast_to(np.asarray(thresholds, dtype=float), (topo.n_free,))
    new = []
    for idx, node in enumerate(topo.free_nodes):
        potential = sum(weights.get((node, j), 0.0) * x.value(j) for j in topo.neighbourhood(node))
        new.append(1 if potential - theta[idx] > 0 else 0)
    return Configuration(topo, tuple(new), x.beta)


# ---------------------------------------------------------------------------
# Symmetry condition
# ---------------------------------------------------------------------------


def symmetry_residual(p: PotentialSet, reduced: bool = True) -> float:
    """``u0 + (4 u1)/2 + phi(full neighbourhood)/2``; zero on the symmetry locus.

    With ``reduced=False`` the same expression in raw weights (T times larger).
    """
    c0, c1, c2, c3, c4 = p.reduced if reduced else p.weights
    return c0 + NEIGHBOURHOOD_SIZE * c1 / 2 + coalition_sum(NEIGHBOURHOOD_SIZE, c2, c3, c4, p.k) / 2


def solve_symmetric_w0(w1: float, w2: float = 0.0, w3: float = 0.0, w4: float = 0.0, k: int = 5) -> float:
    """Self weight that puts the remaining weights on the symmetry locus."""
    return -NEIGHBOURHOOD_SIZE * w1 / 2 - coalition_sum(NEIGHBOURHOOD_SIZE, w2, w3, w4, k) / 2


def symmetric_potentials(w1: float, w2: float = 0.0, T: float = 1.0, k: int = 5) -> PotentialSet:
    """Member of the symmetric family: ``w3 = -w2``, ``w4 = 0``, solved ``w0``."""
    w3 = -w2 if k >= 4 else 0.0
    if k == 3 and w2 != 0:
        raise ConfigurationError("order 3 has no nonzero symmetric coalition weights")
    w0 = solve_symmetric_w0(w1, w2, w3, 0.0, k)
    return PotentialSet(T, k, w0, w1, w2, w3, 0.0)


def phi_symmetry_check(p: PotentialSet, tol: float = 1e-10) -> Tuple[bool, float]:
    """Max over the 16 subsets K of ``|phi(K) + phi(complement) - phi(all)|``."""
    full = coalition_term(FULL_MASK, p)
    dev = max(abs(coalition_term(K, p) + coalition_term(FULL_MASK ^ K, p) - full) for K in range(FULL_MASK + 1))
    return dev < tol, dev
