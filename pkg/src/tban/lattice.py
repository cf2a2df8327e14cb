"""Finite rectangular regions of Z^2 with von Neumann neighbourhoods.

A region of ``width x height`` free nodes is surrounded by an external
boundary: every cell of the complement at Manhattan distance 1 from some free
node. Boundary nodes are sources (they feed their free neighbours but receive
nothing), so they can be clamped to a fixed value.

Free nodes are ordered lexically by ``(row, col)``; position ``i`` in that
order is bit ``i`` of a configuration bitmask everywhere else in the package.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Tuple

import numpy as np

from .errors import ConfigurationError, DomainError


class NodeId(NamedTuple):
    row: int
    col: int

    def shift(self, dr: int, dc: int) -> "NodeId":
        return NodeId(self.row + dr, self.col + dc)


# Lexical order of the four orthogonal offsets; neighbour slots 1..4 of a node
# follow this order (up, left, right, down).
OFFSETS: Tuple[Tuple[int, int], ...] = ((-1, 0), (0, -1), (0, 1), (1, 0))

WeightMap = Dict[Tuple[NodeId, NodeId], float]


@dataclass(frozen=True)
class NetworkTopology:
    width: int
    height: int
    free_nodes: Tuple[NodeId, ...]
    strict_neighbourhoods: Tuple[Tuple[NodeId, ...], ...]
    boundary_nodes: frozenset = field(repr=False)

    @property
    def n_free(self) -> int:
        return len(self.free_nodes)

    @cached_property
    def index(self) -> Dict[NodeId, int]:
        return {node: i for i, node in enumerate(self.free_nodes)}

    def is_free(self, node) -> bool:
        return NodeId(*node) in self.index

    def node_index(self, node) -> int:
        """Position of a free node in lexical order; ints pass through."""
        if isinstance(node, (int, np.integer)) and not isinstance(node, tuple):
            if not 0 <= node < self.n_free:
                raise DomainError(f"free node index {node} out of range [0, {self.n_free})")
            return int(node)
        try:
            return self.index[NodeId(*node)]
        except (KeyError, TypeError):
            raise DomainError(f"{node!r} is not a free node of this topology") from None

    def strict_neighbourhood(self, node) -> Tuple[NodeId, ...]:
        return self.strict_neighbourhoods[self.node_index(node)]

    def neighbourhood(self, node) -> Tuple[NodeId, ...]:
        """N_i: the node itself plus its four orthogonal neighbours."""
        i = self.node_index(node)
        return (self.free_nodes[i],) + self.strict_neighbourhoods[i]

    @cached_property
    def neighbour_table(self) -> np.ndarray:
        """``(n, 4)`` int array of free-node indices, ``-1`` marking a boundary neighbour."""
        table = np.full((self.n_free, 4), -1, dtype=np.int64)
        for i, nbrs in enumerate(self.strict_neighbourhoods):
            for slot, j in enumerate(nbrs):
                table[i, slot] = self.index.get(j, -1)
        table.setflags(write=False)
        return table

    @cached_property
    def boundary_degree(self) -> np.ndarray:
        """Number of boundary nodes in each free node's strict neighbourhood."""
        deg = (self.neighbour_table < 0).sum(axis=1).astype(np.int64)
        deg.setflags(write=False)
        return deg

    @cached_property
    def centre(self) -> frozenset:
        """Graph centre of the (bidirectional) free-node lattice.

        A single free node has no arcs; it is its own centre.
        """
        if self.n_free == 1:
            return frozenset(self.free_nodes)
        return frozenset(centre(lattice_digraph(self, clamped=False)))

    @cached_property
    def centre_node(self) -> NodeId:
        """Lexically first centre node; the unique middle on odd x odd regions."""
        return min(self.centre)

    @property
    def centre_index(self) -> int:
        return self.index[self.centre_node]


def build_lattice(width: int, height: int) -> NetworkTopology:
    """Rectangular region with ``height`` rows and ``width`` columns."""
    for name, v in (("width", width), ("height", height)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise ConfigurationError(f"lattice {name} must be a positive integer, got {v!r}")
    width, height = int(width), int(height)
    free = tuple(NodeId(r, c) for r in range(height) for c in range(width))
    free_set = set(free)
    strict = tuple(tuple(node.shift(dr, dc) for dr, dc in OFFSETS) for node in free)
    boundary = frozenset(j for nbrs in strict for j in nbrs if j not in free_set)
    return NetworkTopology(width, height, free, strict, boundary)


def external_boundary(free: Iterable) -> frozenset:
    """Complement cells at Manhattan distance 1 from some node of ``free``.

    Works for any finite node set; used as an independent check on
    :func:`build_lattice`.
    """
    free = {NodeId(*v) for v in free}
    out = set()
    for node in free:
        for dr, dc in OFFSETS:
            j = node.shift(dr, dc)
            if j not in free:
                out.add(j)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Digraphs: boundary, eccentricity, centre
# ---------------------------------------------------------------------------


class Digraph:
    """Labelled digraph. An arc ``(j, i)`` carries the weight ``w_{i,j}``.

    Arcs with a zero label are not stored: a null weight means no arc.
    """

    def __init__(self, vertices: Iterable[Hashable] = (), arcs: Mapping | Iterable = ()):
        self._vertices: List[Hashable] = []
        self._pos: Dict[Hashable, int] = {}
        self._succ: List[List[int]] = []
        self._pred_count: List[int] = []
        self.labels: Dict[Tuple[Hashable, Hashable], float] = {}
        for v in vertices:
            self.add_vertex(v)
        items = arcs.items() if isinstance(arcs, Mapping) else ((a, 1.0) for a in arcs)
        for (src, dst), w in items:
            self.add_arc(src, dst, w)

    def add_vertex(self, v) -> None:
        if v not in self._pos:
            self._pos[v] = len(self._vertices)
            self._vertices.append(v)
            self._succ.append([])
            self._pred_count.append(0)

    def add_arc(self, src, dst, weight: float = 1.0) -> None:
        if weight == 0:
            return
        self.add_vertex(src)
        self.add_vertex(dst)
        if (src, dst) not in self.labels:
            self._succ[self._pos[src]].append(self._pos[dst])
            self._pred_count[self._pos[dst]] += 1
        self.labels[(src, dst)] = float(weight)

    @property
    def vertices(self) -> frozenset:
        return frozenset(self._vertices)

    @property
    def arcs(self) -> frozenset:
        return frozenset(self.labels)

    def __contains__(self, v) -> bool:
        return v in self._pos

    def in_degree(self, v) -> int:
        return self._pred_count[self._pos[v]]

    def is_isolated(self, v) -> bool:
        p = self._pos[v]
        if self._pred_count[p]:
            return False
        return all(q == p for q in self._succ[p])

    def distances_from(self, u) -> Dict[Hashable, int]:
        """Directed BFS distances from ``u`` to every reachable vertex (u included, at 0)."""
        start = self._pos[u]
        dist = [-1] * len(self._vertices)
        dist[start] = 0
        queue = deque([start])
        succ = self._succ
        while queue:
            a = queue.popleft()
            da = dist[a] + 1
            for b in succ[a]:
                if dist[b] < 0:
                    dist[b] = da
                    queue.append(b)
        return {self._vertices[i]: d for i, d in enumerate(dist) if d >= 0}


def eccentricity(g: Digraph, u) -> float:
    """Largest finite distance from ``u`` to another vertex.

    Returns ``math.inf`` when ``u`` reaches no other vertex, so sinks can never
    be central.
    """
    if u not in g:
        raise DomainError(f"vertex {u!r} is not in the digraph")
    dist = g.distances_from(u)
    others = [d for v, d in dist.items() if v != u]
    return max(others) if others else math.inf


def centre(g: Digraph) -> set:
    """Vertices of minimal finite eccentricity (isolated vertices excluded)."""
    ecc = {v: eccentricity(g, v) for v in g._vertices if not g.is_isolated(v)}
    finite = [e for e in ecc.values() if e != math.inf]
    if not finite:
        warnings.warn("every eccentricity is infinite; the centre is empty", RuntimeWarning)
        return set()
    best = min(finite)
    return {v for v, e in ecc.items() if e == best}


def graph_boundary(g: Digraph) -> set:
    """Sources of ``g`` (vertices with in-degree 0)."""
    return {v for v in g._vertices if g.in_degree(v) == 0}


def lattice_digraph(
    topology: NetworkTopology,
    weights: Mapping | None = None,
    clamped: bool = True,
    self_loops: bool = False,
) -> Digraph:
    """Interaction digraph of a lattice.

    ``clamped=True`` adds the boundary nodes with arcs into the free nodes only,
    which makes them exactly the sources. ``clamped=False`` keeps the free nodes
    with bidirectional arcs (the symmetric lattice).
    """
    g = Digraph(topology.free_nodes)
    free = topology.index
    for i, nbrs in zip(topology.free_nodes, topology.strict_neighbourhoods):
        if self_loops:
            g.add_arc(i, i, 1.0 if weights is None else weights.get((i, i), 0.0))
        for j in nbrs:
            if j not in free and not clamped:
                continue
            g.add_arc(j, i, 1.0 if weights is None else weights.get((i, j), 0.0))
    return g


# ---------------------------------------------------------------------------
# Weights and structural hypotheses
# ---------------------------------------------------------------------------


def uniform_weights(topology: NetworkTopology, w0: float, w1: float) -> WeightMap:
    """``w_{i,i} = w0`` and ``w_{i,j} = w1`` for every j in the strict neighbourhood."""
    weights: WeightMap = {}
    for i, nbrs in zip(topology.free_nodes, topology.strict_neighbourhoods):
        weights[(i, i)] = float(w0)
        for j in nbrs:
            weights[(i, j)] = float(w1)
    return weights


@dataclass
class StructureReport:
    isotropic: bool
    translation_invariant: bool
    symmetric: bool
    attractive: bool
    violations: List[Tuple[Tuple[NodeId, NodeId], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.isotropic and self.translation_invariant and self.symmetric and self.attractive

    def failed(self) -> set:
        names = ("isotropic", "translation_invariant", "symmetric", "attractive")
        return {n for n in names if not getattr(self, n)}

    def to_dict(self) -> dict:
        return {
            "isotropic": self.isotropic,
            "translation_invariant": self.translation_invariant,
            "symmetric": self.symmetric,
            "attractive": self.attractive,
            "violations": [
                {"node": list(i), "neighbour": list(j), "reason": reason}
                for (i, j), reason in self.violations
            ],
        }


def _modal(values):
    return Counter(values).most_common(1)[0][0]


def validate_structure(weights: Mapping, topology: NetworkTopology, tol: float = 1e-12) -> StructureReport:
    """Check isotropy, translation invariance, symmetry and attractiveness.

    Isotropy compares the four strict-neighbourhood weights of each node against
    their most common value; translation invariance compares each offset
    (self included) against its most common value across nodes. Violations are
    reported, never raised.
    """
    missing = [
        (i, j)
        for i, nbrs in zip(topology.free_nodes, topology.strict_neighbourhoods)
        for j in (i,) + nbrs
        if (i, j) not in weights
    ]
    if missing:
        raise DomainError(f"weights missing for {len(missing)} arcs, e.g. {missing[0]}")

    violations: List[Tuple[Tuple[NodeId, NodeId], str]] = []
    close = lambda a, b: abs(a - b) <= tol  # noqa: E731

    isotropic = True
    for i, nbrs in zip(topology.free_nodes, topology.strict_neighbourhoods):
        ref = _modal(weights[(i, j)] for j in nbrs)
        for j in nbrs:
            if not close(weights[(i, j)], ref):
                isotropic = False
                violations.append(((i, j), f"isotropy: w={weights[(i, j)]!r} differs from {ref!r}"))

    translation = True
    for dr, dc in ((0, 0),) + OFFSETS:
        arcs = [(i, i.shift(dr, dc)) for i in topology.free_nodes]
        ref = _modal(weights[a] for a in arcs)
        for a in arcs:
            if not close(weights[a], ref):
                translation = False
                violations.append((a, f"translation invariance: offset {(dr, dc)} weight {weights[a]!r} != {ref!r}"))

    symmetric = True
    free = topology.index
    for i, nbrs in zip(topology.free_nodes, topology.strict_neighbourhoods):
        for j in nbrs:
            # only free-free pairs are reciprocal; boundary nodes receive no arcs
            if j in free and i < j and not close(weights[(i, j)], weights[(j, i)]):
                symmetric = False
                violations.append(((i, j), f"symmetry: w_ij={weights[(i, j)]!r} != w_ji={weights[(j, i)]!r}"))

    attractive = True
    for i, nbrs in zip(topology.free_nodes, topology.strict_neighbourhoods):
        if not weights[(i, i)] < 0:
            attractive = False
            violations.append(((i, i), f"attractiveness: self weight {weights[(i, i)]!r} is not negative"))
        for j in nbrs:
            if not weights[(i, j)] > 0:
                attractive = False
                violations.append(((i, j), f"attractiveness: weight {weights[(i, j)]!r} is not positive"))

    return StructureReport(isotropic, translation, symmetric, attractive, violations)
