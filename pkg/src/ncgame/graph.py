"""Strategy profiles, communication graphs and the graph machinery on top.

Nodes are the integers ``0..n-1``.  A :class:`StrategyProfile` records which
player paid for which link; :class:`CommGraph` is the undirected graph it
induces.  Everything here is immutable and pure.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

__all__ = [
    "UNREACHABLE",
    "InvalidProfileError",
    "StrategyProfile",
    "CommGraph",
    "DistanceMatrix",
    "BiconnectedComponent",
    "WeightMap",
    "NeighborhoodStats",
    "build_profile",
    "all_pairs_distances",
    "diameter",
    "biconnected_components",
    "nontrivial_components",
    "cut_vertices",
    "subtree_weights",
    "neighborhood_stats",
    "min_neighborhood_size",
    "distance_sum_mask",
]

#: Distance (and cost) of an unreachable target.  Ordered above every number.
UNREACHABLE = math.inf

Edge = tuple[int, int]


class InvalidProfileError(ValueError):
    """A purchase list violates the profile invariants."""

    def __init__(self, message: str, edge: Edge | None = None):
        super().__init__(message)
        self.edge = edge


def _norm(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class StrategyProfile:
    """Per-player purchase sets; ``bought[u]`` holds the targets ``u`` pays for."""

    n: int
    bought: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.n < 0:
            raise InvalidProfileError(f"negative player count {self.n}")
        if len(self.bought) != self.n:
            raise InvalidProfileError(f"expected {self.n} strategies, got {len(self.bought)}")
        for u, targets in enumerate(self.bought):
            for v in targets:
                if not 0 <= v < self.n:
                    raise InvalidProfileError(f"target {v} out of range", (u, v))
                if v == u:
                    raise InvalidProfileError(f"self-loop at {u}", (u, v))

    @classmethod
    def empty(cls, n: int) -> StrategyProfile:
        return cls(n, tuple(frozenset() for _ in range(n)))

    @cached_property
    def purchases(self) -> tuple[Edge, ...]:
        """All ``(owner, target)`` pairs in sorted order."""
        return tuple(sorted((u, v) for u, ts in enumerate(self.bought) for v in ts))

    @property
    def num_purchases(self) -> int:
        return sum(len(ts) for ts in self.bought)

    @cached_property
    def reciprocal_pairs(self) -> tuple[Edge, ...]:
        return tuple(
            (u, v) for u, ts in enumerate(self.bought) for v in sorted(ts) if u < v and u in self.bought[v]
        )

    @property
    def has_reciprocal(self) -> bool:
        return bool(self.reciprocal_pairs)

    @cached_property
    def graph(self) -> CommGraph:
        return CommGraph.from_profile(self)

    def with_strategy(self, u: int, targets: Iterable[int]) -> StrategyProfile:
        """Copy of the profile with player ``u``'s strategy replaced."""
        bought = list(self.bought)
        bought[u] = frozenset(targets)
        return StrategyProfile(self.n, tuple(bought))

    @cached_property
    def digest(self) -> str:
        """Stable hash of the sorted purchase list."""
        text = f"n={self.n};" + ",".join(f"{u}>{v}" for u, v in self.purchases)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def owns(self, u: int, v: int) -> bool:
        return v in self.bought[u]

    def relabel(self, perm: Sequence[int]) -> StrategyProfile:
        """Apply the node map ``i -> perm[i]``."""
        bought: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.purchases:
            bought[perm[u]].add(perm[v])
        return StrategyProfile(self.n, tuple(frozenset(b) for b in bought))


def build_profile(n: int, edges: Iterable[Sequence[int]]) -> StrategyProfile:
    """Build a profile from ``(owner, target)`` pairs.

    Raises :class:`InvalidProfileError` naming the offending pair on a
    self-loop, an out-of-range id or a repeated pair.
    """
    if n < 0:
        raise InvalidProfileError(f"negative player count {n}")
    bought: list[set[int]] = [set() for _ in range(n)]
    for pair in edges:
        owner, target = (int(x) for x in pair)
        edge = (owner, target)
        if not (0 <= owner < n and 0 <= target < n):
            raise InvalidProfileError(f"edge {edge} out of range for n={n}", edge)
        if owner == target:
            raise InvalidProfileError(f"self-loop {edge}", edge)
        if target in bought[owner]:
            raise InvalidProfileError(f"duplicate purchase {edge}", edge)
        bought[owner].add(target)
    return StrategyProfile(n, tuple(frozenset(b) for b in bought))


@dataclass(frozen=True)
class CommGraph:
    """Undirected simple graph with, per edge, the set of endpoints that paid."""

    n: int
    adj: tuple[frozenset[int], ...]
    owners: Mapping[Edge, frozenset[int]] = field(default_factory=dict, compare=False)

    @classmethod
    def from_profile(cls, profile: StrategyProfile) -> CommGraph:
        adj: list[set[int]] = [set() for _ in range(profile.n)]
        owners: dict[Edge, set[int]] = {}
        for u, v in profile.purchases:
            adj[u].add(v)
            adj[v].add(u)
            owners.setdefault(_norm(u, v), set()).add(u)
        return cls(
            profile.n,
            tuple(frozenset(a) for a in adj),
            {e: frozenset(o) for e, o in sorted(owners.items())},
        )

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> CommGraph:
        """Graph with each edge owned by its first listed endpoint."""
        seen: set[Edge] = set()
        purchases = []
        for a, b in edges:
            if _norm(a, b) not in seen:
                seen.add(_norm(a, b))
                purchases.append((a, b))
        return cls.from_profile(build_profile(n, purchases))

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted({_norm(u, v) for u in range(self.n) for v in self.adj[u]}))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj[a]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << v for v in a) for a in self.adj)

    @cached_property
    def distances(self) -> DistanceMatrix:
        return all_pairs_distances(self)

    def induced(self, nodes: Iterable[int]) -> dict[int, frozenset[int]]:
        keep = frozenset(nodes)
        return {v: self.adj[v] & keep for v in keep}

    def is_connected(self) -> bool:
        return self.distances.connected

    def is_tree(self) -> bool:
        return self.n > 0 and self.is_connected() and self.num_edges == self.n - 1


def _bfs(adj: Mapping[int, Iterable[int]] | Sequence[Iterable[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


@dataclass(frozen=True)
class DistanceMatrix:
    """Hop distances; unreachable entries hold :data:`UNREACHABLE`."""

    rows: tuple[tuple[float | int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, uv: tuple[int, int]) -> int | float:
        u, v = uv
        return self.rows[u][v]

    def row_sum(self, u: int) -> int | float:
        """Sum of distances from ``u`` to all other nodes."""
        row = self.rows[u]
        return UNREACHABLE if UNREACHABLE in row else sum(row)

    @cached_property
    def connected(self) -> bool:
        return all(UNREACHABLE not in row for row in self.rows)


def all_pairs_distances(graph: CommGraph) -> DistanceMatrix:
    rows = []
    for u in range(graph.n):
        dist = _bfs(graph.adj, u)
        rows.append(tuple(dist.get(v, UNREACHABLE) for v in range(graph.n)))
    return DistanceMatrix(tuple(rows))


def diameter(graph: CommGraph) -> int | float:
    """Largest distance; :data:`UNREACHABLE` for a disconnected graph."""
    dm = graph.distances
    if not dm.connected:
        return UNREACHABLE
    return max((max(row) for row in dm.rows), default=0)


def distance_sum_mask(masks: Sequence[int], source: int, first: int | None = None) -> int | float:
    """Distance sum from ``source`` over bitmask adjacency.

    ``first`` overrides the neighbourhood of ``source``; used to evaluate a
    player's alternative strategies without rebuilding the graph.
    """
    n = len(masks)
    full = (1 << n) - 1
    seen = 1 << source
    frontier = masks[source] if first is None else first
    frontier &= ~seen
    total = 0
    depth = 1
    while frontier:
        seen |= frontier
        total += depth * frontier.bit_count()
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= masks[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        depth += 1
    return total if seen == full else UNREACHABLE


@dataclass(frozen=True)
class BiconnectedComponent:
    """A block of the graph: a maximal biconnected subgraph."""

    nodes: frozenset[int]
    edges: frozenset[Edge]
    diameter: int

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def nontrivial(self) -> bool:
        return len(self.nodes) >= 3

    @property
    def avg_degree(self) -> Fraction:
        return Fraction(2 * len(self.edges), len(self.nodes))

    def sorted_nodes(self) -> list[int]:
        return sorted(self.nodes)


def _block_diameter(graph: CommGraph, nodes: frozenset[int]) -> int:
    sub = graph.induced(nodes)
    best = 0
    for v in nodes:
        dist = _bfs(sub, v)
        best = max(best, max(dist.values()))
    return best


def biconnected_components(graph: CommGraph) -> list[BiconnectedComponent]:
    """Lowpoint (Hopcroft-Tarjan) block decomposition.

    Isolated nodes belong to no block.  Blocks are returned sorted by their
    smallest member, then by size.
    """
    n = graph.n
    disc = [-1] * n
    low = [0] * n
    timer = 0
    blocks: list[set[Edge]] = []
    edge_stack: list[Edge] = []
    for root in range(n):
        if disc[root] != -1 or not graph.adj[root]:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(sorted(graph.adj[root])))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    edge_stack.append((v, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, iter(sorted(graph.adj[w]))))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent != -1:
                low[parent] = min(low[parent], low[v])
                if low[v] >= disc[parent]:
                    block = set()
                    while True:
                        e = edge_stack.pop()
                        block.add(_norm(*e))
                        if e == (parent, v):
                            break
                    blocks.append(block)
    out = []
    for block in blocks:
        nodes = frozenset(x for e in block for x in e)
        out.append(BiconnectedComponent(nodes, frozenset(block), _block_diameter(graph, nodes)))
    out.sort(key=lambda b: (min(b.nodes), len(b.nodes), sorted(b.edges)))
    return out


def nontrivial_components(graph: CommGraph) -> list[BiconnectedComponent]:
    return [b for b in biconnected_components(graph) if b.nontrivial]


def cut_vertices(graph: CommGraph) -> frozenset[int]:
    count: dict[int, int] = {}
    for b in biconnected_components(graph):
        for v in b.nodes:
            count[v] = count.get(v, 0) + 1
    return frozenset(v for v, c in count.items() if c >= 2)


@dataclass(frozen=True)
class WeightMap:
    """For each node of a block, the part of the graph hanging off it."""

    sets: Mapping[int, frozenset[int]]

    def weight(self, u: int) -> int:
        return len(self.sets[u])

    def owner_of(self, z: int) -> int:
        """The block node ``w`` with ``z`` in its hanging set."""
        for w, s in self.sets.items():
            if z in s:
                return w
        raise KeyError(z)


def _check_block(graph: CommGraph, block: BiconnectedComponent) -> None:
    if block not in biconnected_components(graph):
        raise ValueError("not a biconnected component of this graph")


def subtree_weights(graph: CommGraph, block: BiconnectedComponent, *, check: bool = True) -> WeightMap:
    """``S(u)`` for every ``u`` in the block.

    ``S(u)`` is the connected component of ``u`` once the other block nodes
    are removed.  On a disconnected graph the pieces unreachable from the
    block are left out, so the sets partition only the block's component.
    """
    if check:
        _check_block(graph, block)
    others = block.nodes
    sets = {}
    for u in sorted(block.nodes):
        allowed = {v: graph.adj[v] - (others - {u}) for v in range(graph.n) if v == u or v not in others}
        sets[u] = frozenset(_bfs(allowed, u))
    return WeightMap(sets)


@dataclass(frozen=True)
class NeighborhoodStats:
    center: int
    radius: int
    ball: frozenset[int]
    reach: frozenset[int]
    min_ball: int

    @property
    def ball_size(self) -> int:
        return len(self.ball)

    @property
    def reach_size(self) -> int:
        return len(self.reach)


def _ball(graph: CommGraph, block: BiconnectedComponent, u: int, k: int) -> frozenset[int]:
    row = graph.distances.rows[u]
    return frozenset(v for v in block.nodes if row[v] <= k)


def min_neighborhood_size(graph: CommGraph, block: BiconnectedComponent, k: int) -> int:
    """Smallest radius-``k`` ball inside the block over all block centres."""
    return min(len(_ball(graph, block, w, k)) for w in block.nodes)


def neighborhood_stats(
    graph: CommGraph,
    block: BiconnectedComponent,
    u: int,
    k: int,
    weights: WeightMap | None = None,
) -> NeighborhoodStats:
    if u not in block.nodes:
        raise ValueError(f"node {u} is not in the component")
    if k < 0:
        raise ValueError("radius must be nonnegative")
    if weights is None:
        weights = subtree_weights(graph, block, check=False)
    ball = _ball(graph, block, u, k)
    reach = frozenset().union(*(weights.sets[v] for v in ball))
    return NeighborhoodStats(u, k, ball, reach, min_neighborhood_size(graph, block, k))
