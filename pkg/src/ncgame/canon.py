"""Canonical forms for small graphs and ownership profiles.

Colour refinement orders the nodes into cells in a label-independent way;
the canonical form is then the lexicographically least relabelled arc list
over all permutations that respect the cell order.  That is exact, but the
search over permutations grows with the cell sizes, so it is only used up to
:data:`EXACT_MAX_N` nodes.  Beyond that :func:`refinement_key` gives a
best-effort invariant.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Sequence

from .graph import CommGraph, StrategyProfile

EXACT_MAX_N = 8

Arc = tuple[int, int]


def _refine(n: int, arcs: Sequence[Arc]) -> list[int]:
    """Stable colouring; colours are ranks of signatures, hence label independent."""
    outs: list[list[int]] = [[] for _ in range(n)]
    ins: list[list[int]] = [[] for _ in range(n)]
    for a, b in arcs:
        outs[a].append(b)
        ins[b].append(a)
    sigs: list = [(len(outs[v]), len(ins[v])) for v in range(n)]
    ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
    colour = [ranks[s] for s in sigs]
    while True:
        sigs = [
            (colour[v], tuple(sorted(colour[w] for w in outs[v])), tuple(sorted(colour[w] for w in ins[v])))
            for v in range(n)
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == len(set(colour)):
            return new
        colour = new


def _cells(n: int, arcs: Sequence[Arc]) -> list[list[int]]:
    colour = _refine(n, arcs)
    cells: dict[int, list[int]] = {}
    for v in range(n):
        cells.setdefault(colour[v], []).append(v)
    return [cells[c] for c in sorted(cells)]


def _labelings(cells: list[list[int]]) -> Iterable[list[int]]:
    for choice in product(*(permutations(c) for c in cells)):
        perm = [0] * sum(len(c) for c in cells)
        pos = 0
        for cell in choice:
            for v in cell:
                perm[v] = pos
                pos += 1
        yield perm


def canonical_arcs(n: int, arcs: Iterable[Arc], directed: bool = True) -> tuple[Arc, ...]:
    """Exact canonical arc list (undirected: each edge as ``(min, max)``)."""
    arcs = list(arcs)
    if not directed:
        arcs = [(min(a, b), max(a, b)) for a, b in arcs]
        walk = arcs + [(b, a) for a, b in arcs]
    else:
        walk = arcs
    best = None
    for perm in _labelings(_cells(n, walk)):
        if directed:
            form = tuple(sorted((perm[a], perm[b]) for a, b in arcs))
        else:
            form = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b])) for a, b in arcs))
        if best is None or form < best:
            best = form
    return best if best is not None else ()


def refinement_key(n: int, arcs: Iterable[Arc], directed: bool = True) -> str:
    arcs = list(arcs)
    walk = arcs if directed else arcs + [(b, a) for a, b in arcs]
    colour = _refine(n, walk)
    sig = (n, tuple(sorted(colour)), tuple(sorted((colour[a], colour[b]) for a, b in walk)))
    return "wl:" + hashlib.sha256(repr(sig).encode()).hexdigest()[:16]


def _key(n: int, arcs: list[Arc], directed: bool) -> str:
    if n > EXACT_MAX_N:
        return refinement_key(n, arcs, directed)
    form = canonical_arcs(n, arcs, directed)
    return f"{n}:" + ",".join(f"{a}{'>' if directed else '-'}{b}" for a, b in form)


def profile_key(profile: StrategyProfile) -> str:
    """Isomorphism class of the ownership profile (who bought what, up to relabelling)."""
    return _key(profile.n, list(profile.purchases), True)


def graph_key(graph: CommGraph) -> str:
    """Isomorphism class of the underlying undirected graph."""
    return _key(graph.n, list(graph.edges), False)


def are_isomorphic(g1: CommGraph, g2: CommGraph) -> bool:
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return False
    return canonical_arcs(g1.n, g1.edges, False) == canonical_arcs(g2.n, g2.edges, False)


@lru_cache(maxsize=None)
def graph_class_representatives(n: int) -> tuple[tuple[Arc, ...], ...]:
    """One labelled edge list per isomorphism class of graphs on ``n`` nodes.

    Each representative is the canonical form of its class, listed in
    increasing order.
    """
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    reps = set()
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        reps.add(canonical_arcs(n, edges, False))
    return tuple(sorted(reps, key=lambda e: (len(e), e)))
