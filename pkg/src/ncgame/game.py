"""Costs, deviations and equilibrium checks for the sum network creation game.

All costs are exact :class:`~fractions.Fraction` values; a player who cannot
reach everybody has cost :data:`~ncgame.graph.UNREACHABLE` (``math.inf``),
which orders above every rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .graph import UNREACHABLE, CommGraph, StrategyProfile, distance_sum_mask

__all__ = [
    "is_exact_NE",
    "is_greedy_NE",
    "DEFAULT_EXACT_BUDGET",
    "BRUTE_FORCE_OPT_MAX_N",
    "BudgetExceededError",
    "GameConfig",
    "Deviation",
    "CostBreakdown",
    "NEVerdict",
    "player_cost",
    "social_cost",
    "delta_cost",
    "is_exact_ne",
    "is_greedy_ne",
    "exact_best_response",
    "social_optimum",
    "social_optimum_closed_form",
    "social_optimum_brute_force",
    "price_of_anarchy",
]

DEFAULT_EXACT_BUDGET = 12
BRUTE_FORCE_OPT_MAX_N = 7

Cost = Fraction | float


class BudgetExceededError(ValueError):
    """The exhaustive check would enumerate too many strategies."""


@dataclass(frozen=True)
class GameConfig:
    n: int
    alpha: Fraction

    def __post_init__(self):
        if isinstance(self.alpha, float):
            raise TypeError("alpha must be exact (int, Fraction or 'p/q'), not float")
        if isinstance(self.alpha, str):
            from .fileio import parse_rational

            object.__setattr__(self, "alpha", parse_rational(self.alpha))
        else:
            object.__setattr__(self, "alpha", Fraction(self.alpha))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.n < 0:
            raise ValueError("n must be nonnegative")


@dataclass(frozen=True)
class Deviation:
    """Player ``player`` switches to the full target set ``strategy``."""

    player: int
    strategy: frozenset[int]
    kind: str = "replace"

    @classmethod
    def add_edge(cls, profile: StrategyProfile, u: int, target: int) -> Deviation:
        return cls(u, profile.bought[u] | {target}, f"add {u}->{target}")

    @classmethod
    def delete_edge(cls, profile: StrategyProfile, u: int, target: int) -> Deviation:
        return cls(u, profile.bought[u] - {target}, f"delete {u}->{target}")

    @classmethod
    def swap_edge(cls, profile: StrategyProfile, u: int, old: int, new: int) -> Deviation:
        return cls(u, (profile.bought[u] - {old}) | {new}, f"swap {u}->{old} for {u}->{new}")

    @classmethod
    def sell_two_buy_one(cls, profile: StrategyProfile, v: int, v1: int, v2: int, target: int) -> Deviation:
        return cls(v, (profile.bought[v] - {v1, v2}) | {target}, f"sell {v}->{v1},{v}->{v2} buy {v}->{target}")

    @classmethod
    def buy_set(cls, profile: StrategyProfile, u: int, targets: Iterable[int]) -> Deviation:
        targets = frozenset(targets)
        return cls(u, profile.bought[u] | targets, f"buy {u}->{sorted(targets)}")

    def apply(self, profile: StrategyProfile) -> StrategyProfile:
        if self.player in self.strategy:
            raise ValueError("a player cannot buy a link to herself")
        return profile.with_strategy(self.player, self.strategy)

    def as_dict(self) -> dict:
        return {"player": self.player, "strategy": sorted(self.strategy), "kind": self.kind}


@dataclass(frozen=True)
class CostBreakdown:
    edge_cost: Fraction
    usage_cost: int | float
    total: Cost

    @property
    def reachable(self) -> bool:
        return self.usage_cost != UNREACHABLE


def _check_sizes(profile: StrategyProfile, config: GameConfig) -> None:
    if profile.n != config.n:
        raise ValueError(f"profile has {profile.n} players, game has {config.n}")


def player_cost(profile: StrategyProfile, config: GameConfig, u: int) -> CostBreakdown:
    _check_sizes(profile, config)
    edge_cost = config.alpha * len(profile.bought[u])
    usage = profile.graph.distances.row_sum(u)
    total = UNREACHABLE if usage == UNREACHABLE else edge_cost + usage
    return CostBreakdown(edge_cost, usage, total)


def social_cost(profile: StrategyProfile, config: GameConfig) -> Cost:
    _check_sizes(profile, config)
    dm = profile.graph.distances
    if not dm.connected:
        return UNREACHABLE
    return config.alpha * profile.num_purchases + sum(dm.row_sum(u) for u in range(profile.n))


def _difference(after: Cost, before: Cost) -> Cost:
    if after == UNREACHABLE and before == UNREACHABLE:
        return Fraction(0)
    if after == UNREACHABLE:
        return UNREACHABLE
    if before == UNREACHABLE:
        return -UNREACHABLE
    return after - before


def delta_cost(profile: StrategyProfile, config: GameConfig, dev: Deviation) -> Cost:
    """Exact ``c_u(s') - c_u(s)`` for the deviating player.

    Both sides disconnected counts as no change.
    """
    before = player_cost(profile, config, dev.player).total
    after = player_cost(dev.apply(profile), config, dev.player).total
    return _difference(after, before)


class _PlayerView:
    """Fast cost evaluation of every strategy of one player.

    The rest of the graph is fixed, so only the player's own neighbourhood
    changes between strategies.
    """

    def __init__(self, profile: StrategyProfile, u: int):
        self.n = profile.n
        self.u = u
        rest = profile.with_strategy(u, ())
        self.masks = rest.graph.masks
        self.inbound = self.masks[u]
        self.current = sum(1 << v for v in profile.bought[u])
        self.targets = [v for v in range(self.n) if v != u]

    def usage(self, tmask: int) -> int | float:
        return distance_sum_mask(self.masks, self.u, self.inbound | tmask)

    def cost(self, tmask: int, alpha: Fraction) -> Cost:
        usage = self.usage(tmask)
        return UNREACHABLE if usage == UNREACHABLE else alpha * tmask.bit_count() + usage

    def strategies(self) -> Iterator[int]:
        for bits in range(1 << len(self.targets)):
            mask = 0
            for i, v in enumerate(self.targets):
                if bits >> i & 1:
                    mask |= 1 << v
            yield mask

    @staticmethod
    def members(mask: int) -> tuple[int, ...]:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return tuple(out)


def _improvement(after: Cost, before: Cost) -> bool:
    return _difference(after, before) < 0


@dataclass(frozen=True)
class NEVerdict:
    is_ne: bool
    exact: bool
    witness: Deviation | None = None
    delta: Cost | None = None

    def as_dict(self) -> dict:
        return {
            "verdict": "NE" if self.is_ne else "not NE",
            "check": "exact" if self.exact else "greedy",
            "witness": None if self.witness is None else self.witness.as_dict(),
            "delta": None if self.delta is None else _cost_str(self.delta),
        }


def _cost_str(c: Cost) -> str:
    if c == UNREACHABLE:
        return "inf"
    if c == -UNREACHABLE:
        return "-inf"
    return str(c)


def _check_budget(n: int, budget: int) -> None:
    if n > budget:
        raise BudgetExceededError(
            f"exact check enumerates 2^{n - 1} strategies per player; n={n} exceeds budget {budget}, "
            "use is_greedy_ne instead"
        )


def is_exact_ne(profile: StrategyProfile, config: GameConfig, budget: int = DEFAULT_EXACT_BUDGET) -> NEVerdict:
    """Check every unilateral deviation of every player.

    On failure the witness is, for the first player (by id) who can improve,
    the improving strategy whose sorted target tuple is smallest.
    """
    _check_sizes(profile, config)
    _check_budget(profile.n, budget)
    for u in range(profile.n):
        view = _PlayerView(profile, u)
        current = view.cost(view.current, config.alpha)
        best = None
        for mask in view.strategies():
            if mask == view.current:
                continue
            c = view.cost(mask, config.alpha)
            if _improvement(c, current):
                key = view.members(mask)
                if best is None or key < best[0]:
                    best = (key, c)
        if best is not None:
            dev = Deviation(u, frozenset(best[0]), "exact best-improvement")
            return NEVerdict(False, True, dev, _difference(best[1], current))
    return NEVerdict(True, True)


def greedy_deviations(profile: StrategyProfile, u: int) -> Iterator[Deviation]:
    """Single deletions, additions and swaps available to ``u``."""
    own = sorted(profile.bought[u])
    free = [w for w in range(profile.n) if w != u and w not in profile.bought[u]]
    for t in own:
        yield Deviation.delete_edge(profile, u, t)
    for w in free:
        yield Deviation.add_edge(profile, u, w)
    for t in own:
        for w in free:
            yield Deviation.swap_edge(profile, u, t, w)


def is_greedy_ne(profile: StrategyProfile, config: GameConfig) -> NEVerdict:
    """Equilibrium check restricted to single add / delete / swap moves."""
    _check_sizes(profile, config)
    for u in range(profile.n):
        view = _PlayerView(profile, u)
        current = view.cost(view.current, config.alpha)
        for dev in greedy_deviations(profile, u):
            c = view.cost(sum(1 << v for v in dev.strategy), config.alpha)
            if _improvement(c, current):
                return NEVerdict(False, False, dev, _difference(c, current))
    return NEVerdict(True, False)


def exact_best_response(
    profile: StrategyProfile, config: GameConfig, u: int, budget: int = DEFAULT_EXACT_BUDGET
) -> tuple[frozenset[int], Cost]:
    """Cheapest strategy for ``u``; ties go to fewer links, then the smallest target tuple."""
    _check_sizes(profile, config)
    _check_budget(profile.n, budget)
    view = _PlayerView(profile, u)
    best_key = None
    best = None
    for mask in view.strategies():
        c = view.cost(mask, config.alpha)
        members = view.members(mask)
        key = (c, len(members), members)
        if best_key is None or key < best_key:
            best_key, best = key, (frozenset(members), c)
    assert best is not None
    return best


def social_optimum_closed_form(config: GameConfig) -> tuple[Fraction, CommGraph]:
    """``min(clique, star)``, the known optimum of the game."""
    n, a = config.n, config.alpha
    if n <= 1:
        return Fraction(0), CommGraph.from_edges(n, [])
    clique = a * n * (n - 1) / 2 + n * (n - 1)
    star = a * (n - 1) + 2 * (n - 1) ** 2
    if star <= clique:
        return Fraction(star), CommGraph.from_edges(n, [(0, v) for v in range(1, n)])
    return Fraction(clique), CommGraph.from_edges(n, [(a_, b) for a_ in range(n) for b in range(a_ + 1, n)])


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


@lru_cache(maxsize=None)
def _min_distance_sums(n: int) -> tuple[tuple[float, int], ...]:
    """For each edge count ``m``: (least total distance over connected graphs, a witness mask).

    The total runs over ordered pairs.  Exhaustive over all ``2^(n(n-1)/2)``
    edge subsets of the complete graph, vectorised in chunks.
    """
    pairs = _pairs(n)
    m = len(pairs)
    best = [(math.inf, -1)] * (m + 1)
    if n <= 1:
        return ((0.0, 0),)
    total = 1 << m
    chunk = 1 << 15
    eye = np.eye(n, dtype=bool)
    rows = np.array([a for a, _ in pairs])
    cols = np.array([b for _, b in pairs])
    bits = np.arange(m, dtype=np.int64)
    for start in range(0, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        present = ((masks[:, None] >> bits) & 1).astype(bool)
        adj = np.zeros((len(masks), n, n), dtype=np.uint8)
        adj[:, rows, cols] = present
        adj[:, cols, rows] = present
        reach = np.broadcast_to(eye, adj.shape).copy()
        dsum = np.zeros(len(masks), dtype=np.int64)
        for _ in range(n - 1):
            dsum += (~reach).sum(axis=(1, 2))
            reach = reach | (np.matmul(reach.astype(np.uint8), adj) > 0)
        connected = reach.all(axis=(1, 2))
        counts = present.sum(axis=1)
        for k in np.unique(counts[connected]):
            sel = connected & (counts == k)
            vals = dsum[sel]
            i = int(np.argmin(vals))
            cand = (float(vals[i]), int(masks[sel][i]))
            if cand[0] < best[k][0]:
                best[k] = cand
    return tuple(best)


def social_optimum_brute_force(config: GameConfig) -> tuple[Fraction, CommGraph]:
    """Exact optimum by enumerating every connected edge set; ties go to fewer edges."""
    n = config.n
    if n <= 1:
        return Fraction(0), CommGraph.from_edges(n, [])
    table = _min_distance_sums(n)
    best = None
    for m, (dsum, mask) in enumerate(table):
        if mask < 0:
            continue
        c = config.alpha * m + int(dsum)
        if best is None or c < best[0]:
            best = (c, mask)
    assert best is not None
    pairs = _pairs(n)
    edges = [pairs[i] for i in range(len(pairs)) if best[1] >> i & 1]
    return Fraction(best[0]), CommGraph.from_edges(n, edges)


def social_optimum(config: GameConfig) -> tuple[Fraction, CommGraph]:
    """Brute force for ``n <= 7``; the clique/star closed form beyond."""
    if config.n <= BRUTE_FORCE_OPT_MAX_N:
        return social_optimum_brute_force(config)
    return social_optimum_closed_form(config)


def price_of_anarchy(
    config: GameConfig,
    equilibria: Sequence[StrategyProfile],
    *,
    verify: bool = False,
    budget: int = DEFAULT_EXACT_BUDGET,
) -> Fraction:
    """Worst social cost among ``equilibria`` over the optimum."""
    if not equilibria:
        raise ValueError("price of anarchy needs at least one equilibrium")
    if verify:
        for s in equilibria:
            if not is_exact_ne(s, config, budget).is_ne:
                raise ValueError(f"profile {s.purchases} is not a Nash equilibrium")
    worst = max(social_cost(s, config) for s in equilibria)
    opt, _ = social_optimum(config)
    if worst == UNREACHABLE:
        raise ValueError("disconnected profile supplied as an equilibrium")
    if opt == 0:
        return Fraction(1)
    return Fraction(worst) / opt


is_exact_NE = is_exact_ne
is_greedy_NE = is_greedy_ne
