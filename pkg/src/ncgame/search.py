"""Finding equilibria: exhaustive enumeration, best-response dynamics, campaigns.

Exhaustive mode walks every ownership profile of ``n <= 6`` players.  Each
unordered pair is absent, bought by the smaller id or bought by the larger
id, so a profile is a base-3 number with one digit per pair.  Reciprocal
purchases are left out: dropping one of the two saves ``alpha`` and leaves
the graph unchanged, so such profiles are never equilibria.

Whether player ``u`` is at a best response depends only on the links the
other players bought, so the least achievable cost per link count is
memoised on ``(u, links bought by others)``; one table serves every alpha.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

from .bounds import BoundReport, Verdict, ne_consistency_report
from .canon import graph_class_representatives, graph_key, profile_key
from .fileio import parse_rational
from .game import (
    DEFAULT_EXACT_BUDGET,
    GameConfig,
    exact_best_response,
    is_exact_ne,
    player_cost,
    social_cost,
)
from .graph import UNREACHABLE, StrategyProfile, build_profile, distance_sum_mask, nontrivial_components

__all__ = [
    "find_all_NE",
    "MAX_EXHAUSTIVE_N",
    "SearchSpec",
    "CatalogEntry",
    "EquilibriumCatalog",
    "DynamicsOutcome",
    "CampaignRow",
    "CampaignReport",
    "profile_count",
    "profile_from_code",
    "code_of_profile",
    "enumerate_profiles",
    "exhaustive_ne_codes",
    "make_entry",
    "find_all_ne",
    "best_response_dynamics",
    "resolve_alpha_grid",
    "conjecture_scan",
]

MAX_EXHAUSTIVE_N = 6
MODES = ("exhaustive", "dynamics", "random-restart")


@lru_cache(maxsize=None)
def _pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((a, b) for a in range(n) for b in range(a + 1, n))


def profile_count(n: int) -> int:
    return 3 ** len(_pairs(n))


def profile_from_code(n: int, code: int) -> StrategyProfile:
    purchases = []
    for a, b in _pairs(n):
        code, digit = divmod(code, 3)
        if digit == 1:
            purchases.append((a, b))
        elif digit == 2:
            purchases.append((b, a))
    return build_profile(n, purchases)


def code_of_profile(profile: StrategyProfile) -> int:
    if profile.has_reciprocal:
        raise ValueError("profiles with reciprocal purchases have no code")
    code = 0
    for i, (a, b) in enumerate(_pairs(profile.n)):
        if profile.owns(a, b):
            code += 3**i
        elif profile.owns(b, a):
            code += 2 * 3**i
    return code


@lru_cache(maxsize=None)
def _pruned_codes(n: int) -> tuple[int, ...]:
    """Every orientation of one representative graph per isomorphism class."""
    index = {p: i for i, p in enumerate(_pairs(n))}
    codes = []
    for rep in graph_class_representatives(n):
        slots = [3 ** index[e] for e in rep]
        for bits in range(1 << len(slots)):
            codes.append(sum(w * (2 if bits >> j & 1 else 1) for j, w in enumerate(slots)))
    return tuple(codes)


def _work_codes(n: int, prune: bool) -> Sequence[int]:
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive enumeration is limited to n <= {MAX_EXHAUSTIVE_N}, got {n}")
    return _pruned_codes(n) if prune else range(profile_count(n))


def enumerate_profiles(n: int, prune: bool = False) -> Iterator[StrategyProfile]:
    """All reciprocal-free profiles in code order (``3^(n(n-1)/2)`` of them).

    With ``prune`` only the orientations of one labelled graph per
    isomorphism class of underlying graphs are produced; every equilibrium
    is still found up to relabelling.
    """
    for code in _work_codes(n, prune):
        yield profile_from_code(n, code)


class _Kernel:
    """Exact equilibrium test over profile codes for several alphas at once.

    Costs are scaled by the common denominator of the alphas so that all
    comparisons are on integers.
    """

    def __init__(self, n: int, alphas: Sequence[Fraction]):
        self.n = n
        self.pairs = _pairs(n)
        self.scale = math.lcm(*(a.denominator for a in alphas)) if alphas else 1
        self.alphas = [int(a * self.scale) for a in alphas]
        self.tables: dict[tuple[int, int], list[int | float]] = {}

    def _adjacency(self, edge_mask: int) -> list[int]:
        adj = [0] * self.n
        for i, (a, b) in enumerate(self.pairs):
            if edge_mask >> i & 1:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
        return adj

    def _best(self, u: int, others: int) -> list[int | float]:
        """Least scaled cost for ``u`` per alpha, given the others' links."""
        key = (u, others)
        best = self.tables.get(key)
        if best is not None:
            return best
        adj = self._adjacency(others)
        inbound = adj[u]
        targets = [v for v in range(self.n) if v != u]
        least = [UNREACHABLE] * self.n
        for bits in range(1 << len(targets)):
            tmask = 0
            for j, v in enumerate(targets):
                if bits >> j & 1:
                    tmask |= 1 << v
            d = distance_sum_mask(adj, u, inbound | tmask)
            k = bits.bit_count()
            if d < least[k]:
                least[k] = d
        best = [
            min((a * k + d * self.scale for k, d in enumerate(least) if d != UNREACHABLE), default=UNREACHABLE)
            for a in self.alphas
        ]
        self.tables[key] = best
        return best

    def flags(self, code: int) -> list[bool]:
        n = self.n
        edge_mask = 0
        owned = [0] * n
        count = [0] * n
        c = code
        for i, (a, b) in enumerate(self.pairs):
            c, digit = divmod(c, 3)
            if digit:
                edge_mask |= 1 << i
                owner = a if digit == 1 else b
                owned[owner] |= 1 << i
                count[owner] += 1
        adj = self._adjacency(edge_mask)
        ok = [True] * len(self.alphas)
        for u in range(n):
            d = distance_sum_mask(adj, u)
            if d == UNREACHABLE:
                # buying a link to everybody is always finite
                return [False] * len(self.alphas)
            best = self._best(u, edge_mask & ~owned[u])
            for i, a in enumerate(self.alphas):
                if ok[i] and a * count[u] + d * self.scale > best[i]:
                    ok[i] = False
            if not any(ok):
                break
        return ok


def _scan_shard(args: tuple[int, tuple[Fraction, ...], bool, int, int]) -> tuple[int, list[tuple[int, tuple[bool, ...]]]]:
    n, alphas, prune, lo, hi = args
    codes = _work_codes(n, prune)
    kernel = _Kernel(n, alphas)
    found = []
    for pos in range(lo, hi):
        code = codes[pos]
        flags = kernel.flags(code)
        if any(flags):
            found.append((code, tuple(flags)))
    return hi - lo, found


def _shards(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total)) if total else 1
    step, extra = divmod(total, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + step + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def exhaustive_ne_codes(
    n: int, alphas: Sequence[Fraction], *, prune: bool = False, workers: int = 1, shards: int | None = None
) -> tuple[int, dict[Fraction, list[int]]]:
    """Codes of all equilibria per alpha, plus the number of profiles checked.

    The work list is cut into contiguous index ranges; results are merged as
    sets, so the answer does not depend on the partition.
    """
    alphas = tuple(Fraction(a) for a in alphas)
    total = len(_work_codes(n, prune))
    jobs = [(n, alphas, prune, lo, hi) for lo, hi in _shards(total, shards or workers)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_shard, jobs))
    else:
        results = [_scan_shard(job) for job in jobs]
    checked = sum(r[0] for r in results)
    per_alpha: dict[Fraction, set[int]] = {a: set() for a in alphas}
    for _, found in results:
        for code, flags in found:
            for a, f in zip(alphas, flags):
                if f:
                    per_alpha[a].add(code)
    return checked, {a: sorted(codes) for a, codes in per_alpha.items()}


@dataclass(frozen=True)
class SearchSpec:
    n: int
    alphas: tuple[Fraction, ...]
    mode: str = "exhaustive"
    prune: bool = False
    workers: int = 1
    seed: int = 0
    restarts: int = 20
    max_rounds: int = 200
    analyze: bool = True

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(Fraction(a) for a in self.alphas))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "exhaustive" and self.n > MAX_EXHAUSTIVE_N:
            raise ValueError(f"exhaustive search needs n <= {MAX_EXHAUSTIVE_N}")
        if any(a <= 0 for a in self.alphas):
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class CatalogEntry:
    digest: str
    n: int
    alpha: Fraction
    edges: tuple[tuple[int, int], ...]
    tree: bool
    components: tuple[tuple[int, int, Fraction], ...]
    social_cost: Fraction
    graph_key: str
    profile_key: str
    report_digest: str = ""
    violations: tuple[str, ...] = ()
    reports: tuple[BoundReport, ...] = field(default=(), compare=False, repr=False)

    @property
    def profile(self) -> StrategyProfile:
        return build_profile(self.n, self.edges)

    @property
    def max_nH(self) -> int:
        return max((c[0] for c in self.components), default=0)

    def as_dict(self) -> dict:
        return {
            "digest": self.digest,
            "n": self.n,
            "alpha": str(self.alpha),
            "edges": [list(e) for e in self.edges],
            "tree": self.tree,
            "components": [{"n_H": a, "d_H": b, "deg_H": str(c)} for a, b, c in self.components],
            "social_cost": str(self.social_cost),
            "graph_key": self.graph_key,
            "profile_key": self.profile_key,
            "report_digest": self.report_digest,
            "violations": list(self.violations),
        }

    @classmethod
    def from_dict(cls, d: dict) -> CatalogEntry:
        return cls(
            d["digest"],
            d["n"],
            parse_rational(d["alpha"]),
            tuple((a, b) for a, b in d["edges"]),
            d["tree"],
            tuple((c["n_H"], c["d_H"], parse_rational(c["deg_H"])) for c in d["components"]),
            parse_rational(d["social_cost"]),
            d["graph_key"],
            d["profile_key"],
            d.get("report_digest", ""),
            tuple(d.get("violations", ())),
        )


def _report_digest(reports: Iterable[BoundReport]) -> str:
    text = json.dumps([r.as_dict() for r in reports], sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def make_entry(profile: StrategyProfile, config: GameConfig, analyze: bool = True) -> CatalogEntry:
    """Catalog record of a verified equilibrium."""
    g = profile.graph
    blocks = nontrivial_components(g)
    reports: tuple[BoundReport, ...] = ()
    if analyze:
        reports = tuple(ne_consistency_report(profile, config, verified=True))
    return CatalogEntry(
        profile.digest,
        profile.n,
        config.alpha,
        profile.purchases,
        not blocks,
        tuple((b.n_nodes, b.diameter, b.avg_degree) for b in blocks),
        Fraction(social_cost(profile, config)),
        graph_key(g),
        profile_key(profile),
        _report_digest(reports) if analyze else "",
        tuple(sorted({r.check_id for r in reports if r.verdict is Verdict.VIOLATED})),
        reports,
    )


@dataclass
class EquilibriumCatalog:
    spec: SearchSpec
    entries: list[CatalogEntry]
    exhaustive: bool
    profiles_checked: int = 0

    def __iter__(self) -> Iterator[CatalogEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def for_alpha(self, alpha) -> list[CatalogEntry]:
        alpha = Fraction(alpha)
        return [e for e in self.entries if e.alpha == alpha]

    def dedup(self, by: str = "graph") -> list[CatalogEntry]:
        """First entry (catalog order) of each isomorphism class per alpha."""
        attr = {"graph": "graph_key", "profile": "profile_key"}[by]
        seen, out = set(), []
        for e in self.entries:
            key = (e.alpha, getattr(e, attr))
            if key not in seen:
                seen.add(key)
                out.append(e)
        return out

    def header(self) -> dict:
        s = self.spec
        return {
            "header": True,
            "n": s.n,
            "alphas": [str(a) for a in s.alphas],
            "mode": s.mode,
            "prune": s.prune,
            "seed": s.seed,
            "exhaustive": self.exhaustive,
            "profiles_checked": self.profiles_checked,
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines += [json.dumps(e.as_dict(), sort_keys=True) for e in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str, verify: bool = True, budget: int = DEFAULT_EXACT_BUDGET) -> EquilibriumCatalog:
        """Load a catalog; with ``verify`` each entry is re-checked as an exact equilibrium."""
        header, entries = None, []
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            if d.get("header"):
                header = d
                continue
            entry = CatalogEntry.from_dict(d)
            if verify and not is_exact_ne(entry.profile, GameConfig(entry.n, entry.alpha), budget).is_ne:
                raise ValueError(f"catalog entry {entry.digest} is not a Nash equilibrium")
            entries.append(entry)
        if header is None:
            raise ValueError("catalog has no header line")
        spec = SearchSpec(
            header["n"],
            tuple(parse_rational(a) for a in header["alphas"]),
            header["mode"],
            header["prune"],
            seed=header["seed"],
            analyze=False,
        )
        return cls(spec, entries, header["exhaustive"], header["profiles_checked"])


def _sort_entries(entries: Iterable[CatalogEntry], alphas: Sequence[Fraction]) -> list[CatalogEntry]:
    order = {a: i for i, a in enumerate(alphas)}
    return sorted(entries, key=lambda e: (order[e.alpha], e.digest))


def find_all_ne(spec: SearchSpec) -> EquilibriumCatalog:
    """All equilibria (exhaustive mode) or those reached by dynamics."""
    if spec.mode == "exhaustive":
        checked, per_alpha = exhaustive_ne_codes(spec.n, spec.alphas, prune=spec.prune, workers=spec.workers)
        entries = []
        for alpha, codes in per_alpha.items():
            config = GameConfig(spec.n, alpha)
            for code in codes:
                profile = profile_from_code(spec.n, code)
                assert spec.n < 2 or profile.graph.is_connected(), "disconnected equilibrium"
                entries.append(make_entry(profile, config, spec.analyze))
        return EquilibriumCatalog(spec, _sort_entries(entries, spec.alphas), True, checked)

    rng = random.Random(spec.seed)
    entries = {}
    runs = 0  # per alpha; the same for every alpha
    for alpha in spec.alphas:
        config = GameConfig(spec.n, alpha)
        if spec.mode == "dynamics":
            starts = [(StrategyProfile.empty(spec.n), "round-robin", None)]
        else:
            starts = [(_random_profile(spec.n, rng), "random", rng.randrange(2**32)) for _ in range(spec.restarts)]
        runs = len(starts)
        for start, schedule, seed in starts:
            outcome = best_response_dynamics(start, config, schedule, spec.max_rounds, seed=seed)
            if outcome.status == "converged":
                p = outcome.profile
                entries.setdefault((alpha, p.digest), make_entry(p, config, spec.analyze))
    return EquilibriumCatalog(spec, _sort_entries(entries.values(), spec.alphas), False, runs)


def _random_profile(n: int, rng: random.Random) -> StrategyProfile:
    return profile_from_code(n, rng.randrange(profile_count(n)))


@dataclass(frozen=True)
class DynamicsOutcome:
    status: str
    profile: StrategyProfile
    rounds: int
    history: tuple[str, ...]
    cycle_start: int | None = None


def best_response_dynamics(
    start: StrategyProfile,
    config: GameConfig,
    schedule: str = "round-robin",
    max_rounds: int = 200,
    *,
    seed: int | None = None,
    budget: int = DEFAULT_EXACT_BUDGET,
) -> DynamicsOutcome:
    """Players switch to an exact best response whenever it is strictly cheaper.

    ``history`` holds the profile digest after every round, starting with
    the initial profile.  Cycles are detected for the deterministic
    round-robin schedule only, by a repeat in ``history``.
    """
    if schedule not in ("round-robin", "random"):
        raise ValueError("schedule must be 'round-robin' or 'random'")
    rng = random.Random(seed)
    profile = start
    history = [profile.digest]
    seen = {profile.digest: 0}
    for rnd in range(1, max_rounds + 1):
        order = list(range(profile.n))
        if schedule == "random":
            rng.shuffle(order)
        changed = False
        for u in order:
            best, cost = exact_best_response(profile, config, u, budget)
            current = player_cost(profile, config, u).total
            if cost < current:
                profile = profile.with_strategy(u, best)
                changed = True
        history.append(profile.digest)
        if not changed:
            if not is_exact_ne(profile, config, budget).is_ne:
                raise AssertionError("stable profile failed the exact equilibrium check")
            return DynamicsOutcome("converged", profile, rnd, tuple(history))
        if schedule == "round-robin":
            if profile.digest in seen:
                return DynamicsOutcome("cycle", profile, rnd, tuple(history), seen[profile.digest])
            seen[profile.digest] = rnd
    return DynamicsOutcome("round-limit", profile, max_rounds, tuple(history))


_GRID_TERM = re.compile(r"^(?:(\d+(?:/\d+)?)\*?)?n(?:([+-])(\d+(?:/\d+)?))?$")


def resolve_alpha_grid(grid: Iterable[str | int | Fraction] | Callable[[int], Iterable], n: int) -> list[Fraction]:
    """Turn grid terms into alphas for one ``n``.

    Terms are exact rationals (``"7/2"``) or linear in ``n`` (``"n-1"``,
    ``"2n"``, ``"4n+1"``).  Duplicates are dropped, order kept.
    """
    terms = grid(n) if callable(grid) else grid
    out: list[Fraction] = []
    for term in terms:
        if isinstance(term, (int, Fraction)):
            value = Fraction(term)
        else:
            text = str(term).replace(" ", "")
            m = _GRID_TERM.match(text)
            if m:
                coef = parse_rational(m.group(1)) if m.group(1) else Fraction(1)
                shift = parse_rational(m.group(3)) if m.group(3) else Fraction(0)
                value = coef * n + (shift if m.group(2) != "-" else -shift)
            else:
                value = parse_rational(text)
        if value <= 0:
            raise ValueError(f"grid term {term!r} gives non-positive alpha {value} at n={n}")
        if value not in out:
            out.append(value)
    return out


@dataclass(frozen=True)
class CampaignRow:
    n: int
    alpha: Fraction
    profiles_checked: int
    ne_count: int
    tree_ne_count: int
    nontree_ne_count: int
    max_nH: int
    violations: int
    vacuous: int = 0

    CSV_FIELDS = ("n", "alpha", "profiles_checked", "ne_count", "tree_ne_count", "nontree_ne_count", "max_nH", "violations")

    def csv_row(self) -> list[str]:
        return [str(getattr(self, f)) for f in self.CSV_FIELDS]


@dataclass
class CampaignReport:
    rows: list[CampaignRow]
    catalogs: dict[int, EquilibriumCatalog]
    headline: list[CatalogEntry]

    def entries(self) -> Iterator[CatalogEntry]:
        for n in sorted(self.catalogs):
            yield from self.catalogs[n].entries

    def reports(self, nontree_only: bool = False) -> Iterator[tuple[CatalogEntry, BoundReport]]:
        for e in self.entries():
            if nontree_only and e.tree:
                continue
            for r in e.reports:
                yield e, r

    def violated(self) -> list[tuple[CatalogEntry, BoundReport]]:
        return [(e, r) for e, r in self.reports() if r.verdict is Verdict.VIOLATED]

    @property
    def total_violations(self) -> int:
        return sum(row.violations for row in self.rows)


def conjecture_scan(
    n_range: Iterable[int],
    alpha_grid,
    *,
    mode: str = "exhaustive",
    prune: bool = False,
    workers: int = 1,
    seed: int = 0,
    restarts: int = 20,
    max_rounds: int = 200,
) -> CampaignReport:
    """Sweep ``(n, alpha)`` cells with a full bound check of every equilibrium found.

    Non-tree equilibria with ``alpha > n`` are collected in ``headline``:
    any such profile would bear on the tree conjecture.  Outside exhaustive
    mode ``profiles_checked`` counts dynamics runs.
    """
    rows, catalogs, headline = [], {}, []
    for n in n_range:
        alphas = resolve_alpha_grid(alpha_grid, n)
        if not alphas:
            continue
        catalog = find_all_ne(SearchSpec(n, tuple(alphas), mode, prune, workers, seed, restarts, max_rounds))
        catalogs[n] = catalog
        for alpha in alphas:
            entries = catalog.for_alpha(alpha)
            reports = [r for e in entries for r in e.reports]
            nontree = [e for e in entries if not e.tree]
            rows.append(
                CampaignRow(
                    n,
                    alpha,
                    catalog.profiles_checked,
                    len(entries),
                    len(entries) - len(nontree),
                    len(nontree),
                    max((e.max_nH for e in entries), default=0),
                    sum(r.verdict is Verdict.VIOLATED for r in reports),
                    sum(r.verdict is Verdict.VACUOUS for r in reports),
                )
            )
            headline.extend(e for e in nontree if alpha > n)
    return CampaignReport(rows, catalogs, headline)


find_all_NE = find_all_ne
