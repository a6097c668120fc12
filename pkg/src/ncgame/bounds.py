"""Executable versions of the structural bounds on equilibria for alpha > n.

Each bound comes as a raw evaluator and as a checker that returns
:class:`BoundReport` records.  Checkers run in one of two modes:

* verdict mode (default) presupposes an exact equilibrium and reports
  ``holds`` / ``violated``;
* evaluator-only mode (``evaluate_only=True``) reports the values with
  verdict ``evaluated`` and works on any graph.

Exact rational arithmetic is used wherever the bound is rational; the
bounds built from ``5 ** sqrt(2 log_5 n_H)`` are evaluated with mpmath at
:data:`WORKING_DPS` digits and compared with a relative margin of
:data:`FLOAT_MARGIN`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import mpmath

from .game import (
    DEFAULT_EXACT_BUDGET,
    Deviation,
    GameConfig,
    delta_cost,
    is_exact_ne,
    social_cost,
    social_optimum,
)
from .graph import (
    UNREACHABLE,
    BiconnectedComponent,
    StrategyProfile,
    WeightMap,
    _bfs,
    diameter,
    min_neighborhood_size,
    nontrivial_components,
    subtree_weights,
)

__all__ = [
    "WORKING_DPS",
    "FLOAT_MARGIN",
    "DEGREE_LOWER_BOUND",
    "Verdict",
    "BoundReport",
    "ASetRecord",
    "NotEquilibriumError",
    "compute_a_set",
    "prop1_bound",
    "prop2_bound",
    "sell_two_buy_one_check",
    "corollary1_check",
    "prop3_degree_bound",
    "prop3_check",
    "avg_degree",
    "lemma1_check",
    "lemma2_check",
    "dh_nh_bound",
    "dh_nh_check",
    "prop4_distance_check",
    "thm2_degree_bound",
    "thm2_check",
    "degH_lower_bound",
    "degH_lower_check",
    "poa_checks",
    "k_epsilon_excess",
    "compute_K_epsilon",
    "ne_consistency_report",
]

WORKING_DPS = 60
FLOAT_MARGIN = mpmath.mpf("1e-6")
DEGREE_LOWER_BOUND = Fraction(33, 16)


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    VACUOUS = "vacuous"
    INAPPLICABLE = "inapplicable"
    EVALUATED = "evaluated"


class NotEquilibriumError(ValueError):
    """A verdict-mode check was asked about a profile that is not an equilibrium."""


Number = Fraction | int | float | mpmath.mpf | None


def format_number(x: Number) -> str:
    if x is None:
        return ""
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 15)
    if x == UNREACHABLE:
        return "inf"
    return str(x)


@dataclass(frozen=True)
class BoundReport:
    check_id: str
    verdict: Verdict
    lhs: Number = None
    rhs: Number = None
    n: int | None = None
    alpha: Fraction | None = None
    n_H: int | None = None
    d_H: int | None = None
    witness: Mapping[str, Any] = field(default_factory=dict)
    note: str = ""

    def sort_key(self) -> tuple[str, str]:
        return (self.check_id, json.dumps(self.witness, sort_keys=True))

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "lhs": format_number(self.lhs),
            "rhs": format_number(self.rhs),
            "verdict": self.verdict.value,
            "n": self.n,
            "alpha": None if self.alpha is None else str(self.alpha),
            "n_H": self.n_H,
            "d_H": self.d_H,
            "witness": dict(self.witness),
            "note": self.note,
        }

    CSV_FIELDS = ("check_id", "n", "alpha", "n_H", "d_H", "lhs", "rhs", "verdict")

    def csv_row(self) -> list[str]:
        d = self.as_dict()
        return ["" if d[k] is None else str(d[k]) for k in self.CSV_FIELDS]


def _ctx(config: GameConfig, block: BiconnectedComponent | None = None) -> dict:
    out: dict = {"n": config.n, "alpha": config.alpha}
    if block is not None:
        out.update(n_H=block.n_nodes, d_H=block.diameter)
    return out


def _exact_verdict(ok: bool, evaluate_only: bool) -> Verdict:
    if evaluate_only:
        return Verdict.EVALUATED
    return Verdict.HOLDS if ok else Verdict.VIOLATED


def _strictly_below(lhs, rhs) -> bool:
    """``lhs < rhs`` with a conservative relative margin on the right side."""
    return mpmath.mpf(lhs) < mpmath.mpf(rhs) * (1 - FLOAT_MARGIN)


def _require_ne(profile: StrategyProfile, config: GameConfig, verified: bool, evaluate_only: bool) -> None:
    if verified or evaluate_only:
        return
    if not is_exact_ne(profile, config, DEFAULT_EXACT_BUDGET).is_ne:
        raise NotEquilibriumError("bound is only claimed at an equilibrium; use evaluate_only=True")


# --------------------------------------------------------------------------
# A sets and the sell-two-buy-one deviation


@dataclass(frozen=True)
class ASetRecord:
    """The A set of ``(v, e1=(v,v1), e2=(v,v2))`` relative to the anchor ``u``."""

    anchor: int
    v: int
    v1: int
    v2: int
    a1: frozenset[int]
    a2: frozenset[int]
    members: frozenset[int]
    #: edges (x, y), x in A1, y in A2
    crossings_12: tuple[tuple[int, int], ...]
    #: edges (x, y), x in A, y outside A, other than e1, e2
    crossings_out: tuple[tuple[int, int], ...]
    #: per i: edges (x, y), x in A^i, y outside A^i, other than e_i
    crossings_out_i: tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]
    #: distance v1 -- v2 inside the subgraph induced by A (inf if undefined)
    l: int | float
    dist_from_v: tuple[int | float, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def crossing_case(self) -> int:
        """1 if A1 and A2 are joined by an edge, else 2."""
        return 1 if self.crossings_12 else 2

    def parts(self) -> tuple[frozenset[int], frozenset[int]]:
        return (self.a1, self.a2)


def compute_a_set(profile: StrategyProfile, u: int, v: int, v1: int, v2: int) -> ASetRecord:
    """Exact A set via shortest-path counting on the BFS layers around ``u``.

    ``z`` is in A when every shortest ``z -> u`` path enters ``v`` from
    ``v1`` or ``v2``: the number of such paths equals the number of all
    shortest paths.  ``z`` is in A^i when at least one of them enters from
    ``v_i``.
    """
    if v1 == v2 or not (profile.owns(v, v1) and profile.owns(v, v2)):
        raise ValueError(f"edges ({v},{v1}) and ({v},{v2}) must be two distinct links bought by {v}")
    g = profile.graph
    dm = g.distances
    du = dm.rows[u]
    order = sorted((z for z in range(g.n) if du[z] != UNREACHABLE), key=lambda z: du[z])
    paths = [0] * g.n
    via = [[0] * g.n, [0] * g.n]
    for z in order:
        if z == u:
            paths[z] = 1
            continue
        down = [w for w in g.adj[z] if du[w] == du[z] - 1]
        paths[z] = sum(paths[w] for w in down)
        for i, vi in enumerate((v1, v2)):
            if z == vi and v in down:
                via[i][z] = paths[v]
            elif du[z] > du[v] + 1:
                via[i][z] = sum(via[i][w] for w in down)
    members = frozenset(
        z for z in order if z != v and paths[z] > 0 and via[0][z] + via[1][z] == paths[z]
    )
    a1 = frozenset(z for z in members if via[0][z] > 0)
    a2 = frozenset(z for z in members if via[1][z] > 0)
    e1, e2 = frozenset((v, v1)), frozenset((v, v2))
    crossings_12 = tuple(sorted((x, y) for x in a1 for y in g.adj[x] if y in a2))
    crossings_out = tuple(
        sorted((x, y) for x in members for y in g.adj[x] if y not in members and frozenset((x, y)) not in (e1, e2))
    )
    out_i = tuple(
        tuple(sorted((x, y) for x in part for y in g.adj[x] if y not in part and frozenset((x, y)) != e))
        for part, e in ((a1, e1), (a2, e2))
    )
    l: int | float = UNREACHABLE
    if v1 in members and v2 in members:
        l = _bfs(g.induced(members), v1).get(v2, UNREACHABLE)
    return ASetRecord(u, v, v1, v2, a1, a2, members, crossings_12, crossings_out, out_i, l, dm.rows[v])


def _d_terms(profile: StrategyProfile, record: ASetRecord, d_u, d_v):
    dm = profile.graph.distances
    d_u = dm.row_sum(record.anchor) if d_u is None else d_u
    d_v = dm.row_sum(record.v) if d_v is None else d_v
    return d_u, d_v


def prop1_bound(
    profile: StrategyProfile,
    config: GameConfig,
    record: ASetRecord,
    crossing: tuple[int, int],
    d_u: int | None = None,
    d_v: int | None = None,
) -> Fraction | None:
    """Upper bound on the cost change of selling e1, e2 and buying ``v -> u``.

    Case of A1 and A2 joined by an edge.  ``None`` when the hypotheses fail.
    """
    if record.anchor == record.v or not record.crossings_12:
        return None
    if crossing not in record.crossings_out or record.l == UNREACHABLE:
        return None
    d_u, d_v = _d_terms(profile, record, d_u, d_v)
    x = crossing[0]
    mult = 2 * record.dist_from_v[x] + record.l
    return -config.alpha + config.n + d_u - d_v + mult * record.size


def prop2_bound(
    profile: StrategyProfile,
    config: GameConfig,
    record: ASetRecord,
    crossings: Mapping[int, tuple[int, int]],
    d_u: int | None = None,
    d_v: int | None = None,
) -> Fraction | None:
    """Same deviation, case of no edge between A1 and A2.

    ``crossings`` maps each index ``i`` in {1, 2} with nonempty A^i to an
    edge leaving A^i.
    """
    if record.anchor == record.v or record.crossings_12:
        return None
    nonempty = [i for i, part in ((1, record.a1), (2, record.a2)) if part]
    if sorted(crossings) != nonempty:
        return None
    for i, xy in crossings.items():
        if xy not in record.crossings_out_i[i - 1]:
            return None
    d_u, d_v = _d_terms(profile, record, d_u, d_v)
    mult = max([0] + [2 * record.dist_from_v[xy[0]] for xy in crossings.values()])
    return -config.alpha + config.n + d_u - d_v + mult * record.size


def _tightest(crossings: Sequence[tuple[int, int]], dist: Sequence) -> tuple[int, int] | None:
    if not crossings:
        return None
    return min(crossings, key=lambda xy: (dist[xy[0]], xy))


def sell_two_buy_one_check(
    profile: StrategyProfile, config: GameConfig, u: int, v: int, v1: int, v2: int
) -> BoundReport:
    """Exact cost change of the deviation against the applicable bound.

    Uses the crossing closest to ``v``; valid on any graph meeting the
    hypotheses, so no equilibrium is required.
    """
    record = compute_a_set(profile, u, v, v1, v2)
    ctx = {"n": config.n, "alpha": config.alpha}
    witness: dict = {"u": u, "v": v, "v1": v1, "v2": v2, "A": sorted(record.members)}
    check_id = "prop1_delta" if record.crossing_case == 1 else "prop2_delta"
    if u == v:
        return BoundReport(check_id, Verdict.INAPPLICABLE, witness=witness, note="anchor equals v", **ctx)
    if record.crossing_case == 1:
        xy = _tightest(record.crossings_out, record.dist_from_v)
        if xy is None:
            return BoundReport(check_id, Verdict.INAPPLICABLE, witness=witness, note="no crossing out of A", **ctx)
        if record.l == UNREACHABLE:
            return BoundReport(check_id, Verdict.INAPPLICABLE, witness=witness, note="l undefined", **ctx)
        bound = prop1_bound(profile, config, record, xy)
        witness.update(crossing=list(xy), l=record.l)
    else:
        chosen = {}
        for i, part in ((1, record.a1), (2, record.a2)):
            if part:
                xy = _tightest(record.crossings_out_i[i - 1], record.dist_from_v)
                if xy is None:
                    return BoundReport(
                        check_id, Verdict.INAPPLICABLE, witness=witness, note=f"no crossing out of A{i}", **ctx
                    )
                chosen[i] = xy
        bound = prop2_bound(profile, config, record, chosen)
        witness.update(crossings={str(i): list(xy) for i, xy in chosen.items()})
    assert bound is not None
    dev = Deviation.sell_two_buy_one(profile, v, v1, v2, u)
    exact = delta_cost(profile, config, dev)
    verdict = Verdict.HOLDS if exact <= bound else Verdict.VIOLATED
    return BoundReport(check_id, verdict, exact, bound, witness=witness, **ctx)


def _h_edges_bought(profile: StrategyProfile, block: BiconnectedComponent, v: int) -> list[int]:
    return sorted(t for t in profile.bought[v] if (min(v, t), max(v, t)) in block.edges)


def _anchor(profile: StrategyProfile, block: BiconnectedComponent) -> int:
    dm = profile.graph.distances
    return min(block.nodes, key=lambda z: (dm.row_sum(z), z))


def _pair_tuples(profile, block):
    for v in sorted(block.nodes):
        targets = _h_edges_bought(profile, block, v)
        for i, a in enumerate(targets):
            for b in targets[i + 1 :]:
                yield v, a, b


def corollary1_check(
    profile: StrategyProfile,
    config: GameConfig,
    block: BiconnectedComponent,
    *,
    evaluate_only: bool = False,
    verified: bool = False,
) -> list[BoundReport]:
    """``|A| >= (alpha - n) / (4 d_H)`` for every pair of block links bought by one node.

    The anchor is the block node with least distance sum (smallest id on
    ties).  Alongside, a ``cor1_structure`` record confirms that crossing
    endpoints lie in the block and that ``l <= 2 d_H``.
    """
    ctx = _ctx(config, block)
    if config.alpha <= config.n:
        return [BoundReport("cor1_aset_size", Verdict.INAPPLICABLE, note="needs alpha > n", **ctx)]
    _require_ne(profile, config, verified, evaluate_only)
    u = _anchor(profile, block)
    rhs = (config.alpha - config.n) / (4 * block.diameter)
    reports = []
    for v, a, b in _pair_tuples(profile, block):
        if v == u:
            continue
        record = compute_a_set(profile, u, v, a, b)
        witness = {"u": u, "v": v, "v1": a, "v2": b, "A": sorted(record.members)}
        reports.append(
            BoundReport(
                "cor1_aset_size",
                _exact_verdict(record.size >= rhs, evaluate_only),
                record.size,
                rhs,
                witness=witness,
                **ctx,
            )
        )
        reports.append(_structure_report(record, block, witness, ctx))
    if not reports:
        return [BoundReport("cor1_aset_size", Verdict.VACUOUS, note="no node buys two block links", **ctx)]
    return reports


def _structure_report(record: ASetRecord, block: BiconnectedComponent, witness: dict, ctx: dict) -> BoundReport:
    # edges leaving A or A^i; A1-A2 edges may lie in a pendant tree when A1, A2 overlap
    crossings = list(record.crossings_out)
    for part in record.crossings_out_i:
        crossings.extend(part)
    outside = sorted({x for e in crossings for x in e if x not in block.nodes})
    l_ok = record.crossing_case == 2 or record.l <= 2 * block.diameter
    # the case split needs an edge out of A (case 1) or out of each nonempty A^i (case 2)
    if record.crossing_case == 1:
        missing = [] if record.crossings_out else ["A"]
    else:
        missing = [f"A{i}" for i, part in ((1, record.a1), (2, record.a2)) if part and not record.crossings_out_i[i - 1]]
    ok = not outside and l_ok and not missing
    problems = []
    if outside:
        problems.append(f"crossing endpoints outside block: {outside}")
    if not l_ok:
        problems.append(f"l={format_number(record.l)} exceeds 2 d_H")
    if missing:
        problems.append(f"no crossing out of {', '.join(missing)}")
    note = "; ".join(problems)
    return BoundReport(
        "cor1_structure",
        Verdict.HOLDS if ok else Verdict.VIOLATED,
        record.l if record.crossing_case == 1 else None,
        2 * block.diameter,
        witness=witness,
        note=note,
        **ctx,
    )


# --------------------------------------------------------------------------
# degree bounds


def avg_degree(block: BiconnectedComponent) -> Fraction:
    return block.avg_degree


def prop3_degree_bound(n: int, alpha, n_H: int, d_H: int) -> Fraction | None:
    """``2 + 16 d_H (d_H + 1) n / (n_H (alpha - n))``; ``None`` unless alpha > n."""
    alpha = Fraction(alpha)
    if alpha <= n or n_H < 3 or d_H < 1:
        return None
    return 2 + Fraction(16 * d_H * (d_H + 1) * n) / (n_H * (alpha - n))


def prop3_check(
    profile: StrategyProfile, config: GameConfig, block: BiconnectedComponent, *, evaluate_only: bool = False
) -> BoundReport:
    ctx = _ctx(config, block)
    rhs = prop3_degree_bound(config.n, config.alpha, block.n_nodes, block.diameter)
    if rhs is None:
        return BoundReport("prop3_degree", Verdict.INAPPLICABLE, note="needs alpha > n", **ctx)
    lhs = avg_degree(block)
    return BoundReport("prop3_degree", _exact_verdict(lhs <= rhs, evaluate_only), lhs, rhs, **ctx)


def _mp(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def _log5(x) -> mpmath.mpf:
    return mpmath.log(_mp(x)) / mpmath.log(5)


def dh_nh_bound(n_H: int) -> mpmath.mpf:
    """``5 ** (sqrt(2 log_5 n_H) + 5)``."""
    if n_H < 1:
        raise ValueError("n_H must be positive")
    with mpmath.workdps(WORKING_DPS):
        return +mpmath.power(5, mpmath.sqrt(2 * _log5(n_H)) + 5)


def dh_nh_check(config: GameConfig, block: BiconnectedComponent, *, evaluate_only: bool = False) -> BoundReport:
    ctx = _ctx(config, block)
    if config.alpha <= config.n:
        return BoundReport("dh_nh_diameter", Verdict.INAPPLICABLE, note="needs alpha > n", **ctx)
    rhs = dh_nh_bound(block.n_nodes)
    ok = _strictly_below(block.diameter, rhs)
    return BoundReport("dh_nh_diameter", _exact_verdict(ok, evaluate_only), block.diameter, rhs, **ctx)


def thm2_degree_bound(n: int, alpha, n_H: int) -> mpmath.mpf | None:
    """``2 + 16 n / (alpha - n) * 5 ** (2 sqrt(2 log_5 n_H) + 10) / n_H``; ``None`` unless alpha > n."""
    alpha = Fraction(alpha)
    if alpha <= n or n_H < 3:
        return None
    with mpmath.workdps(WORKING_DPS):
        growth = mpmath.power(5, 2 * mpmath.sqrt(2 * _log5(n_H)) + 10) / n_H
        return +(2 + _mp(Fraction(16 * n) / (alpha - n)) * growth)


def thm2_check(config: GameConfig, block: BiconnectedComponent, *, evaluate_only: bool = False) -> BoundReport:
    ctx = _ctx(config, block)
    rhs = thm2_degree_bound(config.n, config.alpha, block.n_nodes)
    if rhs is None:
        return BoundReport("thm2_degree", Verdict.INAPPLICABLE, note="needs alpha > n", **ctx)
    lhs = avg_degree(block)
    return BoundReport("thm2_degree", _exact_verdict(_strictly_below(_mp(lhs), rhs), evaluate_only), lhs, rhs, **ctx)


def degH_lower_bound() -> Fraction:
    return DEGREE_LOWER_BOUND


def degH_lower_check(config: GameConfig, block: BiconnectedComponent, *, evaluate_only: bool = False) -> BoundReport:
    lhs = avg_degree(block)
    return BoundReport(
        "degH_lower", _exact_verdict(lhs >= DEGREE_LOWER_BOUND, evaluate_only), lhs, DEGREE_LOWER_BOUND,
        **_ctx(config, block),
    )


# --------------------------------------------------------------------------
# ball growing inside the block


def _reach_sizes(profile: StrategyProfile, block: BiconnectedComponent, weights: WeightMap, r: int) -> dict[int, int]:
    row = profile.graph.distances.rows
    out = {}
    for u in sorted(block.nodes):
        out[u] = sum(weights.weight(w) for w in block.nodes if row[u][w] <= r)
    return out


def lemma1_check(
    profile: StrategyProfile,
    config: GameConfig,
    block: BiconnectedComponent,
    k: int,
    *,
    evaluate_only: bool = False,
    verified: bool = False,
) -> BoundReport:
    """Either some ``|S_{4k+1}(u)| > n/2`` or ``m_{5k+1} >= m_k k / 4``."""
    ctx = _ctx(config, block)
    check_id = f"lemma1_ball_k{k}"
    if k < 0:
        raise ValueError("k must be nonnegative")
    if config.alpha >= 4 * config.n:
        return BoundReport(check_id, Verdict.INAPPLICABLE, note="needs alpha < 4n", **ctx)
    _require_ne(profile, config, verified, evaluate_only)
    weights = subtree_weights(profile.graph, block, check=False)
    reach = _reach_sizes(profile, block, weights, 4 * k + 1)
    u_max = max(reach, key=lambda z: (reach[z], -z))
    far = reach[u_max] > Fraction(config.n, 2)
    lhs = min_neighborhood_size(profile.graph, block, 5 * k + 1)
    rhs = Fraction(min_neighborhood_size(profile.graph, block, k) * k, 4)
    witness = {"k": k, "max_reach": reach[u_max], "argmax": u_max, "first_disjunct": far}
    return BoundReport(check_id, _exact_verdict(far or lhs >= rhs, evaluate_only), lhs, rhs, witness=witness, **ctx)


def lemma2_check(
    profile: StrategyProfile,
    config: GameConfig,
    block: BiconnectedComponent,
    r: int,
    *,
    evaluate_only: bool = False,
    verified: bool = False,
) -> BoundReport:
    """If ``r < d_H/4 - 4`` then ``|S_r(u)| <= n/2`` for every block node."""
    ctx = _ctx(config, block)
    if config.alpha >= 4 * config.n:
        return BoundReport("lemma2_reach", Verdict.INAPPLICABLE, note="needs alpha < 4n", **ctx)
    if not r < Fraction(block.diameter, 4) - 4:
        return BoundReport("lemma2_reach", Verdict.VACUOUS, witness={"r": r}, note="r >= d_H/4 - 4", **ctx)
    _require_ne(profile, config, verified, evaluate_only)
    weights = subtree_weights(profile.graph, block, check=False)
    reach = _reach_sizes(profile, block, weights, r)
    u_max = max(reach, key=lambda z: (reach[z], -z))
    rhs = Fraction(config.n, 2)
    return BoundReport(
        "lemma2_reach",
        _exact_verdict(reach[u_max] <= rhs, evaluate_only),
        reach[u_max],
        rhs,
        witness={"r": r, "argmax": u_max},
        **ctx,
    )


def _lemma2_reports(profile, config, block, evaluate_only, verified) -> list[BoundReport]:
    limit = Fraction(block.diameter, 4) - 4
    radii = [r for r in range(block.diameter + 1) if r < limit]
    if not radii:
        return [lemma2_check(profile, config, block, 0, evaluate_only=evaluate_only, verified=verified)]
    return [lemma2_check(profile, config, block, r, evaluate_only=evaluate_only, verified=verified) for r in radii]


# --------------------------------------------------------------------------
# diameters


def prop4_distance_check(
    profile: StrategyProfile,
    config: GameConfig,
    *,
    evaluate_only: bool = False,
    verified: bool = False,
) -> list[BoundReport]:
    """Hanging distance ``d(z, w) < 125`` and ``d_G < d_H + 250`` for each block.

    Only claimed for ``n < alpha < 4n`` on non-tree equilibria.
    """
    ctx = _ctx(config)
    if not config.n < config.alpha < 4 * config.n:
        note = "needs n < alpha < 4n"
        return [BoundReport(c, Verdict.INAPPLICABLE, note=note, **ctx) for c in ("prop4_hanging_distance", "thm1_diameter")]
    blocks = nontrivial_components(profile.graph)
    if not blocks:
        note = "no nontrivial biconnected component"
        return [BoundReport(c, Verdict.INAPPLICABLE, note=note, **ctx) for c in ("prop4_hanging_distance", "thm1_diameter")]
    _require_ne(profile, config, verified, evaluate_only)
    dm = profile.graph.distances
    d_g = diameter(profile.graph)
    reports = []
    for block in blocks:
        weights = subtree_weights(profile.graph, block, check=False)
        far, w_best, z_best = -1, None, None
        for w in sorted(block.nodes):
            for z in sorted(weights.sets[w]):
                if dm[z, w] > far:
                    far, w_best, z_best = dm[z, w], w, z
        bctx = _ctx(config, block)
        reports.append(
            BoundReport(
                "prop4_hanging_distance",
                _exact_verdict(far < 125, evaluate_only),
                far,
                125,
                witness={"w": w_best, "z": z_best, "block": block.sorted_nodes()},
                **bctx,
            )
        )
        reports.append(
            BoundReport(
                "thm1_diameter",
                _exact_verdict(d_g < block.diameter + 250, evaluate_only),
                d_g,
                block.diameter + 250,
                witness={"block": block.sorted_nodes()},
                **bctx,
            )
        )
    return reports


def poa_checks(profile: StrategyProfile, config: GameConfig, *, evaluate_only: bool = False) -> list[BoundReport]:
    """Ratio to the optimum against ``diameter + 1`` and, for trees, against 5."""
    ctx = _ctx(config)
    cost = social_cost(profile, config)
    opt, _ = social_optimum(config)
    if cost == UNREACHABLE or opt == 0:
        note = "disconnected" if cost == UNREACHABLE else "trivial game"
        return [BoundReport(c, Verdict.INAPPLICABLE, note=note, **ctx) for c in ("poa_diameter", "poa_tree")]
    ratio = Fraction(cost) / opt
    d_g = diameter(profile.graph)
    reports = [BoundReport("poa_diameter", _exact_verdict(ratio <= d_g + 1, evaluate_only), ratio, d_g + 1, **ctx)]
    if profile.graph.is_tree():
        reports.append(BoundReport("poa_tree", _exact_verdict(ratio <= 5, evaluate_only), ratio, 5, **ctx))
    else:
        reports.append(BoundReport("poa_tree", Verdict.INAPPLICABLE, note="not a tree", **ctx))
    return reports


# --------------------------------------------------------------------------
# size constant


def k_epsilon_excess(epsilon, n_H: int) -> mpmath.mpf:
    """``log((16/eps) 5^(2 sqrt(2 log_5 n_H) + 10) / n_H) - log(1/16)``.

    Negative exactly when the degree upper bound at ``alpha = n(1+eps)``
    falls below ``2 + 1/16``.
    """
    with mpmath.workdps(WORKING_DPS):
        t = _log5(n_H)
        return +(
            mpmath.log(256 / _mp(epsilon))
            + (2 * mpmath.sqrt(2 * t) + 10) * mpmath.log(5)
            - mpmath.log(n_H)
        )


def compute_K_epsilon(epsilon) -> int:
    """Least ``N >= 26`` from which every block size contradicts the degree bounds.

    Past ``n_H = 25`` the upper bound decreases strictly, so the first
    ``N`` with negative excess works for all larger sizes; it is found by
    doubling then bisection.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lo = 26
    if k_epsilon_excess(epsilon, lo) < 0:
        return lo
    hi = 2 * lo
    while k_epsilon_excess(epsilon, hi) >= 0:
        lo, hi = hi, 2 * hi
    # invariant: excess(lo) >= 0 > excess(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if k_epsilon_excess(epsilon, mid) < 0:
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------


_BLOCK_CHECKS = ("cor1_aset_size", "prop3_degree", "thm2_degree", "dh_nh_diameter", "lemma1_ball", "lemma2_reach", "degH_lower")


def ne_consistency_report(
    profile: StrategyProfile,
    config: GameConfig,
    *,
    verified: bool = False,
    evaluate_only: bool = False,
    k_values: Iterable[int] = (0, 1),
) -> list[BoundReport]:
    """Run every applicable check on one profile, sorted by check id then witness."""
    _require_ne(profile, config, verified, evaluate_only)
    k_values = tuple(k_values)
    reports: list[BoundReport] = []
    reports.extend(poa_checks(profile, config, evaluate_only=evaluate_only))
    reports.extend(prop4_distance_check(profile, config, evaluate_only=evaluate_only, verified=True))
    blocks = nontrivial_components(profile.graph)
    if not blocks:
        ctx = _ctx(config)
        for check_id in _BLOCK_CHECKS + ("prop1_delta",):
            ids = [f"{check_id}_k{k}" for k in k_values] if check_id == "lemma1_ball" else [check_id]
            reports.extend(BoundReport(c, Verdict.VACUOUS, note="no nontrivial biconnected component", **ctx) for c in ids)
    for block in blocks:
        reports.append(degH_lower_check(config, block, evaluate_only=evaluate_only))
        reports.append(prop3_check(profile, config, block, evaluate_only=evaluate_only))
        reports.append(thm2_check(config, block, evaluate_only=evaluate_only))
        reports.append(dh_nh_check(config, block, evaluate_only=evaluate_only))
        reports.extend(corollary1_check(profile, config, block, evaluate_only=evaluate_only, verified=True))
        for k in k_values:
            reports.append(lemma1_check(profile, config, block, k, evaluate_only=evaluate_only, verified=True))
        reports.extend(_lemma2_reports(profile, config, block, evaluate_only, True))
        u = _anchor(profile, block)
        tuples = [(v, a, b) for v, a, b in _pair_tuples(profile, block) if v != u]
        for v, a, b in tuples:
            reports.append(sell_two_buy_one_check(profile, config, u, v, a, b))
        if not tuples:
            reports.append(
                BoundReport("prop1_delta", Verdict.VACUOUS, note="no node buys two block links", **_ctx(config, block))
            )
    reports.sort(key=BoundReport.sort_key)
    return reports
