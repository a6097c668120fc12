from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, strategies as st

from conftest import a_set_oracle, connected_profiles, owned_pairs
from ncgame.bounds import (
    DEGREE_LOWER_BOUND,
    BoundReport,
    NotEquilibriumError,
    Verdict,
    compute_a_set,
    compute_K_epsilon,
    corollary1_check,
    degH_lower_check,
    dh_nh_bound,
    k_epsilon_excess,
    lemma1_check,
    lemma2_check,
    ne_consistency_report,
    poa_checks,
    prop1_bound,
    prop2_bound,
    prop3_degree_bound,
    sell_two_buy_one_check,
    thm2_degree_bound,
)
from ncgame.game import Deviation, GameConfig, delta_cost
from ncgame.graph import UNREACHABLE, build_profile, nontrivial_components

FROZEN_K = {
    Fraction(1, 10): 2067186372455417556227,
    Fraction(1, 2): 235565727084414105846,
    Fraction(1): 91939640397795014765,
    Fraction(10): 3934732760895267197,
}


# -- A sets -----------------------------------------------------------------


def test_a_set_on_star_with_pendants():
    # centre 0; leaf 1 bought links to the pendants 4 and 5
    p = build_profile(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)])
    r = compute_a_set(p, 0, 1, 4, 5)
    assert (r.a1, r.a2, r.members) == ({4}, {5}, {4, 5})
    assert r.crossing_case == 2 and r.l == UNREACHABLE


def test_a_set_empty_when_links_point_towards_anchor():
    p = build_profile(4, [(2, 1), (2, 3), (0, 1), (0, 3)])  # C4: 0-1-2-3-0
    r = compute_a_set(p, 0, 2, 1, 3)
    assert r.members == r.a1 == r.a2 == frozenset()


def test_a_set_rejects_links_not_bought_by_v():
    p = build_profile(3, [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        compute_a_set(p, 0, 1, 0, 2)


def test_a_i_emptiness_is_not_decided_by_distance_alone():
    # v1 = 2 lies one step further from u than v does, yet has a second
    # shortest route to u through 3, so A^1 is empty.
    p = build_profile(5, [(0, 1), (1, 2), (1, 4), (2, 3), (3, 0)])
    r = compute_a_set(p, 0, 1, 2, 4)
    dist = p.graph.distances
    assert dist[0, 2] == dist[0, 1] + 1
    assert r.a1 == frozenset() and r.a2 == {4}


@given(connected_profiles(min_n=3, max_n=8), st.data())
def test_a_set_matches_path_enumeration(p, data):
    tuples = list(owned_pairs(p))
    assume(tuples)
    v, v1, v2 = data.draw(st.sampled_from(tuples))
    u = data.draw(st.integers(0, p.n - 1))
    r = compute_a_set(p, u, v, v1, v2)
    a, a1, a2 = a_set_oracle(p, u, v, v1, v2)
    assert (set(r.members), set(r.a1), set(r.a2)) == (a, a1, a2)


@given(connected_profiles(min_n=3, max_n=8), st.data())
def test_a_set_invariants(p, data):
    tuples = list(owned_pairs(p))
    assume(tuples)
    v, v1, v2 = data.draw(st.sampled_from(tuples))
    u = data.draw(st.integers(0, p.n - 1))
    r = compute_a_set(p, u, v, v1, v2)
    g, dist = p.graph, p.graph.distances
    assert v not in r.members
    assert r.members == r.a1 | r.a2
    for vi, part in ((v1, r.a1), (v2, r.a2)):
        assert bool(part) == (vi in r.members)
        if dist[u, vi] in (dist[u, v] - 1, dist[u, v]):
            assert not part
        if part:
            sub = g.induced(part)
            seen, stack = {vi}, [vi]
            while stack:
                for y in sub[stack.pop()]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            assert seen == part


def _links(t):
    return {frozenset((t[0], t[1])), frozenset((t[0], t[2]))}


@given(connected_profiles(min_n=4, max_n=8))
def test_a_sets_of_disjoint_link_pairs_are_disjoint(p):
    tuples = list(owned_pairs(p))
    dist = p.graph.distances
    for u in range(p.n):
        sets = {t: compute_a_set(p, u, *t).members for t in tuples}
        for t1 in tuples:
            for t2 in tuples:
                if not _links(t1) & _links(t2) and dist[u, t1[0]] == dist[u, t2[0]]:
                    assert not sets[t1] & sets[t2]


def test_a1_a2_edges_may_leave_the_block():
    # A1 and A2 share 6 and its pendant 0, so the A1-A2 edge (0, 6) is outside H
    edges = [(0, 6), (1, 6), (8, 1), (2, 3), (2, 4), (2, 7), (3, 6), (8, 3), (4, 5), (5, 8)]
    p = build_profile(9, edges)
    r = compute_a_set(p, 5, 8, 1, 3)
    (block,) = nontrivial_components(p.graph)
    assert 0 not in block.nodes and (0, 6) in r.crossings_12
    assert all(x in block.nodes and y in block.nodes for x, y in r.crossings_out)


@given(connected_profiles(min_n=3, max_n=9), st.data())
def test_block_crossings_stay_in_block(p, data):
    blocks = nontrivial_components(p.graph)
    assume(blocks)
    block = data.draw(st.sampled_from(blocks))
    in_block = lambda a, b: (min(a, b), max(a, b)) in block.edges
    tuples = list(owned_pairs(p, in_block))
    assume(tuples)
    v, v1, v2 = data.draw(st.sampled_from(tuples))
    u = data.draw(st.sampled_from([z for z in block.sorted_nodes() if z != v]))
    r = compute_a_set(p, u, v, v1, v2)
    crossings = list(r.crossings_out) + [e for part in r.crossings_out_i for e in part]
    assert all(x in block.nodes and y in block.nodes for x, y in crossings)
    if r.crossing_case == 1 and r.l != UNREACHABLE:
        assert r.l <= 2 * block.diameter


# -- the sell-two-buy-one deviation ---------------------------------------------


def test_prop1_hand_instance():
    # 0-1 owned by 0; 1 buys 2 and 3; 2-3 adjacent; 2-4-5-0 is a longer detour
    p = build_profile(6, [(0, 1), (1, 2), (1, 3), (2, 3), (2, 4), (4, 5), (5, 0)])
    cfg = GameConfig(6, 7)
    r = compute_a_set(p, 0, 1, 2, 3)
    assert (r.a1, r.a2, r.crossing_case, r.l) == ({2}, {3}, 1, 1)
    assert r.crossings_out == ((2, 4),)
    dm = p.graph.distances
    bound = prop1_bound(p, cfg, r, (2, 4))
    assert bound == -7 + 6 + dm.row_sum(0) - dm.row_sum(1) + (2 * 1 + 1) * 2
    exact = delta_cost(p, cfg, Deviation.sell_two_buy_one(p, 1, 2, 3, 0))
    assert exact <= bound
    rep = sell_two_buy_one_check(p, cfg, 0, 1, 2, 3)
    assert rep.check_id == "prop1_delta" and rep.verdict is Verdict.HOLDS
    assert (rep.lhs, rep.rhs) == (exact, bound)
    assert prop1_bound(p, cfg, r, (5, 0)) is None
    assert prop2_bound(p, cfg, r, {}) is None


def test_prop2_on_k4():
    p = build_profile(4, [(0, 1), (1, 2), (1, 3), (0, 2), (0, 3), (2, 3)])
    cfg = GameConfig(4, 5)
    r = compute_a_set(p, 0, 1, 2, 3)
    assert r.members == frozenset()
    assert prop2_bound(p, cfg, r, {}) == -5 + 4
    rep = sell_two_buy_one_check(p, cfg, 0, 1, 2, 3)
    assert rep.check_id == "prop2_delta"
    assert (rep.lhs, rep.rhs, rep.verdict) == (-5 + 2, -5 + 4, Verdict.HOLDS)


def test_anchor_equal_to_v_is_inapplicable():
    p = build_profile(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
    assert sell_two_buy_one_check(p, GameConfig(4, 5), 0, 0, 1, 2).verdict is Verdict.INAPPLICABLE


@given(connected_profiles(min_n=4, max_n=9), st.data(), st.integers(1, 40))
def test_sell_two_buy_one_bounds_are_sound(p, data, alpha):
    tuples = list(owned_pairs(p))
    assume(tuples)
    v, v1, v2 = data.draw(st.sampled_from(tuples))
    u = data.draw(st.integers(0, p.n - 1))
    rep = sell_two_buy_one_check(p, GameConfig(p.n, alpha), u, v, v1, v2)
    assert rep.verdict in (Verdict.HOLDS, Verdict.INAPPLICABLE)


# -- evaluators ---------------------------------------------------------------


def test_prop3_evaluator():
    assert prop3_degree_bound(100, 200, 10, 3) == Fraction(106, 5)
    assert prop3_degree_bound(100, 100, 10, 3) is None


def test_float_evaluators():
    assert dh_nh_bound(1) == 5**5
    assert thm2_degree_bound(10, 10, 5) is None
    a, b = thm2_degree_bound(10, 20, 1000), thm2_degree_bound(10, 40, 1000)
    assert a > b > 2


@pytest.mark.parametrize("eps,expected", sorted(FROZEN_K.items()))
def test_k_epsilon_frozen_and_tight(eps, expected):
    k = compute_K_epsilon(eps)
    assert k == expected
    assert k_epsilon_excess(eps, k) < 0 <= k_epsilon_excess(eps, k - 1)


def test_k_epsilon_excess_decreases_after_25():
    values = [k_epsilon_excess(1, n) for n in (26, 100, 10**4, 10**8, 10**16)]
    assert values == sorted(values, reverse=True)
    with pytest.raises(ValueError):
        compute_K_epsilon(0)


# -- checkers -----------------------------------------------------------------


def test_report_on_tree_equilibrium_is_vacuous_where_block_free():
    p = build_profile(3, [(1, 0), (1, 2)])
    reports = ne_consistency_report(p, GameConfig(3, 5))
    assert reports == sorted(reports, key=BoundReport.sort_key)
    by_id = {r.check_id: r for r in reports}
    assert by_id["poa_tree"].verdict is Verdict.HOLDS
    assert by_id["poa_diameter"].verdict is Verdict.HOLDS
    for cid in ("cor1_aset_size", "prop3_degree", "thm2_degree", "degH_lower", "lemma1_ball_k0", "prop1_delta"):
        assert by_id[cid].verdict is Verdict.VACUOUS
    assert not any(r.verdict is Verdict.VIOLATED for r in reports)


def test_k4_clique_equilibrium():
    p = build_profile(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    cfg = GameConfig(4, Fraction(1, 2))
    by_id = {}
    for r in ne_consistency_report(p, cfg):
        by_id.setdefault(r.check_id, r)
    assert by_id["degH_lower"].verdict is Verdict.HOLDS
    assert by_id["degH_lower"].lhs == 3 and by_id["degH_lower"].rhs == DEGREE_LOWER_BOUND
    for cid in ("prop3_degree", "thm2_degree", "dh_nh_diameter", "cor1_aset_size", "prop4_hanging_distance"):
        assert by_id[cid].verdict is Verdict.INAPPLICABLE


def test_checks_refuse_non_equilibria_unless_evaluating():
    p = build_profile(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)])
    cfg = GameConfig(5, 6)
    (block,) = nontrivial_components(p.graph)
    with pytest.raises(NotEquilibriumError):
        ne_consistency_report(p, cfg)
    with pytest.raises(NotEquilibriumError):
        corollary1_check(p, cfg, block)
    reports = ne_consistency_report(p, cfg, evaluate_only=True)
    assert all(r.verdict is not Verdict.HOLDS for r in reports if not r.check_id.startswith(("prop1", "prop2", "cor1_s")))


def test_degree_lower_bound_fails_on_small_cycles():
    tri = build_profile(3, [(0, 1), (1, 2), (2, 0)])
    (block,) = nontrivial_components(tri.graph)
    rep = degH_lower_check(GameConfig(3, 1), block)
    assert rep.verdict is Verdict.VIOLATED and rep.lhs == 2


def test_lemmas_outside_their_range():
    p = build_profile(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    cfg = GameConfig(4, 16)
    (block,) = nontrivial_components(p.graph)
    assert lemma1_check(p, cfg, block, 1, verified=True).verdict is Verdict.INAPPLICABLE
    assert lemma2_check(p, GameConfig(4, 2), block, 0, verified=True).verdict is Verdict.VACUOUS
    with pytest.raises(ValueError):
        lemma1_check(p, GameConfig(4, 2), block, -1, verified=True)


def test_poa_checks_and_csv_row():
    p = build_profile(4, [(1, 0), (2, 0), (3, 0)])
    reps = poa_checks(p, GameConfig(4, 5))
    assert [r.check_id for r in reps] == ["poa_diameter", "poa_tree"]
    assert reps[0].csv_row() == ["poa_diameter", "4", "5", "", "", "1", "3", "holds"]
    assert reps[0].as_dict()["verdict"] == "holds"


def test_working_precision_suffices():
    # signs of the size-constant excess survive a much higher precision
    with mpmath.workdps(100):
        for eps, k in FROZEN_K.items():
            assert k_epsilon_excess(eps, k) < 0 <= k_epsilon_excess(eps, k - 1)
