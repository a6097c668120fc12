from fractions import Fraction
from itertools import product

import pytest

from ncgame.game import GameConfig, is_exact_ne
from ncgame.graph import StrategyProfile, build_profile
from ncgame.search import (
    EquilibriumCatalog,
    SearchSpec,
    best_response_dynamics,
    code_of_profile,
    conjecture_scan,
    enumerate_profiles,
    exhaustive_ne_codes,
    find_all_ne,
    profile_count,
    profile_from_code,
    resolve_alpha_grid,
)


@pytest.mark.parametrize("n", range(1, 5))
def test_enumeration_is_complete_and_distinct(n):
    seen = [p.digest for p in enumerate_profiles(n)]
    assert len(seen) == 3 ** (n * (n - 1) // 2) == profile_count(n)
    assert len(set(seen)) == len(seen)


def test_enumeration_count_n5():
    assert sum(1 for _ in enumerate_profiles(5)) == 3**10


def test_codes_round_trip():
    for code in range(profile_count(4)):
        assert code_of_profile(profile_from_code(4, code)) == code
    with pytest.raises(ValueError):
        code_of_profile(build_profile(2, [(0, 1), (1, 0)]))


def test_reciprocal_states_hold_no_equilibria_n3():
    """Full space with reciprocal purchases allowed: nothing is lost by skipping them."""
    pairs = [(0, 1), (0, 2), (1, 2)]
    for alpha in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(12)):
        cfg = GameConfig(3, alpha)
        full = set()
        for states in product(range(4), repeat=3):
            arcs = []
            for (a, b), s in zip(pairs, states):
                arcs += {0: [], 1: [(a, b)], 2: [(b, a)], 3: [(a, b), (b, a)]}[s]
            p = build_profile(3, arcs)
            if is_exact_ne(p, cfg).is_ne:
                full.add(p.digest)
        cat = find_all_ne(SearchSpec(3, (alpha,), analyze=False))
        assert full == {e.digest for e in cat.entries}


@pytest.mark.parametrize("n", [3, 4])
def test_pruned_search_finds_same_classes(n):
    alphas = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(n), Fraction(4 * n))
    full = find_all_ne(SearchSpec(n, alphas, analyze=False))
    pruned = find_all_ne(SearchSpec(n, alphas, prune=True, analyze=False))
    for a in alphas:
        assert {e.profile_key for e in full.for_alpha(a)} == {e.profile_key for e in pruned.for_alpha(a)}
        assert {e.graph_key for e in full.for_alpha(a)} == {e.graph_key for e in pruned.for_alpha(a)}


def test_sharding_does_not_change_the_answer():
    alphas = (Fraction(1), Fraction(3), Fraction(9))
    single = exhaustive_ne_codes(4, alphas, shards=1)
    assert exhaustive_ne_codes(4, alphas, shards=7) == single
    assert exhaustive_ne_codes(4, alphas, workers=2, shards=3) == single


def test_catalog_reload_reverifies(tmp_path):
    cat = find_all_ne(SearchSpec(4, (Fraction(1, 2), Fraction(5)), seed=9))
    text = cat.to_jsonl()
    again = EquilibriumCatalog.from_jsonl(text)
    assert [e.digest for e in again.entries] == [e.digest for e in cat.entries]
    assert again.spec.seed == 9 and again.to_jsonl() == text
    # a sparse alpha=5 equilibrium relabelled as alpha=1/2 must be rejected
    lines = text.splitlines()
    entry = next(l for l in lines[1:] if '"alpha": "5"' in l).replace('"alpha": "5"', '"alpha": "1/2"')
    with pytest.raises(ValueError):
        EquilibriumCatalog.from_jsonl(lines[0] + "\n" + entry)
    with pytest.raises(ValueError):
        EquilibriumCatalog.from_jsonl(entry)


def test_clique_equilibria_at_small_alpha():
    cat = find_all_ne(SearchSpec(4, (Fraction(1, 2),), analyze=False))
    assert cat.entries and all(e.components == ((4, 1, 3),) for e in cat.entries)
    assert len(cat.dedup("graph")) == 1


def test_dynamics_fixed_point_and_convergence():
    cfg = GameConfig(4, 3)
    out = best_response_dynamics(StrategyProfile.empty(4), cfg)
    assert out.status == "converged"
    assert out.profile.graph.is_connected()
    assert is_exact_ne(out.profile, cfg).is_ne
    again = best_response_dynamics(out.profile, cfg)
    assert again.status == "converged" and again.rounds == 1 and again.profile == out.profile
    assert best_response_dynamics(StrategyProfile.empty(4), cfg).history == out.history


def test_random_schedule_is_seeded():
    cfg = GameConfig(5, 2)
    a = best_response_dynamics(StrategyProfile.empty(5), cfg, "random", seed=4)
    b = best_response_dynamics(StrategyProfile.empty(5), cfg, "random", seed=4)
    assert a.history == b.history


def test_round_robin_cycles_are_genuine():
    cfg = GameConfig(5, Fraction(3, 2))
    for code in range(0, profile_count(5), 997):
        out = best_response_dynamics(profile_from_code(5, code), cfg, max_rounds=30)
        if out.status == "cycle":
            replay = best_response_dynamics(profile_from_code(5, code), cfg, max_rounds=30)
            assert replay.history == out.history
            assert out.history[out.cycle_start] == out.history[-1]


def test_alpha_grid_terms():
    assert resolve_alpha_grid(["n-1", "n", "n+1", "2n", "4n", "1/2", "4n+1/2"], 5) == [
        4, 5, 6, 10, 20, Fraction(1, 2), Fraction(41, 2)
    ]
    assert resolve_alpha_grid(["n", "5"], 5) == [5]
    with pytest.raises(ValueError):
        resolve_alpha_grid(["n-1"], 1)
    with pytest.raises(ValueError):
        resolve_alpha_grid(["0.5"], 3)


def test_empty_grid_gives_empty_report():
    rep = conjecture_scan([3, 4], [])
    assert rep.rows == [] and rep.headline == []


def test_scan_counts():
    rep = conjecture_scan([4], ["1/2", "5"])
    small, large = rep.rows
    assert small.nontree_ne_count > 0 and small.tree_ne_count == 0
    assert large.nontree_ne_count == 0 and large.ne_count == large.tree_ne_count == 56
    assert small.profiles_checked == 3**6
    assert rep.headline == []


def test_exhaustive_limit():
    with pytest.raises(ValueError):
        SearchSpec(7, (Fraction(1),))
    with pytest.raises(ValueError):
        SearchSpec(4, (Fraction(1),), mode="annealing")
