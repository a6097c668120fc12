import random
from collections import deque

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from ncgame.graph import StrategyProfile, build_profile

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def bfs_dist(n, edges, source):
    """Plain BFS used by the oracles; deliberately independent of the package."""
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = {source: 0}
    q = deque([source])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def random_connected_profile(rng: random.Random, n: int, extra: int) -> StrategyProfile:
    """Random spanning tree plus ``extra`` chords, each owned by a random endpoint."""
    order = list(range(n))
    rng.shuffle(order)
    pairs = set()
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        pairs.add((min(a, b), max(a, b)))
    free = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in pairs]
    rng.shuffle(free)
    pairs.update(free[:extra])
    arcs = [(a, b) if rng.random() < 0.5 else (b, a) for a, b in sorted(pairs)]
    return build_profile(n, arcs)


@st.composite
def profiles(draw, min_n=1, max_n=7):
    """Arbitrary reciprocal-free profiles, connected or not."""
    n = draw(st.integers(min_n, max_n))
    arcs = []
    for a in range(n):
        for b in range(a + 1, n):
            state = draw(st.integers(0, 2))
            if state == 1:
                arcs.append((a, b))
            elif state == 2:
                arcs.append((b, a))
    return build_profile(n, arcs)


@st.composite
def connected_profiles(draw, min_n=2, max_n=8):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    extra = draw(st.integers(0, n))
    return random_connected_profile(random.Random(seed), n, extra)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(criterion: int, ok: bool, detail: str) -> None:
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def a_set_oracle(profile, u, v, v1, v2):
    """A, A1, A2 by listing every shortest path to ``u`` (networkx)."""
    import networkx as nx

    h = nx.Graph()
    h.add_nodes_from(range(profile.n))
    h.add_edges_from(profile.graph.edges)
    a, a1, a2 = set(), set(), set()
    for z in range(profile.n):
        if z == v or not nx.has_path(h, z, u):
            continue
        preds = set()
        for path in nx.all_shortest_paths(h, z, u):
            if v not in path:
                preds = None
                break
            preds.add(path[path.index(v) - 1])
        if preds and preds <= {v1, v2}:
            a.add(z)
            if v1 in preds:
                a1.add(z)
            if v2 in preds:
                a2.add(z)
    return a, a1, a2


def owned_pairs(profile, edges_filter=None):
    """Every ``(v, v1, v2)`` with two distinct links bought by ``v``."""
    for v in range(profile.n):
        targets = sorted(t for t in profile.bought[v] if edges_filter is None or edges_filter(v, t))
        for i, a in enumerate(targets):
            for b in targets[i + 1 :]:
                yield v, a, b
