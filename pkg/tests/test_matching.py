import random

import pytest

from repeater_sched.matching import (
    GraphFormatError,
    Matching,
    WeightedGraph,
    brute_force_matching,
    max_weight_matching,
    validate_matching,
)

BIPARTITE = WeightedGraph(4, ((0, 2, 3.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 3.0)))
TRIANGLE = WeightedGraph(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))
NEGATIVE = WeightedGraph(2, ((0, 1, -2.0),))


def random_graph(rng: random.Random, n: int, density: float, lo=-1.0, hi=2.0) -> WeightedGraph:
    edges = [(u, v, rng.uniform(lo, hi)) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
    return WeightedGraph(n, tuple(edges))


def all_matchings(g):
    """Every matching of g (including non-positive edges), for counting checks."""
    edges = list(g.edges)

    def rec(k, used):
        if k == len(edges):
            yield []
            return
        yield from rec(k + 1, used)
        u, v, _ = edges[k]
        if u not in used and v not in used:
            for rest in rec(k + 1, used | {u, v}):
                yield [(u, v)] + rest

    return list(rec(0, frozenset()))


def test_bipartite_example_has_seven_matchings():
    assert len(all_matchings(BIPARTITE)) == 7


@pytest.mark.parametrize("solver", [max_weight_matching, brute_force_matching])
def test_examples(solver):
    m = solver(BIPARTITE)
    assert set(m.matched_edges) == {(0, 2), (1, 3)}
    assert m.total_weight == 6.0
    t = solver(TRIANGLE)
    assert len(t.matched_edges) == 1 and t.total_weight == 1.0
    n = solver(NEGATIVE)
    assert n.matched_edges == () and n.total_weight == 0.0
    e = solver(WeightedGraph(0))
    assert e == Matching()


def test_bipartite_path_example():
    m = max_weight_matching(BIPARTITE, left=[0, 1])
    assert set(m.matched_edges) == {(0, 2), (1, 3)}


def test_bipartite_path_rejects_same_side_edge():
    g = WeightedGraph(4, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)))
    with pytest.raises(GraphFormatError):
        max_weight_matching(g, left=[0, 1])


def test_oracle_equivalence_general():
    rng = random.Random(11)
    for k in range(600):
        g = random_graph(rng, rng.randint(0, 8), rng.choice([0.3, 0.6, 1.0]))
        m = max_weight_matching(g)
        b = brute_force_matching(g)
        assert validate_matching(g, m)
        assert m.total_weight == pytest.approx(b.total_weight, abs=1e-9)


def test_oracle_equivalence_bipartite():
    rng = random.Random(12)
    for _ in range(400):
        a, b = rng.randint(0, 4), rng.randint(0, 4)
        edges = [(i, a + j, rng.uniform(-1, 2)) for i in range(a) for j in range(b) if rng.random() < 0.7]
        g = WeightedGraph(a + b, tuple(edges))
        m = max_weight_matching(g, left=range(a))
        assert validate_matching(g, m)
        assert m.total_weight == pytest.approx(brute_force_matching(g).total_weight, abs=1e-9)


def test_scaling_covariance():
    rng = random.Random(5)
    for _ in range(100):
        g = random_graph(rng, rng.randint(2, 8), 0.6)
        c = rng.uniform(0.1, 10)
        gs = WeightedGraph(g.node_count, tuple((u, v, c * w) for u, v, w in g.edges))
        m, ms = max_weight_matching(g), max_weight_matching(gs)
        assert ms.total_weight == pytest.approx(c * m.total_weight, abs=1e-9 * max(1, c))
        # the unscaled optimum stays optimal after scaling
        rescored = sum(gs.weight_map()[e] for e in m.matched_edges)
        assert rescored == pytest.approx(ms.total_weight, abs=1e-9 * max(1, c))


def test_adding_edge_never_decreases():
    rng = random.Random(6)
    for _ in range(100):
        g = random_graph(rng, rng.randint(2, 8), 0.4)
        present = {(u, v) for u, v, _ in g.edges}
        missing = [(u, v) for u in range(g.node_count) for v in range(u + 1, g.node_count) if (u, v) not in present]
        if not missing:
            continue
        u, v = rng.choice(missing)
        bigger = WeightedGraph(g.node_count, g.edges + ((u, v, rng.uniform(-1, 2)),))
        assert max_weight_matching(bigger).total_weight >= max_weight_matching(g).total_weight - 1e-12


def test_no_nonpositive_edge_matched():
    rng = random.Random(7)
    for _ in range(200):
        g = random_graph(rng, rng.randint(2, 8), 1.0, lo=-2.0, hi=0.5)
        w = g.weight_map()
        assert all(w[e] > 0 for e in max_weight_matching(g).matched_edges)


def test_validate_matching():
    assert validate_matching(BIPARTITE, Matching())
    assert not validate_matching(BIPARTITE, Matching(((0, 2), (0, 3)), 4.0))
    assert not validate_matching(BIPARTITE, Matching(((0, 2),), 5.0))
    assert not validate_matching(BIPARTITE, Matching(((0, 1),), 0.0))
    assert validate_matching(BIPARTITE, Matching(((0, 2), (1, 3)), 6.0))


def test_brute_force_size_limit():
    with pytest.raises(ValueError):
        brute_force_matching(WeightedGraph(17))
    brute_force_matching(WeightedGraph(16))


@pytest.mark.parametrize(
    "doc",
    [
        {"nodes": 2},
        {"nodes": "2", "edges": []},
        {"nodes": 2, "edges": [[0, 2, 1.0]]},
        {"nodes": 2, "edges": [[0, 0, 1.0]]},
        {"nodes": 2, "edges": [[0, 1, 1.0], [1, 0, 2.0]]},
        {"nodes": 2, "edges": [[0, 1]]},
        {"nodes": 2, "edges": [[0, 1, "x"]]},
        [1, 2],
    ],
)
def test_graph_format_errors(doc):
    with pytest.raises(GraphFormatError):
        WeightedGraph.from_dict(doc)


def test_graph_json_round_trip():
    g = WeightedGraph.from_json('{"nodes": 4, "edges": [[0, 2, 3], [1, 3, 3.5]]}')
    assert WeightedGraph.from_dict(g.to_dict()) == g
