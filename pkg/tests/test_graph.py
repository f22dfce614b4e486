from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from pigeonlab import graph as G
from pigeonlab import kernels
from pigeonlab.errors import BudgetError, ParameterError, ParseError
from oracles import naive_boundary, naive_neighbourhood, naive_worst_boundary


def adj_graph(n, *adj):
    return G.BipartiteGraph(n, adj)


def test_sample_trivial_cases():
    assert G.sample_random(3, 2, 2, 5) == G.BipartiteGraph.complete(3, 2)
    assert G.sample_random(1, 5, 5, 11).adj == ((1, 2, 3, 4, 5),)
    a = G.sample_random(100, 20, 4, 7)
    b = G.sample_random(100, 20, 4, 7)
    assert a.to_text() == b.to_text()
    assert all(len(x) == 4 for x in a.adj)


def test_sample_prefix_and_errors():
    big = G.sample_random(10, 12, 3, 99)
    small = G.sample_random(6, 12, 3, 99)
    assert big.adj[:6] == small.adj
    with pytest.raises(ParameterError):
        G.sample_random(3, 2, 3, 0)


def test_sample_golden():
    # frozen output of the documented generator; guards cross-version drift
    g = G.sample_random(4, 10, 3, 2024)
    assert g.to_text() == GOLDEN_SAMPLE


GOLDEN_SAMPLE = "4 10 3\n4 5 6\n2 7 9\n4 9 10\n6 7 8\n"


def test_boundary_and_neighbourhood_examples():
    k13 = G.BipartiteGraph.complete(1, 3)
    assert G.boundary(k13, {1}) == {1, 2, 3}
    assert G.neighbourhood(k13, {1}) == {1, 2, 3}
    assert G.neighbourhood(k13, set()) == set()
    g = adj_graph(2, (1, 2), (1, 2))
    assert G.boundary(g, {1, 2}) == set()
    h = adj_graph(3, (1, 2), (2, 3))
    assert G.boundary(h, {1, 2}) == {1, 3}
    assert G.neighbourhood(h, {1, 2}) == {1, 2, 3}
    with pytest.raises(ParameterError):
        G.boundary(h, {3})


def test_invalid_graphs():
    with pytest.raises(ParameterError):
        adj_graph(3, (2, 1))
    with pytest.raises(ParameterError):
        adj_graph(3, (1, 1))
    with pytest.raises(ParameterError):
        adj_graph(3, (4,))
    with pytest.raises(ParameterError):
        adj_graph(3, ())


def test_certify_examples():
    rep = G.certify_boundary_expansion(G.BipartiteGraph.complete(1, 3), 1, 3)
    assert rep.certified and rep.worst_ratio == 3
    rep = G.certify_boundary_expansion(adj_graph(2, (1, 2), (1, 2)), 2, 1)
    assert not rep.certified and rep.worst_set == (1, 2) and rep.worst_ratio == 0


@pytest.mark.parametrize("backend", ["python", "cython"])
def test_certify_matches_naive(backend):
    if backend == "cython" and not kernels.HAVE_COMPILED:
        pytest.skip("compiled kernels unavailable")
    for seed in range(40):
        g = G.sample_random(12, 16, 4, seed)
        for r in (1, 3, 4):
            rep = G.certify_boundary_expansion(g, r, Fraction(5, 2), backend=backend)
            ratio, s = naive_worst_boundary(g.adj, r)
            assert (rep.worst_ratio, rep.worst_set) == (ratio, s)
            assert rep.certified == (ratio >= Fraction(5, 2))


def test_certify_budget():
    g = G.sample_random(30, 40, 3, 1)
    with pytest.raises(BudgetError) as exc:
        G.certify_boundary_expansion(g, 10, 1, cap=1000)
    assert exc.value.estimate == G.enumeration_size(30, 10)


def test_certify_monotone_in_r():
    for seed in range(20):
        g = G.sample_random(9, 14, 4, seed)
        big = G.certify_boundary_expansion(g, 4, 2)
        for r in range(1, 4):
            small = G.certify_boundary_expansion(g, r, 2)
            assert small.worst_ratio >= big.worst_ratio
            if big.certified:
                assert small.certified


def test_vertex_expansion_implies_boundary():
    hits = 0
    for seed in range(60):
        g = G.sample_random(8, 40, 8, seed)
        xi = Fraction(1, 4)
        v = G.certify_vertex_expansion(g, 3, (1 - xi) * 8)
        if v.certified:
            hits += 1
            assert G.certify_boundary_expansion(g, 3, (1 - 2 * xi) * 8).certified
    assert hits > 0


def test_monte_carlo():
    k22 = G.BipartiteGraph.complete(2, 2)
    rep = G.estimate_expansion_monte_carlo(k22, 2, 1, 100, 3)
    assert rep.worst_ratio == 0 and not rep.certified
    g = G.sample_random(10, 14, 3, 4)
    a = G.estimate_expansion_monte_carlo(g, 3, 1, 50, 8)
    assert a == G.estimate_expansion_monte_carlo(g, 3, 1, 50, 8)
    exact = G.certify_boundary_expansion(g, 3, 1)
    assert a.worst_ratio >= exact.worst_ratio


def test_monte_carlo_singletons_found():
    # r=1 with trials = 20 m: all singletons seen with overwhelming probability
    misses = 0
    for seed in range(100):
        g = G.sample_random(10, 12, 3, seed)
        single = min(Fraction(len(a)) for a in g.adj)
        rep = G.estimate_expansion_monte_carlo(g, 1, 1, 200, seed)
        misses += rep.worst_ratio > single
    assert misses <= 1


def test_unique_neighbour_inequality_examples():
    assert G.check_unique_neighbour_inequality(G.BipartiteGraph.complete(1, 3), {1})
    assert G.check_unique_neighbour_inequality(adj_graph(2, (1, 2), (1, 2)), {1, 2})


def test_unique_neighbour_inequality_sweep():
    rng_graphs = [G.sample_random(7, 9, d, s) for s in range(100) for d in (2, 4)]
    count = 0
    for g in rng_graphs:
        for k in (1, 3, 5):
            for s in list(combinations(range(1, 8), k))[:5]:
                assert G.check_unique_neighbour_inequality(g, s)
                assert naive_boundary(g.adj, s) <= naive_neighbourhood(g.adj, s)
                count += 1
    assert count >= 1000


def test_masked_view():
    k22 = G.BipartiteGraph.complete(2, 2)
    assert G.remove_vertices(k22).adj == k22.adj
    m = G.remove_vertices(k22, holes={1})
    assert m.degree(1) == m.degree(2) == 1
    h = adj_graph(3, (1, 2), (2, 3))
    mh = G.remove_vertices(h, holes={2})
    assert G.boundary(mh, {1, 2}) == {1, 3}
    assert h.adj == ((1, 2), (2, 3))
    mp = G.remove_vertices(h, pigeons={1})
    assert list(mp.pigeons) == [2] and mp.hole_neighbours(2) == (2,)


def test_masked_certify_matches_naive():
    for seed in range(20):
        g = G.sample_random(10, 14, 4, seed)
        mg = G.remove_vertices(g, pigeons={2, 5}, holes={1, 3, 7})
        rep = G.certify_boundary_expansion(mg, 3, 1)
        ratio, s = naive_worst_boundary(mg.adj, 3, mg.pigeons)
        assert (rep.worst_ratio, rep.worst_set) == (ratio, s)


def test_expander_experiment():
    import math

    res = G.expander_probability_experiment(16, 16, 16, Fraction(1, 4), math.e**8, 5, 1, log_chi=8)
    assert res.r == 1 and res.r_clamped and res.fraction == 1
    res = G.expander_probability_experiment(20, 16, 4, Fraction(1, 8), 2, 30, 1)
    assert res.fraction is not None and 0 <= res.fraction <= 1
    assert res.hypotheses["xi < 1/2"] and not res.hypotheses["xi ln chi >= 2"]
    res = G.expander_probability_experiment(5, 5, 2, Fraction(1, 8), 2, 0, 1)
    assert res.fraction is None and res.notes


def test_perfect_matching():
    assert G.exists_perfect_matching(G.BipartiteGraph.complete(2, 2))
    assert not G.exists_perfect_matching(G.BipartiteGraph.complete(1, 2))
    assert not G.exists_perfect_matching(adj_graph(2, (1,), (1,)))


def test_graph_file_round_trip(tmp_path):
    g = G.sample_random(6, 9, 3, 42)
    p = tmp_path / "g.txt"
    G.write_graph(g, p)
    assert p.read_bytes() == g.to_text().encode()
    assert G.read_graph(p) == g
    commented = "# hello\n" + g.to_text().replace("\n", "\n# mid\n", 1)
    assert G.parse_graph(commented) == g


def test_graph_parse_errors():
    with pytest.raises(ParseError):
        G.parse_graph("1 2 2\n1 2")
    with pytest.raises(ParseError):
        G.parse_graph("2 2 2\n1 2\n")
    with pytest.raises(ParseError):
        G.parse_graph("1 2 1\n1 2\n")
    with pytest.raises(ParseError):
        G.parse_graph("1 2 2\n1 x\n")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 10), st.data())
def test_boundary_property(m, n, data):
    delta = data.draw(st.integers(1, n))
    g = G.sample_random(m, n, delta, data.draw(st.integers(0, 2**64 - 1)))
    s = data.draw(st.sets(st.integers(1, m)))
    assert G.boundary(g, s) == naive_boundary(g.adj, s)
    assert G.neighbourhood(g, s) == naive_neighbourhood(g.adj, s)
