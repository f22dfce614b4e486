import io
from math import comb

import pytest

from pigeonlab import formula as F
from pigeonlab import graph as G
from pigeonlab.errors import ParameterError, ParseError
from pigeonlab.formula import Clause
from oracles import brute_force_sat


def lits(f):
    return [c.lits for c in f.clauses]


def test_php_examples():
    k21 = G.BipartiteGraph.complete(2, 1)
    f = F.encode_php(k21)
    assert lits(f) == [(1,), (2,), (-1, -2)] and f.num_vars == 2
    f = F.encode_php(G.BipartiteGraph.complete(3, 2))
    assert len(f) == 9 and f.num_vars == 6
    f = F.encode_php(G.BipartiteGraph(2, [(1,), (2,)]))
    assert len(f) == 2


def test_fphp_examples():
    assert len(F.encode_fphp(G.BipartiteGraph.complete(3, 2))) == 12
    assert lits(F.encode_fphp(G.BipartiteGraph.complete(2, 1))) == lits(F.encode_php(G.BipartiteGraph.complete(2, 1)))
    f = F.encode_fphp(G.BipartiteGraph(4, [(1, 2, 3, 4)]))
    assert sum(t[0] == "functionality_axiom" for t in f.tags) == 6


def test_pm_examples():
    f = F.encode_pm(G.BipartiteGraph.complete(2, 2))
    assert len(f) == 8 and brute_force_sat(f.num_vars, lits(f))
    f = F.encode_pm(G.BipartiteGraph.complete(1, 2))
    assert len(f) == 4 and not brute_force_sat(f.num_vars, lits(f))


def test_pm_dedup():
    f = F.encode_pm(G.BipartiteGraph.complete(1, 1))
    assert lits(f) == [(1,)]


def test_clause_counts_formula():
    for seed in range(30):
        g = G.sample_random(7, 6, 3, seed)
        f = F.encode_fphp(g)
        expect = g.m + sum(comb(g.hole_degree(j), 2) for j in g.holes) + sum(comb(g.degree(i), 2) for i in g.pigeons)
        assert len(f) == expect
        assert len(set(f.clauses)) == len(f.clauses)


def test_pm_sat_iff_perfect_matching_small():
    for seed in range(80):
        g = G.sample_random(4, 4, 2, seed)
        f = F.encode_pm(g)
        assert brute_force_sat(f.num_vars, lits(f)) == G.exists_perfect_matching(g)


def test_varmap_order():
    g = G.sample_random(5, 7, 3, 9)
    vm = F.VarMap(g)
    edges = g.edges()
    assert edges == sorted(edges)
    assert [vm.var(i, j) for i, j in edges] == list(range(1, len(edges) + 1))
    assert vm.edge(3) == edges[2]
    with pytest.raises(ParameterError):
        vm.var(1, 99)


def test_clause_basics():
    c = Clause([3, -1, 2])
    assert c.lits == (-1, 2, 3) and not c.tautology
    assert Clause([1, -1]).tautology
    assert Clause([-1, 1]).lits == (-1, 1)
    assert F.EMPTY.is_empty()


def test_matching_to_assignment():
    k12 = G.BipartiteGraph.complete(1, 2)
    assert F.matching_to_assignment(k12, {1: 1}) == {1: 1, 2: 0}
    assert F.matching_to_assignment(k12, {}) == {}
    k22 = G.BipartiteGraph.complete(2, 2)
    assert F.matching_to_assignment(k22, {1: 2}) == {2: 1, 1: 0}
    with pytest.raises(ParameterError):
        F.matching_to_assignment(k22, {1: 1, 2: 1})


def test_restrict_and_status():
    c = Clause([1, -3])
    assert F.restrict(c, {3: 1}) == Clause([1])
    assert F.restrict(c, {1: 1}) is F.SATISFIED
    assert F.restrict(Clause([1]), {1: 0}) == F.EMPTY
    assert F.clause_satisfied(c, {3: 1}) == F.UNDETERMINED
    assert F.clause_satisfied(c, {1: 1}) == F.SATISFIED
    assert F.clause_satisfied(Clause([1]), {1: 0}) == F.FALSIFIED
    f = F.encode_php(G.BipartiteGraph.complete(2, 1))
    rf = F.restrict(f, {1: 1})
    assert lits(rf) == [(2,), (-2,)]


def test_matched_axioms_satisfied():
    # any matching of all pigeons of an FPHP axiom satisfies it
    import itertools

    g = G.sample_random(5, 6, 3, 4)
    f = F.encode_fphp(g)
    vm = F.VarMap(g)
    for c, tag in zip(f.clauses, f.tags):
        pigeons = sorted({vm.edge(abs(x))[0] for x in c.lits})
        for holes in itertools.product(*[g.neighbours(i) for i in pigeons]):
            if len(set(holes)) < len(holes):
                continue
            phi = dict(zip(pigeons, holes))
            assert F.clause_satisfied(c, phi, g) == F.SATISFIED


def test_dimacs_example_and_round_trip(tmp_path):
    f = F.encode_php(G.BipartiteGraph.complete(2, 1))
    text = F.dimacs_text(f)
    body = text.split("\n")
    assert body[0].startswith("c graph-sha256 ")
    assert "p cnf 2 3\n1 0\n2 0\n-1 -2 0\n" in text
    for seed in range(100):
        g = G.sample_random(5, 4, 2, seed)
        f = F.encode(g, ["php", "fphp", "pm"][seed % 3])
        t1 = F.write_dimacs(f, tmp_path / "a.cnf", seed=seed)
        f2 = F.read_dimacs(tmp_path / "a.cnf")
        buf = io.StringIO()
        F.write_dimacs(f2, buf)
        assert buf.getvalue() == t1
        assert f2.clauses == f.clauses


@pytest.mark.parametrize(
    "text",
    [
        "p cnf 2 1\n1 0 2\n",
        "p cnf 2 1\n1 2\n",
        "p cnf 2 2\n1 0\n",
        "1 0\n",
        "p cnf x 1\n1 0\n",
        "p cnf 1 1\n3 0\n",
    ],
)
def test_dimacs_errors(text):
    with pytest.raises(ParseError):
        F.parse_dimacs(text)


def test_dimacs_error_line_number():
    with pytest.raises(ParseError) as exc:
        F.parse_dimacs("c x\np cnf 2 2\n1 0\n1 0 junk\n")
    assert exc.value.line == 4
