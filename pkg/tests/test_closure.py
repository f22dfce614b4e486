from fractions import Fraction
from itertools import combinations

import pytest

from pigeonlab import closure as C
from pigeonlab import graph as G
from pigeonlab.errors import PreconditionError
from pigeonlab.rng import Stream
from oracles import naive_boundary, naive_neighbourhood, naive_worst_boundary

TWO_STARS = G.BipartiteGraph(6, [(1, 2, 3), (4, 5, 6)])
TWINS = G.BipartiteGraph(2, [(1, 2), (1, 2)])


def naive_contained(adj, s, u, r, nu):
    if not s:
        return True
    return len(s) <= r and len(naive_boundary(adj, s) - set(u)) < nu * len(s)


def naive_maximal_sets(adj, t, r, nu):
    """All maximal (N(t), r, nu)-contained supersets of t."""
    m = len(adj)
    u = naive_neighbourhood(adj, t)
    rest = [i for i in range(1, m + 1) if i not in t]
    cont = []
    for k in range(0, r - len(t) + 1):
        for a in combinations(rest, k):
            s = frozenset(t) | frozenset(a)
            if naive_contained(adj, s, u, r, nu):
                cont.append(s)
    return [s for s in cont if not any(s < x for x in cont)]


def test_is_contained_examples():
    assert not C.is_contained(TWO_STARS, {1, 2}, {1, 2, 3}, 2, 1)
    assert C.is_contained(TWO_STARS, {1, 2}, {1, 2, 3}, 2, 2)
    assert C.is_contained(TWO_STARS, set(), set(), 1, Fraction(1, 3))
    g = G.sample_random(6, 8, 3, 1)
    t = {2, 5}
    assert C.is_contained(g, t, G.neighbourhood(g, t), 2, Fraction(1, 100))


def test_closure_examples():
    res = C.closure(TWO_STARS, {1}, 2, 1)
    assert res.closure_set == {1} and res.maximal_verified
    res = C.closure(TWINS, {1}, 2, Fraction(1, 2))
    assert res.closure_set == {1, 2} and res.trace == ((2,),)
    with pytest.raises(PreconditionError):
        C.closure(TWINS, {1, 2}, 1, 1)


def test_closure_matches_brute_force():
    checked = 0
    for seed in range(120):
        g = G.sample_random(8, 12, 3, seed)
        rng = Stream(seed, "closure-test")
        t = {x + 1 for x in rng.subset(8, rng.between(0, 2))}
        nu = Fraction(rng.between(1, 4), 2)
        for r in (3, 4):
            res = C.closure(g, t, r, nu)
            assert t <= res.closure_set and len(res.closure_set) <= r
            assert res.maximal_verified
            assert C.is_contained(g, res.closure_set, G.neighbourhood(g, t), r, nu)
            assert res.closure_set in naive_maximal_sets(g.adj, t, r, nu)
            checked += 1
    assert checked == 240


def test_closure_backends_agree():
    for seed in range(40):
        g = G.sample_random(12, 20, 4, seed)
        t = {1, 2}
        a = C.closure(g, t, 5, Fraction(3, 2), backend="python")
        b = C.closure(g, t, 5, Fraction(3, 2), backend="cython")
        assert a == b


def test_bounded_augmentation_not_verified():
    g = G.sample_random(20, 30, 3, 2)
    res = C.closure(g, {1}, 6, Fraction(2), k_aug=1)
    assert res.maximal_verified == (len(res.closure_set) >= 5 or len(res.closure_set) == 20)


def test_closure_fixed_u_idempotent():
    for seed in range(60):
        g = G.sample_random(9, 20, 4, seed)
        t = {1, 4}
        nu = Fraction(3, 2)
        res = C.closure(g, t, 5, nu)
        again = C.closure(g, res.closure_set, 5, nu, u=G.neighbourhood(g, t))
        assert again.closure_set == res.closure_set
        grown = C.closure(g, res.closure_set, 5, nu)
        assert grown.closure_set >= res.closure_set


def test_size_bound_examples():
    k13 = G.BipartiteGraph.complete(1, 3)
    assert C.validate_closure_size(k13, {1}, 1, 1, 3, 2)
    with pytest.raises(PreconditionError):
        C.validate_closure_size(k13, {1}, 1, 2, 3, 2)


def test_expansion_examples():
    g = G.sample_random(8, 30, 5, 3)
    rep = G.certify_boundary_expansion(g, 4, 2)
    assert rep.certified
    assert C.validate_closure_expansion(g, set(), 4, 2)
    # with r = 2 the closure {1, 2} exceeds r/2, so the lemma does not apply
    with pytest.raises(PreconditionError):
        C.validate_closure_expansion(TWINS, {1}, 2, Fraction(1, 2))
    res = C.closure(TWINS, {1}, 4, Fraction(1, 2))
    assert C.validate_closure_expansion(TWINS, {1}, 4, Fraction(1, 2), res)
    bounded = C.ClosureResult(frozenset({1}), (), False)
    with pytest.raises(PreconditionError):
        C.validate_closure_expansion(TWINS, {1}, 4, 1, bounded)


def test_lemmas_sweep_small():
    seen = 0
    seed = 0
    while seen < 60:
        seed += 1
        g = G.sample_random(9, 36, 6, seed)
        if not G.certify_boundary_expansion(g, 4, 2).certified:
            continue
        seen += 1
        for t in ({1}, {2, 3}):
            for nu in (Fraction(1), Fraction(3, 2)):
                res = C.closure(g, t, 4, nu)
                assert C.validate_closure_size(g, t, 4, nu, 6, 2, res)
                if 2 * len(res.closure_set) <= 4:
                    assert C.validate_closure_expansion(g, t, 4, nu, res)
                    # independent residual check
                    cl = res.closure_set
                    ncl = naive_neighbourhood(g.adj, cl)
                    adj = [() if i + 1 in cl else tuple(j for j in a if j not in ncl) for i, a in enumerate(g.adj)]
                    rest = [i for i in range(1, 10) if i not in cl]
                    worst = naive_worst_boundary(adj, 2, rest)
                    assert worst is None or worst[0] >= nu
