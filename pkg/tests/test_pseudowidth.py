import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pigeonlab import formula as F
from pigeonlab import graph as G
from pigeonlab import pseudowidth as P
from pigeonlab.errors import ParameterError, PreconditionError
from pigeonlab.resolution import ResolutionProof, check_proof, prove_dpll
from pigeonlab.rng import Stream

K23 = G.BipartiteGraph.complete(2, 3)


def naive_nc(g, c, i):
    """Satisfying holes by direct evaluation of the single-edge matching."""
    vm = F.VarMap(g)
    return {
        j
        for j in g.neighbours(i)
        if F.clause_status(c, F.matching_to_assignment(g, {i: j}, vm)) == F.SATISFIED
    }


def random_clause(g, rng, k):
    n_vars = len(F.VarMap(g))
    vs = rng.sample(range(1, n_vars + 1), min(k, n_vars))
    return F.Clause(v if rng.random() < 0.5 else -v for v in vs)


def test_neighbourhood_examples():
    c = F.Clause([1, -2])  # x11 or not x12
    assert P.clause_pigeon_neighbourhood(K23, c, 1) == {1, 3}
    assert P.clause_pigeon_neighbourhood(K23, c, 2) == set()
    assert P.clause_pigeon_degree(K23, F.Clause([-5]), 2) == 2


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 8))
def test_degree_matches_brute_force(seed, k):
    rng = random.Random(seed)
    g = G.sample_random(4, 6, 3, seed % 97)
    c = random_clause(g, rng, k)
    idx = P.PigeonIndex(g)
    degs = idx.degrees(c)
    for i in g.pigeons:
        nc = naive_nc(g, c, i)
        assert idx.neighbourhood(c, i) == nc
        assert degs.get(i, 0) == len(nc)
        if any(x < 0 and idx.vm.edge(-x)[0] == i for x in c.lits):
            assert len(nc) >= g.degree(i) - 1


def test_monotone_under_superset():
    rng = random.Random(3)
    g = G.sample_random(5, 8, 4, 5)
    prof = P.WeightProfile([3] * 5, [1] * 5)
    for _ in range(200):
        c = random_clause(g, rng, 4)
        d = F.Clause(c.literal_set | random_clause(g, rng, 3).literal_set)
        for i in g.pigeons:
            assert P.clause_pigeon_neighbourhood(g, c, i) <= P.clause_pigeon_neighbourhood(g, d, i)
        assert P.heavy_sets(g, c, prof).super_heavy <= P.heavy_sets(g, d, prof).super_heavy


def test_heavy_sets_examples():
    prof = P.WeightProfile((2, 2), (1, 1))
    hp = P.heavy_sets(K23, F.Clause([1, 2]), prof)
    assert hp.super_heavy == {1} and hp.heavy == {1}
    hp = P.heavy_sets(K23, F.EMPTY, prof)
    assert not hp.super_heavy and not hp.heavy and hp.pseudo_width == 0


def test_fphp_axiom_pigeons_heavy():
    g = G.sample_random(6, 10, 4, 7)
    f = F.encode_fphp(g)
    prof = P.WeightProfile([g.degree(i) for i in g.pigeons], [1] * 6)
    idx = P.PigeonIndex(g)
    for c in f.clauses:
        hp = P.heavy_sets(g, c, prof, idx)
        assert set(idx.split(c)) <= hp.heavy


def test_pseudo_width_examples_and_two_pass():
    prof = P.WeightProfile((2, 2), (1, 1))
    assert P.pseudo_width(K23, ResolutionProof([]), prof) == 0
    from pigeonlab.resolution import ProofLine
    assert P.pseudo_width(K23, ResolutionProof([ProofLine(1, F.EMPTY)]), prof) == 0
    g = G.BipartiteGraph.complete(5, 4)
    res = prove_dpll(F.encode_php(g))
    prof = P.WeightProfile([3] * 5, [Fraction(3, 2)] * 5)
    got = P.pseudo_width(g, res.proof, prof)
    want = 0
    for ln in res.proof.lines:
        cnt = 0
        for i in g.pigeons:
            if len(naive_nc(g, ln.clause, i)) >= 3 - Fraction(3, 2):
                cnt += 1
        want = max(want, cnt)
    assert got == want


def test_r_vector_examples():
    assert P.r_coordinate(3, 2, 1) == 2
    assert P.r_coordinate(5, 5, 2) == 1
    assert P.r_coordinate(6, 0, 2) == 4
    assert P.clause_r_vector(K23, F.EMPTY, (1, 1)) == (4, 4)


def test_weight_examples():
    assert P.weight((1, 2, 2), 2) == 1
    assert P.weight((), 2) == 0
    m, a, t = 16, 2, 3
    assert P.weight([t + 1] * m, a) < a


def test_filter_distribution_examples():
    t, beta, mu = P.filter_distribution(16, 2)
    assert (t, beta, mu) == (3, Fraction(8, 7), (Fraction(4, 7), Fraction(2, 7), Fraction(1, 7)))
    assert P.filter_distribution(4, 2)[2] == (1,)
    for m in range(4, 200, 7):
        for a in (2, 3, 5):
            if a * a <= m:
                assert sum(P.filter_distribution(m, a)[2]) == 1
    with pytest.raises(ParameterError):
        P.filter_distribution(3, 2)


def test_filter_t_integer():
    for m in range(1, 300):
        for a in (2, 3, 4, 7):
            k = 0
            while a ** (k + 1) <= m:
                k += 1
            assert P.filter_t(m, a) == k - 1


def test_sampler_trivial_and_counting():
    t = P.filter_t(16, 2)
    res = P.sample_filter_vector([(t + 1,) * 16] * 3, 16, 4, 2, seed=1)
    assert res.accepted and res.attempts == 1
    assert all(case == 2 and c1 == 0 for c1, c2, case in res.transcript)
    assert P.filter_counts((1, 2, 1, 3), (1, 1, 1, 1))[0] == 2


def test_sampler_checks_every_vector():
    rng = random.Random(9)
    m = 16
    vecs = [tuple(rng.randint(1, 4) for _ in range(m)) for _ in range(20)]
    res = P.sample_filter_vector(vecs, m, 4, 2, seed=3)
    assert res.accepted
    for v in vecs:
        assert P.filter_case(v, res.vector, 4, 2) != 0
    assert len(set(res.vector) - {1, 2, 3}) == 0


def test_sampler_failure_and_hypotheses():
    m = 16
    # tiny gamma makes case 2 impossible for all-ones vectors unless case 1 holds
    vecs = [(1,) * m]
    res = P.sample_filter_vector(vecs, m, 17, 4, seed=0, max_attempts=5, gamma=0, enforce_hypotheses=False)
    assert not res.accepted and res.worst == (1,) * m
    with pytest.raises(PreconditionError):
        P.sample_filter_vector(vecs, m, 3, 2, seed=0)
    assert not res.hypotheses["w0, alpha in [m]"]


def test_sampler_deterministic():
    vecs = [(1, 2, 3, 1, 2, 3, 1, 2)] * 2
    a = P.sample_filter_vector(vecs, 8, 4, 2, seed=5)
    b = P.sample_filter_vector(vecs, 8, 4, 2, seed=5)
    assert a.vector == b.vector


def test_sampler_calibration():
    hits = 0
    for trial in range(100):
        s = Stream(trial, "rvecs")
        t = P.filter_t(64, 2)
        vecs = [tuple(s.between(1, t + 1) for _ in range(64)) for _ in range(64)]
        res = P.sample_filter_vector(vecs, 64, 9, 2, seed=trial, max_attempts=200)
        hits += res.accepted
    assert hits >= 95


def test_thresholds():
    g = G.BipartiteGraph.complete(1, 6)
    assert P.thresholds_from_filter(g, (2,), (1,)) == (5,)
    assert P.thresholds_from_filter(g, (1,), (Fraction(3, 2),)) == (5,)
    rng = random.Random(1)
    for _ in range(1000):
        deg = rng.randint(2, 30)
        delta = Fraction(rng.randint(1, 40), rng.randint(1, 8))
        r = rng.randint(1, 6)
        g = G.BipartiteGraph.complete(1, deg)
        (d,) = P.thresholds_from_filter(g, (r,), (delta,))
        assert P.r_coordinate(deg, d, delta) <= r
        assert P.r_coordinate(deg, d - 1, delta) > r


def test_delta_default():
    g = G.BipartiteGraph.complete(16, 8)
    up, exact = P.delta_default(g, 4, "upper")
    assert exact and up == (4,) * 16
    low, _ = P.delta_default(g, 4, "lower", xi=Fraction(1, 8))
    assert low == (4,) * 16
    rng = random.Random(2)
    for _ in range(100):
        a = 2 ** rng.randint(1, 4)
        m = 2 ** rng.randint(5, 9)
        g = G.sample_random(m, 40, rng.randint(2, 6), rng.randint(0, 99))
        up, exact = P.delta_default(g, a, "upper")
        xi = Fraction(int(math.log2(a)), 4 * int(math.log2(m)))
        assert exact and up == P.delta_default(g, a, "lower", xi=xi)[0]
    _, exact = P.delta_default(G.BipartiteGraph.complete(7, 4), 2, "upper")
    assert not exact


def dpll_profile(g, w0=4, alpha=2, seed=0, top=False):
    res = prove_dpll(F.encode_php(g))
    delta, _ = P.delta_default(g, alpha, "upper")
    idx = P.PigeonIndex(g)
    rvecs = [P.clause_r_vector(g, ln.clause, delta, idx) for ln in res.proof.lines]
    fr = P.sample_filter_vector(rvecs, g.m, w0, alpha, seed, enforce_hypotheses=False)
    assert fr.accepted
    vec = fr.vector
    if top:
        # the largest vector in the support of mu; makes case 1 common
        vec = (P.filter_t(g.m, alpha),) * g.m
    prof = P.make_profile(g, vec, delta, alpha, w0)
    return res, prof, vec, idx


@pytest.mark.parametrize("mode", ["weaken", "propagate"])
def test_transform_contract(mode):
    g = G.BipartiteGraph.complete(8, 6)
    res, prof, vec, idx = dpll_profile(g, top=True)
    f = F.encode_php(g)
    out = P.transform_proof(g, res.proof, prof, vec, mode=mode, index=idx)
    assert 1 in out.cases
    assert check_proof(f, out.proof, extra_axioms=out.fake_axioms).valid
    for a in out.fake_axioms:
        assert len(P.heavy_sets(g, a, prof, idx).super_heavy) == prof.w0
        assert a not in f.clause_set()
    assert len(out.fake_axioms) <= res.proof.length
    assert P.pseudo_width(g, out.proof, prof, idx) <= P.GAMMA * prof.alpha * prof.w0
    if mode == "propagate":
        assert out.proof.length == res.proof.length
        for old, new in zip(res.proof.lines, out.proof.lines):
            assert new.clause.issubset(old.clause)


def test_transform_identity_without_case1():
    g = G.BipartiteGraph.complete(5, 4)
    res, prof, vec, idx = dpll_profile(g)
    # filter vector where nobody is ever super-heavy via the r-test
    zero = (0,) * g.m
    out = P.transform_proof(g, res.proof, prof, zero, index=idx)
    assert out.fake_axioms == [] and out.proof == res.proof


def test_transform_rejects_unaccepted():
    g = G.BipartiteGraph.complete(5, 4)
    res, prof, vec, idx = dpll_profile(g)
    with pytest.raises(PreconditionError):
        P.transform_proof(g, res.proof, prof, zero_vec(g), gamma=0, index=idx)


def zero_vec(g):
    return (0,) * g.m


def test_r_vector_claims_on_proofs():
    g = G.BipartiteGraph.complete(7, 6)
    res, prof, vec, idx = dpll_profile(g)
    for ln in res.proof.lines:
        rv = P.clause_r_vector(g, ln.clause, prof.delta, idx)
        hp = P.heavy_sets(g, ln.clause, prof, idx)
        for i in g.pigeons:
            assert rv[i - 1] >= 1
            if rv[i - 1] <= vec[i - 1]:
                assert i in hp.super_heavy
            if i in hp.heavy:
                assert rv[i - 1] <= vec[i - 1] + 1


def test_heavy_csv():
    g = G.BipartiteGraph.complete(4, 3)
    res, prof, vec, idx = dpll_profile(g, w0=4)
    rows = P.heavy_profile_rows(g, res.proof, prof, vec, index=idx)
    text = P.heavy_profile_csv(rows)
    assert text.splitlines()[0] == "line_id,pseudo_width,n_super_heavy,case"
    assert len(text.splitlines()) == res.proof.length + 1


def test_bound_calculator():
    rep = P.bound_calculator(1024, 1024, 8, 1024, 4)
    assert rep.exact and rep.value == Fraction(1024, 100)
    assert not P.bound_calculator(1024, 1024, 8, 1024, 1).conditions["alpha >= 2"]
    pm = P.bound_calculator(512, 512, 8, 1024, 4, "pm")
    assert pm.value == Fraction(1024 * 4, 4 * 100)
    assert all(P.bound_calculator(1024, 1024, 8, 1 << 20, 4).conditions.values())


def test_regime_validator_corollary_point():
    rep = P.regime_validator(n=2**20, epsilon=Fraction(1, 2))
    assert rep.xi == Fraction(8, 5) and rep.log_m == Fraction(25, 64) and rep.delta == Fraction(25, 64)
    assert rep.pattern == (False, True, True)
    assert rep.exact


def test_regime_validator_examples():
    # xi >= 1/2 always fails the first check
    rep = P.regime_validator(log_m=5, log_n=20, delta=100)
    assert rep.xi == Fraction(1, 8) and rep.checks[0].passed
    rep = P.regime_validator(log_m=1, log_n=20, delta=100)
    assert rep.xi >= Fraction(1, 2) and not rep.checks[0].passed
    rep = P.regime_validator(log_m=200, log_n=2**12, delta=1, epsilon=Fraction(1, 2))
    assert not rep.checks[2].passed
    # a large-n point where all three hold
    rep = P.regime_validator(log_n=2**14, epsilon=Fraction(1, 2))
    assert rep.pattern == (True, True, True)
    pm = P.regime_validator(log_n=2**14, epsilon=Fraction(1, 2), variant="cor-random-pm")
    assert pm.xi == 64 / (Fraction(1, 2) * 2**14)


def test_ln2_enclosure():
    ln2 = Fraction("0.69314718055994530941723212145817656807")
    assert P.LN2_LO < ln2 < P.LN2_HI
    assert P._sign(-2, Fraction(3)) == 1 and P._sign(-2, Fraction(2)) == -1
