"""Tensor-space bookkeeping for the pseudo-width lower bound.

Every pigeon ``i`` gets a space ``L_i`` of dimension
``deg(i) - d_i + floor(delta_i / 4)`` and a map from its holes to vectors of
``L_i`` (Vandermonde rows, so any ``dim`` of them are a basis).  A partial
matching spans the tensor of its chosen vectors with the full spaces of the
unmatched pigeons; a clause spans the matchings of its relevant pigeons that
do not satisfy it.  The validators check, by exact elimination, that axioms
span a proper subspace and that a derivation step never leaves the span of
its premises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .closure import ClosureParams, closure
from .errors import BudgetError, ParameterError, PreconditionError
from .formula import Clause, VarMap, encode_fphp
from .graph import certify_boundary_expansion, sample_random
from .pseudowidth import PigeonIndex, WeightProfile, heavy_sets
from .rng import Stream
from .subspace import Basis, Subspace, kron

DEFAULT_ZERO_BUDGET = 1_000_000
EXHAUSTIVE_CHECK_LIMIT = 10_000


def make_lambda(dim, holes):
    """``{j: (1, j, ..., j^(dim-1))}``; distinct holes make any ``dim`` of them independent."""
    if dim < 1:
        raise ParameterError("dim must be at least 1")
    return {j: tuple(j**k for k in range(dim)) for j in holes}


def _det(rows):
    # fraction-free (Bareiss) determinant
    a = [list(r) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for s in range(k + 1, n):
                if a[s][k]:
                    a[k], a[s] = a[s], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1] if n else 1


class PigeonSpaces:
    """Per-pigeon spaces and hole vectors; tensor indices are mixed radix, pigeon 1 most significant."""

    def __init__(self, g, profile):
        self.g = g
        self.dims = tuple(
            g.degree(i) - profile.d[i - 1] + math.floor(profile.delta[i - 1] / 4) for i in g.pigeons
        )
        for i, k in enumerate(self.dims, 1):
            if k < 1:
                raise PreconditionError(f"pigeon {i}: dim(L_i) = {k} < 1")
        self.lambda_basis = tuple(make_lambda(k, g.neighbours(i)) for i, k in zip(g.pigeons, self.dims))
        self.ambient = math.prod(self.dims)
        self.strides = tuple(math.prod(self.dims[i + 1:]) for i in range(len(self.dims)))
        self._check_spanning()

    def _check_spanning(self):
        for i, (k, lam) in enumerate(zip(self.dims, self.lambda_basis), 1):
            holes = sorted(lam)
            if len(holes) < k:
                raise PreconditionError(f"pigeon {i} has fewer than dim(L_i) holes")
            if math.comb(len(holes), k) <= EXHAUSTIVE_CHECK_LIMIT:
                for sub in combinations(holes, k):
                    assert _det([lam[j] for j in sub]) != 0
            # beyond the limit the Vandermonde determinant is nonzero because holes are distinct

    def vector(self, i, j):
        return self.lambda_basis[i - 1][j]

    def full(self):
        return Subspace.full(self.ambient)

    def embed(self, cl, rows):
        """Vectors ``w ⊗ (standard bases outside cl)`` placed in the full tensor.

        ``cl`` is a sorted pigeon list; ``rows`` are vectors over the tensor of
        ``L_i, i in cl`` (first pigeon most significant).
        """
        rest = [i for i in self.g.pigeons if i not in set(cl)]
        cl_strides = [math.prod(self.dims[k - 1] for k in cl[t + 1:]) for t in range(len(cl))]
        out = []
        cl_pos = []
        for a in range(math.prod(self.dims[i - 1] for i in cl)):
            pos = 0
            for t, i in enumerate(cl):
                pos += ((a // cl_strides[t]) % self.dims[i - 1]) * self.strides[i - 1]
            cl_pos.append(pos)
        for idx in product(*(range(self.dims[i - 1]) for i in rest)):
            off = sum(k * self.strides[i - 1] for k, i in zip(idx, rest))
            for w in rows:
                v = [0] * self.ambient
                for a, x in enumerate(w):
                    if x:
                        v[cl_pos[a] + off] = x
                out.append(v)
        return out


def lambda_of_matching(spaces, phi):
    """Span of all total extensions of ``phi``: chosen vectors for matched pigeons, ``L_i`` elsewhere."""
    cl = sorted(phi)
    for i in cl:
        if phi[i] not in spaces.lambda_basis[i - 1]:
            raise ParameterError(f"({i}, {phi[i]}) is not an edge")
    w = kron(*(spaces.vector(i, phi[i]) for i in cl))
    return Subspace(spaces.ambient, spaces.embed(cl, [w]))


@dataclass(frozen=True)
class ZeroSpace:
    clause: Clause
    domain: frozenset
    matchings: tuple  # tuples of (pigeon, hole) pairs sorted by pigeon

    def __len__(self):
        return len(self.matchings)


def zero_space(g, c, closure_set, spaces=None, budget=DEFAULT_ZERO_BUDGET, vm=None):
    """Matchings with domain exactly ``closure_set`` whose assignment does not satisfy ``c``.

    Backtracking over pigeons in ascending order; a branch is cut as soon as
    the partial assignment satisfies ``c`` (satisfaction survives extension).
    """
    vm = vm or VarMap(g)
    dom = sorted(closure_set)
    by_pigeon = {}
    for x in c.lits:
        i, j = vm.edge(abs(x))
        by_pigeon.setdefault(i, []).append((j, x > 0))

    def satisfied(i, j):
        # assignment of pigeon i to hole j: x_ij = 1, x_ik = 0 for its other holes
        return any((k == j) == pos for k, pos in by_pigeon.get(i, ()))

    out = []
    nodes = 0
    used = set()
    cur = []

    def rec(t):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetError(f"zero-space enumeration exceeded {budget} nodes", estimate=nodes)
        if t == len(dom):
            out.append(tuple(cur))
            return
        i = dom[t]
        for j in g.neighbours(i):
            if j in used or satisfied(i, j):
                continue
            used.add(j)
            cur.append((i, j))
            rec(t + 1)
            cur.pop()
            used.discard(j)

    rec(0)
    return ZeroSpace(c, frozenset(dom), tuple(out))


@dataclass
class SpanContext:
    """Everything the clause map needs, with a per-clause cache."""

    g: object
    profile: WeightProfile
    spaces: PigeonSpaces
    params: ClosureParams

    def __post_init__(self):
        self.index = PigeonIndex(self.g)
        self._cache = {}

    def relevant(self, c):
        hp = heavy_sets(self.g, c, self.profile, self.index)
        if len(hp.heavy) > self.params.r:
            raise PreconditionError(f"{len(hp.heavy)} heavy pigeons exceed r = {self.params.r}")
        return closure(self.g, hp.heavy, self.params.r, self.params.nu, self.params.k_aug)

    def clause(self, c):
        """``(lambda(C), closure result)``."""
        hit = self._cache.get(c)
        if hit is None:
            cl = self.relevant(c)
            z = zero_space(self.g, c, cl.closure_set, vm=self.index.vm)
            dom = sorted(cl.closure_set)
            n_cl = math.prod(self.spaces.dims[i - 1] for i in dom)
            b = Basis(n_cl)
            for phi in z.matchings:
                if b.full:
                    break
                b.add(kron(*(self.spaces.vector(i, j) for i, j in phi)))
            rows = [b.rows[p] for p in sorted(b.rows)]
            hit = (Subspace(self.spaces.ambient, self.spaces.embed(dom, rows)), cl)
            self._cache[c] = hit
        return hit


def default_closure_params(g, xi, r=None):
    """``r`` defaults to ``4 m`` (every closure then meets the ``r/4`` bound); ``nu = (1 - 3 xi) Delta``."""
    return ClosureParams(4 * g.m if r is None else r, (1 - 3 * Fraction(xi)) * g.delta_max)


def _ctx(g, profile, spaces, closure_params, xi=None):
    if isinstance(closure_params, SpanContext):
        return closure_params
    if closure_params is None:
        if xi is None:
            raise ParameterError("need closure_params or xi")
        closure_params = default_closure_params(g, xi)
    return SpanContext(g, profile, spaces, closure_params)


def lambda_of_clause(g, c, profile, spaces, closure_params):
    """``span{lambda(phi) : phi in Z(C)}`` over the relevant pigeons of ``c``; ``lambda(⊥) = L``."""
    return _ctx(g, profile, spaces, closure_params).clause(c)[0]


def axiom_fraction(g, axiom, profile, spaces, xi, closure_params=None):
    lam, _ = _ctx(g, profile, spaces, closure_params, xi).clause(axiom)
    return Fraction(lam.dim, spaces.ambient)


def validate_axiom_fraction(g, fake_axiom, profile, spaces, xi, w0, closure_params=None):
    """``dim lambda(A) / dim L <= (1 - xi)^w0``, exactly."""
    return axiom_fraction(g, fake_axiom, profile, spaces, xi, closure_params) <= (1 - Fraction(xi)) ** w0


def validate_proper_subspace(g, f, fake_axioms, profile, spaces, xi, w0, closure_params=None):
    """Span of ``lambda(A)`` over ``f`` and the fake axioms is a proper subspace of ``L``."""
    fake_axioms = list(fake_axioms)
    if len(fake_axioms) > (1 + Fraction(xi)) ** w0:
        raise PreconditionError("more fake axioms than (1 + xi)^w0")
    ctx = _ctx(g, profile, spaces, closure_params, xi)
    b = Basis(spaces.ambient)
    for a in list(f.clauses) + fake_axioms:
        for r in ctx.clause(a)[0].rows:
            b.add(r)
        if b.full:
            return False
    return True


@dataclass(frozen=True)
class SpanStep:
    dim_c: int
    dim_span01: int
    contained: bool
    closure_sizes: tuple


def span_step_report(g, c0, c1, c, profile, spaces, closure_params):
    ctx = _ctx(g, profile, spaces, closure_params)
    (l0, k0), (l1, k1), (lc, kc) = ctx.clause(c0), ctx.clause(c1), ctx.clause(c)
    sizes = (len(k0), len(k1), len(kc))
    if not all(k.maximal_verified for k in (k0, k1, kc)):
        raise PreconditionError("closure maximality not verified")
    if 4 * max(sizes) > ctx.params.r:
        raise PreconditionError(f"closure sizes {sizes} exceed r/4")
    s01 = l0.span(l1)
    return SpanStep(lc.dim, s01.dim, s01.contains(lc), sizes)


def validate_span_step(g, c0, c1, c, profile, spaces, closure_params):
    """``lambda(C) ⊆ span(lambda(C0), lambda(C1))`` for a step deriving ``c`` from ``c0``, ``c1``."""
    return span_step_report(g, c0, c1, c, profile, spaces, closure_params).contained


SPAN_CSV_HEADER = "step_id,dim_c,dim_span01,contained"


def span_csv(steps):
    lines = [SPAN_CSV_HEADER]
    for k, s in enumerate(steps, 1):
        lines.append(f"{k},{s.dim_c},{s.dim_span01},{int(s.contained)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# preset instance and random derivations


@dataclass
class SpanPreset:
    g: object
    profile: WeightProfile
    spaces: PigeonSpaces
    params: ClosureParams
    xi: Fraction
    seed: int

    def context(self):
        return SpanContext(self.g, self.profile, self.spaces, self.params)

    def formula(self):
        return encode_fphp(self.g)


def preset(m=4, n=64, delta=8, xi=Fraction(1, 8), d=7, seed=0, max_tries=200):
    """The validation instance: a certified ``(r, Delta, (1 - 2 xi) Delta)`` expander.

    ``delta_i = 4 xi deg = 4`` and ``d_i = 7`` give ``dim L_i = 2``; the
    expander parameter is ``r = m`` (all pigeon sets) and the closure uses
    ``r = 4 m``, ``nu = (1 - 3 xi) Delta``.
    """
    xi = Fraction(xi)
    c = (1 - 2 * xi) * delta
    for k in range(max_tries):
        g = sample_random(m, n, delta, Stream(seed, "span-preset").next64() + k)
        if certify_boundary_expansion(g, m, c).certified:
            break
    else:
        raise PreconditionError("no certified expander found")
    profile = WeightProfile([d] * m, [4 * xi * g.degree(i) for i in g.pigeons])
    profile.validate(g)
    return SpanPreset(g, profile, PigeonSpaces(g, profile), default_closure_params(g, xi), xi, seed)


def _clash(a, b):
    return [abs(x) for x in a.lits if x > 0 and -x in b]


def random_light_clause(g, rng, vm, max_pigeons=3):
    """Random clause over a few pigeons, mostly short positive parts (light pigeons)."""
    lits = set()
    for k in rng.subset(g.m, 1 + rng.below(min(max_pigeons, g.m))):
        i = k + 1
        nb = list(g.neighbours(i))
        if rng.below(4) == 0:
            lits.add(-vm.var(i, nb[rng.below(len(nb))]))
        else:
            for t in rng.subset(len(nb), 1 + rng.below(2)):
                lits.add(vm.var(i, nb[t]))
    return Clause(lits)


def random_derivation(pre, steps, seed, weaken_prob=Fraction(1, 5), n_axioms=4, n_random=4):
    """A random derivation from FPHP axioms and random light clauses.

    Returns ``[(c0, c1, c, rule)]``.  Resolution picks two pool clauses that
    clash on some variable; weakening adds one or two random literals (and
    reports ``c1 = c0``).  The span lemma concerns single steps, so the
    starting clauses need not be axioms; light random clauses are what give
    the clause spaces nonzero dimension.
    """
    rng = Stream(seed, "derivation")
    f = pre.formula()
    vm = VarMap(pre.g)
    pool = [f.clauses[k] for k in rng.subset(len(f.clauses), min(n_axioms, len(f.clauses)))]
    pool += [random_light_clause(pre.g, rng, vm) for _ in range(n_random)]
    n_vars = f.num_vars
    out = []
    while len(out) < steps:
        if rng.below(weaken_prob.denominator) < weaken_prob.numerator:
            c0 = pool[rng.below(len(pool))]
            extra = set()
            for _ in range(1 + rng.below(2)):
                v = 1 + rng.below(n_vars)
                extra.add(v if rng.coin() else -v)
            c = Clause(c0.literal_set | extra)
            out.append((c0, c0, c, "weaken"))
        else:
            pairs = [(a, b) for a in pool for b in pool if _clash(a, b)]
            if not pairs:
                pool.append(random_light_clause(pre.g, rng, vm))
                continue
            a, b = pairs[rng.below(len(pairs))]
            vs = _clash(a, b)
            v = vs[rng.below(len(vs))]
            c = Clause((a.literal_set - {v}) | (b.literal_set - {-v}))
            out.append((a, b, c, "resolve"))
        pool.append(c)
    return out


def construct_fake_axiom(pre, w0, seed):
    """A clause with exactly ``w0`` super-heavy pigeons and no other pigeons.

    Each chosen pigeon gets either one negative literal (``deg_C = deg - 1``)
    or positive literals on ``d_i`` of its holes.
    """
    g, prof = pre.g, pre.profile
    rng = Stream(seed, "fake")
    vm = VarMap(g)
    lits = set()
    for i in (k + 1 for k in rng.subset(g.m, w0)):
        nb = list(g.neighbours(i))
        if g.degree(i) - 1 >= prof.d[i - 1] and rng.coin():
            lits.add(-vm.var(i, nb[rng.below(len(nb))]))
        else:
            for k in rng.subset(len(nb), prof.d[i - 1]):
                lits.add(vm.var(i, nb[k]))
    c = Clause(lits)
    assert len(heavy_sets(g, c, prof).super_heavy) == w0
    return c
