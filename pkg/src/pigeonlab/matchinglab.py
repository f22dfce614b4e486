"""Vertex partitions and the perfect-matching version of the span argument.

Vertices are numbered as in the PM encoding: left vertices ``1..m`` and
right vertices ``m+1..m+n``.  A matching is a frozenset of edges ``(u, w)``
with ``u`` on the left and ``w`` on the right (unified ids).

Setting an edge ``{u, v}`` true assigns every other edge at ``u`` and at
``v`` false; ``N_C(v)`` collects the neighbours ``u`` for which that single
move satisfies ``C``.  Everything else here (heavy sets, the partition
properties, the zero spaces) is built on that predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .closure import ClosureParams, closure
from .errors import BudgetError, ParameterError, ParseError, PigeonlabError, PreconditionError
from .formula import Clause, VarMap, clause_status, encode_pm, SATISFIED
from .graph import BipartiteGraph, certify_boundary_expansion, remove_vertices
from .rng import Stream
from .spanlab import _det, make_lambda, EXHAUSTIVE_CHECK_LIMIT
from .subspace import Basis, Subspace, kron

DEFAULT_MAX_RETRIES = 64
DEFAULT_ZERO_BUDGET = 2_000_000


class PartitionError(PigeonlabError):
    """No sampled partition passed all four properties; ``stats`` counts failures per property."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


# ---------------------------------------------------------------------------
# vertices and clause neighbourhoods


class VertexIndex:
    """Unified-id adjacency and literal lookup for one graph."""

    def __init__(self, g):
        self.g = g
        self.m, self.n = g.m, g.n
        self.vm = VarMap(g)
        nb = [()]
        nb += [tuple(g.m + j for j in g.neighbours(i)) for i in g.pigeons]
        nb += [tuple(g.hole_neighbours(j)) for j in g.holes]
        self.nb = nb
        self.deg = [len(a) for a in nb]

    @property
    def vertices(self):
        return range(1, self.m + self.n + 1)

    def is_left(self, v):
        return v <= self.m

    def var(self, u, w):
        if u > w:
            u, w = w, u
        return self.vm.var(u, w - self.m)

    def edge(self, var):
        i, j = self.vm.edge(var)
        return i, self.m + j

    def split(self, c):
        """``{v: (positive partners, negative partners)}`` over the literals of ``c``."""
        out = {}
        for x in c.lits:
            u, w = self.edge(abs(x))
            for a, b in ((u, w), (w, u)):
                pos, neg = out.setdefault(a, (set(), set()))
                (pos if x > 0 else neg).add(b)
        return out

    def satisfies(self, parts, u, v):
        """Does matching ``u`` to ``v`` satisfy the clause whose :meth:`split` is ``parts``?"""
        pu, nu = parts.get(u, ((), ()))
        if v in pu:
            return True
        if any(x != v for x in nu):
            return True
        nv = parts.get(v, ((), ()))[1]
        return any(x != u for x in nv)

    def neighbourhood(self, c, v, parts=None):
        parts = self.split(c) if parts is None else parts
        return {u for u in self.nb[v] if self.satisfies(parts, u, v)}

    def degrees(self, c, parts=None):
        """``{v: deg_C(v)}`` for every vertex with a nonzero clause degree."""
        parts = self.split(c) if parts is None else parts
        cand = set(parts)
        for a, (_, neg) in parts.items():
            if neg:
                cand.update(self.nb[a])
        out = {}
        for v in cand:
            k = sum(1 for u in self.nb[v] if self.satisfies(parts, u, v))
            if k:
                out[v] = k
        return out


def vertex_clause_neighbourhood(g, c, v, index=None):
    """Vertices ``u`` such that matching the edge ``{u, v}`` satisfies ``c``."""
    return (index or VertexIndex(g)).neighbourhood(c, v)


def vertex_clause_degree(g, c, v, index=None):
    return len(vertex_clause_neighbourhood(g, c, v, index))


@dataclass(frozen=True)
class ClauseView:
    clause: Clause
    degrees: dict
    fat: frozenset
    thick: frozenset
    bad: frozenset | None = None
    bad_thick: frozenset | None = None


@dataclass(frozen=True)
class VertexProfile:
    """Thresholds ``d_v`` and slacks ``delta_v`` for all ``m + n`` vertices."""

    d: tuple
    delta: tuple

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        object.__setattr__(self, "delta", tuple(Fraction(x) for x in self.delta))
        if len(self.d) != len(self.delta):
            raise ParameterError("d and delta differ in length")

    def validate(self, g):
        if len(self.d) != g.m + g.n:
            raise ParameterError("profile length is not m + n")
        idx = VertexIndex(g)
        for v in idx.vertices:
            if not self.delta[v - 1] < self.d[v - 1] <= idx.deg[v]:
                raise PreconditionError(f"vertex {v}: need delta < d <= deg")
        return True

    def view(self, g, c, partition=None, xi=None, index=None):
        """Per-clause sets; ``bad``/``bad_thick`` need a partition and ``xi``."""
        index = index or VertexIndex(g)
        parts = index.split(c)
        degs = index.degrees(c, parts)
        fat = frozenset(v for v, k in degs.items() if k >= self.d[v - 1])
        thick = frozenset(v for v, k in degs.items() if k >= self.d[v - 1] - self.delta[v - 1])
        # vertices of clause degree 0 are thick when d_v <= delta_v is impossible, so never
        bad = bad_thick = None
        if partition is not None and xi is not None:
            bad = compute_vbad(g, c, partition, xi, index)
            bad_thick = frozenset(v for v in thick if index.is_left(v)) | bad
        return ClauseView(c, degs, fat, thick, bad, bad_thick)


def pm_profile(g, xi, d=None):
    """``delta_v = 64 xi deg(v)``; ``d`` defaults to ``deg(v)``."""
    idx = VertexIndex(g)
    vs = list(idx.vertices)
    deg = [idx.deg[v] for v in vs]
    return VertexProfile(deg if d is None else d, [64 * Fraction(xi) * k for k in deg])


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    vp: frozenset
    vh: frozenset
    seed: int | None = None
    retries: int = 0
    report: object = field(default=None, compare=False, repr=False)

    @classmethod
    def from_vp(cls, g, vp, seed=None, retries=0, report=None):
        everything = frozenset(range(1, g.m + g.n + 1))
        vp = frozenset(vp)
        if not vp <= everything:
            raise ParameterError("V_P contains ids outside 1..m+n")
        return cls(vp, everything - vp, seed, retries, report)

    def to_text(self):
        seed = 0 if self.seed is None else self.seed
        return f"{seed} {self.retries}\n" + " ".join(map(str, sorted(self.vp))) + "\n"


def parse_partition(text, g):
    lines = text.split("\n")
    if len(lines) < 2:
        raise ParseError("partition file needs two lines")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError("expected 'seed retries'", line=1)
    try:
        seed, retries = int(head[0]), int(head[1])
        vp = [int(x) for x in lines[1].split()]
    except ValueError as e:
        raise ParseError(str(e)) from None
    if any(x.strip() for x in lines[2:]):
        raise ParseError("trailing content", line=3)
    if len(set(vp)) != len(vp):
        raise ParseError("duplicate vertex id", line=2)
    try:
        return Partition.from_vp(g, vp, seed, retries)
    except ParameterError as e:
        raise ParseError(str(e), line=2) from None


def read_partition(path, g):
    with open(path, encoding="utf-8") as fh:
        return parse_partition(fh.read(), g)


def write_partition(part, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(part.to_text())


def deviation(nset, partition):
    """``|N ∩ V_H| - |N| / 2``."""
    return sum(1 for u in nset if u in partition.vh) - Fraction(len(nset), 2)


def compute_vbad(g, c, partition, xi, index=None):
    """Left vertices whose clause neighbourhood is split unevenly by more than ``4 xi Delta``."""
    index = index or VertexIndex(g)
    lim = 4 * Fraction(xi) * g.delta_max
    parts = index.split(c)
    out = set()
    for v in index.degrees(c, parts):
        if index.is_left(v) and abs(deviation(index.neighbourhood(c, v, parts), partition)) > lim:
            out.add(v)
    return frozenset(out)


@dataclass(frozen=True)
class VbadStar:
    applicable: bool
    side: int  # +1 / -1, 0 when not applicable
    subset: tuple
    deviation: Fraction | None
    bound: Fraction | None
    holds: bool


def vbad_star(g, c, partition, xi, w0, index=None):
    """Greedy witness for the non-expansion claim.

    When ``|V_bad| > w0/8``: keep the larger of the over- and under-split
    deviators, take ``ceil(w0/16)`` of them (largest deviation first) and
    test whether their joint neighbourhood deviates by more than
    ``2 xi Delta`` per vertex in the same direction.
    """
    index = index or VertexIndex(g)
    bad = compute_vbad(g, c, partition, xi, index)
    if 8 * len(bad) <= w0:
        return VbadStar(False, 0, (), None, None, True)
    parts = index.split(c)
    devs = {v: deviation(index.neighbourhood(c, v, parts), partition) for v in bad}
    plus = [v for v in sorted(bad) if devs[v] > 0]
    minus = [v for v in sorted(bad) if devs[v] < 0]
    side, pool = (1, plus) if len(plus) >= len(minus) else (-1, minus)
    k = max(1, math.ceil(Fraction(w0, 16)))
    pool.sort(key=lambda v: (-abs(devs[v]), v))
    sub = tuple(sorted(pool[:k]))
    joint = set()
    for v in sub:
        joint |= index.neighbourhood(c, v, parts)
    dev = deviation(joint, partition)
    bound = 2 * Fraction(xi) * g.delta_max * len(sub)
    return VbadStar(True, side, sub, dev, bound, side * dev > bound)


@dataclass
class PropertyReport:
    violations: dict  # property number -> list of witnesses

    @property
    def ok(self):
        return not any(self.violations.values())

    def counts(self):
        return {k: len(v) for k, v in self.violations.items()}


def check_properties(g, pi, fake_axioms, w0, xi, partition, profile=None, index=None):
    """The four partition properties; ``profile`` is needed only for property 1."""
    index = index or VertexIndex(g)
    xi = Fraction(xi)
    viol = {1: [], 2: [], 3: [], 4: []}
    if fake_axioms:
        if profile is None:
            raise ParameterError("property 1 needs a vertex profile")
        for a in fake_axioms:
            fat = profile.view(g, a, index=index).fat
            if 4 * len(fat & partition.vp) < w0:
                viol[1].append(a)
    for v in index.vertices:
        if abs(deviation(index.nb[v], partition)) > 4 * xi * index.deg[v]:
            viol[2].append(v)
    for c in pi:
        parts = index.split(c)
        for v in index.degrees(c, parts):
            if not index.is_left(v):
                nc = index.neighbourhood(c, v, parts)
                if abs(deviation(nc, partition)) > 4 * xi * index.deg[v]:
                    viol[3].append((c, v))
        if 8 * len(compute_vbad(g, c, partition, xi, index)) > w0:
            viol[4].append(c)
    return PropertyReport(viol)


def _edge_assignment(g, edges, vm):
    # all edges at matched vertices: 1 on the matching, 0 elsewhere
    rho = {}
    for u, w in edges:
        j = w - g.m
        for k in g.neighbours(u):
            rho.setdefault(vm.var(u, k), 0)
        for i in g.hole_neighbours(j):
            rho.setdefault(vm.var(i, j), 0)
    for u, w in edges:
        rho[vm.var(u, w - g.m)] = 1
    return rho


def _naive_neighbourhood(g, c, v, vm):
    out = set()
    if v <= g.m:
        pairs = [(v, g.m + j) for j in g.neighbours(v)]
    else:
        pairs = [(i, v) for i in g.hole_neighbours(v - g.m)]
    for u, w in pairs:
        if clause_status(c, _edge_assignment(g, [(u, w)], vm)) == SATISFIED:
            out.add(w if u == v else u)
    return out


def recheck_properties(g, pi, fake_axioms, w0, xi, partition, profile=None):
    """Independent re-verification: every neighbourhood rebuilt from the assignment semantics."""
    vm = VarMap(g)
    xi = Fraction(xi)
    vh = partition.vh
    everything = range(1, g.m + g.n + 1)

    def full_nb(v):
        return [g.m + j for j in g.neighbours(v)] if v <= g.m else list(g.hole_neighbours(v - g.m))

    def split_ok(ns, slack):
        h = sum(1 for u in ns if u in vh)
        return abs(2 * h - len(ns)) <= 2 * slack

    if fake_axioms:
        for a in fake_axioms:
            fat = [v for v in everything if len(_naive_neighbourhood(g, a, v, vm)) >= profile.d[v - 1]]
            if 4 * sum(1 for v in fat if v in partition.vp) < w0:
                return False
    for v in everything:
        if not split_ok(full_nb(v), 4 * xi * len(full_nb(v))):
            return False
    for c in pi:
        for v in everything:
            ns = _naive_neighbourhood(g, c, v, vm)
            if v > g.m and not split_ok(ns, 4 * xi * len(full_nb(v))):
                return False
        bad = [v for v in range(1, g.m + 1)
               if not split_ok(_naive_neighbourhood(g, c, v, vm), 4 * xi * g.delta_max)]
        if 8 * len(bad) > w0:
            return False
    return True


def partition_hypotheses(g, n_axioms, proof_length, w0, xi):
    """The sampling lemma's hypotheses, evaluated (never enforced)."""
    xi = Fraction(xi)
    idx = VertexIndex(g)
    right_min = min((idx.deg[v] for v in idx.vertices if v > g.m), default=0)
    cap = math.exp(w0 / 32)
    return {
        "xi <= 1/4": xi <= Fraction(1, 4),
        "|V_L| >= 4": g.m >= 4,
        "Delta >= log|V_L| / xi^2": g.delta_max >= math.log2(g.m) / xi**2 if g.m else False,
        "min right degree >= (log|V_R| + w0) / xi^2": right_min >= (math.log2(max(g.n, 1)) + w0) / xi**2,
        "|A| <= e^(w0/32)": n_axioms <= cap,
        "L(pi) <= e^(w0/32)": proof_length <= cap,
        "w0 >= 64": w0 >= 64,
    }


@dataclass(frozen=True)
class SamplingReport:
    hypotheses: dict
    exploratory: bool
    attempts: int
    stats: dict  # property -> number of failed attempts


def sample_partition(g, pi, fake_axioms, w0, xi, seed, max_retries=DEFAULT_MAX_RETRIES, profile=None):
    """Uniform random partitions until one passes all four properties.

    Trial ``k`` is a deterministic function of ``(seed, k)``.  Hypothesis
    violations only mark the result exploratory.
    """
    pi = list(pi)
    fake_axioms = list(fake_axioms)
    hyp = partition_hypotheses(g, len(fake_axioms), len(pi), w0, xi)
    exploratory = not all(hyp.values())
    index = VertexIndex(g)
    stats = {1: 0, 2: 0, 3: 0, 4: 0}
    for k in range(max_retries):
        rng = Stream(seed, "partition", k)
        vp = [v for v in index.vertices if rng.coin()]
        part = Partition.from_vp(g, vp, seed, k)
        rep = check_properties(g, pi, fake_axioms, w0, xi, part, profile, index)
        if rep.ok:
            report = SamplingReport(hyp, exploratory, k + 1, stats)
            return Partition.from_vp(g, vp, seed, k, report)
        for p, n in rep.counts().items():
            stats[p] += bool(n)
    raise PartitionError(f"no partition passed within {max_retries} tries; failures per property {stats}", stats)


# ---------------------------------------------------------------------------
# residual graph


def residual_graph(g, partition):
    """``G' = G \\ (V_R ∩ V_P)``: only holes of ``V_H`` remain."""
    return remove_vertices(g, (), [v - g.m for v in partition.vp if v > g.m])


@dataclass(frozen=True)
class ResidualReport:
    max_degree: int
    degree_bound: Fraction
    degree_ok: bool
    expansion: object

    @property
    def ok(self):
        return self.degree_ok and self.expansion.certified


def validate_residual(g, partition, xi, r):
    """``G'`` is an ``(r, (1 + 8 xi) Delta / 2, (1 - 12 xi) Delta / 2)`` boundary expander."""
    xi = Fraction(xi)
    gp = residual_graph(g, partition)
    bound = (1 + 8 * xi) * g.delta_max / 2
    rep = certify_boundary_expansion(gp, r, (1 - 12 * xi) * g.delta_max / 2)
    return ResidualReport(gp.delta_max, bound, gp.delta_max <= bound, rep)


# ---------------------------------------------------------------------------
# ExtendMatching


def _partner(match, x):
    for u, w in match:
        if u == x:
            return w
        if w == x:
            return u
    return None


def _edge(a, b):
    return (a, b) if a < b else (b, a)


def _check_lists(t, v_lists):
    seen = set()
    for v in t:
        for w in v_lists.get(v, ()):
            if w in seen:
                raise PreconditionError(f"vertex {w} occurs in two lists; termination not guaranteed")
            seen.add(w)


def extend_matching(t, psi, v_lists):
    """Extend ``psi`` to cover ``t``, lazily displacing existing partners.

    The lowest unmatched vertex of ``t`` tries every entry of its list in
    order; an entry that is already matched loses its old edge first.
    Leaves are returned in generation order without repeats.
    """
    t = sorted(set(t))
    v_lists = {v: list(v_lists.get(v, ())) for v in t}
    _check_lists(t, v_lists)
    out, seen = [], set()

    def rec(cur):
        covered = {x for e in cur for x in e}
        todo = [v for v in t if v not in covered]
        if not todo:
            if cur not in seen:
                seen.add(cur)
                out.append(cur)
            return
        v = todo[0]
        for w in v_lists[v]:
            nxt = set(cur)
            old = _partner(cur, w)
            if old is not None:
                nxt.discard(_edge(w, old))
            nxt.add(_edge(v, w))
            rec(frozenset(nxt))

    rec(frozenset(_edge(*e) for e in psi))
    return out


def extend_matching_eager(t, psi, v_lists):
    """Mutation control: drop every edge of ``psi`` touching a listed vertex up front."""
    t = sorted(set(t))
    _check_lists(t, v_lists)
    listed = {w for v in t for w in v_lists.get(v, ())}
    base = frozenset(_edge(*e) for e in psi if not (set(e) & listed))
    return extend_matching(t, base, v_lists)


@dataclass(frozen=True)
class ExtendReport:
    runs: int
    outputs: int
    failures: dict  # claim name -> count

    @property
    def ok(self):
        return not any(self.failures.values())


def validate_extend_claims(g, partition, t, psi, v_lists, outputs, cover=None):
    """Check the outputs of one run against the two claims about ExtendMatching.

    ``cover`` defaults to ``t`` together with the left vertices of ``psi``
    whose partner is in no list (the vertices the claims say survive).
    """
    m = g.m
    psi = frozenset(_edge(*e) for e in psi)
    listed = {w for v in t for w in v_lists.get(v, ())}
    if cover is None:
        cover = set(t) | {u for u, w in psi if w not in listed}
    pr_edges = {e for e in psi if e[1] in partition.vp}  # V_L x (V_P ∩ V_R)
    right_matched = {w for _, w in psi}
    fails = {"lists_in_VH_VR": 0, "valid_matching": 0, "covers": 0, "pr_edges": 0, "right_stays_matched": 0}
    if not all(w > m and w in partition.vh for w in listed):
        fails["lists_in_VH_VR"] += 1
    for out in outputs:
        verts = [x for e in out for x in e]
        if len(verts) != len(set(verts)) or any(w - m not in g.neighbours(u) for u, w in out):
            fails["valid_matching"] += 1
        if not cover <= set(verts):
            fails["covers"] += 1
        if {e for e in out if e[1] in partition.vp} != pr_edges:
            fails["pr_edges"] += 1
        if not right_matched <= {w for _, w in out}:
            fails["right_stays_matched"] += 1
    return ExtendReport(1, len(outputs), fails)


def random_extend_run(g, partition, seed, max_t=3, max_list=3):
    """Random inputs satisfying the algorithm's preconditions.

    ``psi`` is a random matching without ``V_P x V_P`` edges, ``t`` a few
    left vertices and the lists disjoint subsets of ``N(v) ∩ V_H ∩ V_R``.
    """
    rng = Stream(seed, "extend")
    m = g.m
    used, psi = set(), set()
    for i in g.pigeons:
        if rng.below(3) == 0:
            opts = [m + j for j in g.neighbours(i) if m + j not in used and not (i in partition.vp and m + j in partition.vp)]
            if opts:
                w = opts[rng.below(len(opts))]
                psi.add((i, w))
                used.add(w)
    lefts = list(g.pigeons)
    t = [lefts[k] for k in rng.subset(len(lefts), 1 + rng.below(min(max_t, len(lefts))))]
    taken, v_lists = set(), {}
    for v in t:
        opts = [m + j for j in g.neighbours(v) if m + j in partition.vh and m + j not in taken]
        pick = [opts[k] for k in rng.subset(len(opts), min(len(opts), 1 + rng.below(max_list)))]
        taken.update(pick)
        v_lists[v] = pick
    # a vertex of t with an empty list cannot be extended; keep it only if psi covers it
    covered = {u for u, _ in psi}
    t = [v for v in t if v_lists[v] or v in covered]
    return t, frozenset(psi), {v: v_lists[v] for v in t}


def extend_sweep(g, partition, runs, seed, eager=False):
    fails = {}
    outs = 0
    for k in range(runs):
        t, psi, lists = random_extend_run(g, partition, Stream(seed, "extend-sweep").next64() + k)
        fn = extend_matching_eager if eager else extend_matching
        res = fn(t, psi, lists)
        rep = validate_extend_claims(g, partition, t, psi, lists, res)
        outs += rep.outputs
        for name, n in rep.failures.items():
            fails[name] = fails.get(name, 0) + n
    return ExtendReport(runs, outs, fails)


# ---------------------------------------------------------------------------
# PM spaces


class PMSpaces:
    """Spaces ``L_v`` for ``v`` in ``V_P`` with Vandermonde maps from ``V_H``.

    Only vertices with ``dim L_v >= 2`` are kept as tensor factors; a
    one-dimensional factor multiplies every vector by a nonzero scalar and
    changes no span.  Tensor order follows vertex id.
    """

    def __init__(self, g, partition, profile):
        self.g = g
        self.partition = partition
        idx = VertexIndex(g)
        self.dims = {}
        for v in sorted(partition.vp):
            k = math.floor((idx.deg[v] - profile.d[v - 1] + profile.delta[v - 1] / 2) / 2)
            if k < 1:
                raise PreconditionError(f"vertex {v}: dim(L_v) = {k} < 1")
            self.dims[v] = k
        self.active = tuple(v for v, k in self.dims.items() if k >= 2)
        self.lam = {}
        for v in self.active:
            hs = [u for u in idx.nb[v] if u in partition.vh]
            if len(hs) < self.dims[v]:
                raise PreconditionError(f"vertex {v}: fewer V_H neighbours than dim(L_v)")
            self.lam[v] = make_lambda(self.dims[v], hs)
            if math.comb(len(hs), self.dims[v]) <= EXHAUSTIVE_CHECK_LIMIT:
                for sub in combinations(hs, self.dims[v]):
                    assert _det([self.lam[v][u] for u in sub]) != 0
        self.ambient = math.prod(self.dims[v] for v in self.active)
        self._std = {v: [tuple(int(a == b) for a in range(self.dims[v])) for b in range(self.dims[v])] for v in self.active}

    def full(self):
        return Subspace.full(self.ambient)

    def vectors(self, sig):
        """Spanning vectors of ``lambda(phi)`` from ``sig = {v: partner}`` over active vertices."""
        factors = [[self.lam[v][sig[v]]] if v in sig else self._std[v] for v in self.active]
        return [kron(*f) for f in product(*factors)]

    def lambda_of_matching(self, phi):
        sig = {}
        for u, w in phi:
            if u in self.partition.vp and w in self.partition.vp:
                raise ParameterError(f"edge ({u}, {w}) lies inside V_P")
            for a, b in ((u, w), (w, u)):
                if a in self.lam:
                    sig[a] = b
        return Subspace(self.ambient, self.vectors(sig))


def pm_zero_signatures(index, c, cover, partition, active, budget=DEFAULT_ZERO_BUDGET):
    """λ-signatures of the minimal matchings in ``Z(C)``.

    Any matching in ``Z(C)`` restricts to one whose edges all touch
    ``cover``; that restriction is still in ``Z(C)`` and its λ contains the
    original's, so these minimal matchings span the same space.  An edge
    ``{u, v}`` is usable when it is not inside ``V_P`` and ``u`` is not in
    ``N_C(v)``.  Returns ``(signatures, number of matchings)``.
    """
    parts = index.split(c)
    vp = partition.vp
    order = sorted(cover)
    active = set(active)
    sigs = set()
    count = 0
    nodes = 0
    used = set()
    cur = {}

    def rec(k):
        nonlocal count, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetError(f"PM zero-space enumeration exceeded {budget} nodes", estimate=nodes)
        while k < len(order) and order[k] in used:
            k += 1
        if k == len(order):
            count += 1
            sigs.add(tuple(sorted((v, cur[v]) for v in cur if v in active)))
            return
        s = order[k]
        for u in index.nb[s]:
            if u in used or (s in vp and u in vp) or index.satisfies(parts, u, s):
                continue
            used.add(s)
            used.add(u)
            cur[s], cur[u] = u, s
            rec(k + 1)
            del cur[s], cur[u]
            used.discard(s)
            used.discard(u)

    rec(0)
    return sigs, count


@dataclass(frozen=True)
class PMClauseInfo:
    view: ClauseView
    closure: object
    relevant: frozenset
    matchings: int


@dataclass
class PMContext:
    """Clause map for the PM argument with a per-clause cache."""

    g: object
    partition: Partition
    profile: VertexProfile
    params: ClosureParams
    xi: Fraction
    budget: int = DEFAULT_ZERO_BUDGET

    def __post_init__(self):
        self.xi = Fraction(self.xi)
        self.index = VertexIndex(self.g)
        self.gprime = residual_graph(self.g, self.partition)
        self.spaces = PMSpaces(self.g, self.partition, self.profile)
        self._cache = {}

    def info(self, c):
        return self.clause(c)[1]

    def clause(self, c):
        hit = self._cache.get(c)
        if hit is None:
            view = self.profile.view(self.g, c, self.partition, self.xi, self.index)
            t = view.bad_thick
            if len(t) > self.params.r:
                raise PreconditionError(f"|VbadThick| = {len(t)} exceeds r = {self.params.r}")
            cl = closure(self.gprime, t, self.params.r, self.params.nu, self.params.k_aug)
            rel = frozenset(cl.closure_set) | view.thick
            sigs, count = pm_zero_signatures(self.index, c, rel, self.partition, self.spaces.active, self.budget)
            b = Basis(self.spaces.ambient)
            for sig in sorted(sigs):
                if b.full:
                    break
                for v in self.spaces.vectors(dict(sig)):
                    b.add(v)
            hit = (b.freeze(), PMClauseInfo(view, cl, rel, count))
            self._cache[c] = hit
        return hit


def pm_closure_params(g, xi, r=None):
    """``r`` defaults to ``4 (m + n)``; ``nu = (1 - 20 xi) Delta / 2``."""
    return ClosureParams(4 * (g.m + g.n) if r is None else r, (1 - 20 * Fraction(xi)) * g.delta_max / 2)


@dataclass
class PMSpanReport:
    bottom_full: bool
    axioms_checked: int
    axiom_violations: list
    fake_checked: int
    fake_violations: list
    fake_fractions: list
    steps_checked: int
    steps_contained: int
    step_violations: list
    skipped: list  # (what, reason)
    right_degree: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    @property
    def containment_ok(self):
        return not self.step_violations

    @property
    def ok(self):
        return self.bottom_full and not (self.axiom_violations or self.fake_violations or self.step_violations)


def _fraction_ok(frac, xi, w0):
    # frac <= (1 - 16 xi)^(w0/8)  <=>  frac^8 <= (1 - 16 xi)^w0
    base = 1 - 16 * Fraction(xi)
    if base < 0:
        return False
    return frac**8 <= base**w0


def pm_span_suite(g, partition, profile, closure_params, derivation, xi, fake_axioms=(), w0=None,
                  formula=None, budget=DEFAULT_ZERO_BUDGET, ctx=None):
    """Checks (a) axioms map to 0, (b) fake-axiom fractions and (c) per-step containment.

    ``derivation`` is a list of ``(c0, c1, c, rule)``.  Steps whose relevant
    sets exceed ``r/4`` or whose enumeration exceeds the budget are skipped
    with a reason rather than counted.
    """
    ctx = ctx or PMContext(g, partition, profile, closure_params, xi, budget)
    r = ctx.params.r
    skipped = []
    bottom = ctx.clause(Clause())[0] == ctx.spaces.full()
    f = formula or encode_pm(g)
    ax_bad, n_ax = [], 0
    for a in f.clauses:
        try:
            lam = ctx.clause(a)[0]
        except (BudgetError, PreconditionError) as e:
            skipped.append((("axiom", a), str(e)))
            continue
        n_ax += 1
        if lam.dim:
            ax_bad.append(a)
    fake_bad, fracs, n_fake = [], [], 0
    for a in fake_axioms:
        if w0 is None:
            raise ParameterError("fake axioms need w0")
        try:
            lam = ctx.clause(a)[0]
        except (BudgetError, PreconditionError) as e:
            skipped.append((("fake", a), str(e)))
            continue
        n_fake += 1
        frac = Fraction(lam.dim, ctx.spaces.ambient)
        fracs.append(frac)
        if not _fraction_ok(frac, ctx.xi, w0):
            fake_bad.append(a)
    n_steps = n_in = 0
    step_bad, witnesses = [], {}
    for k, (c0, c1, c, rule) in enumerate(derivation):
        try:
            (l0, i0), (l1, i1), (lc, ic) = ctx.clause(c0), ctx.clause(c1), ctx.clause(c)
        except (BudgetError, PreconditionError) as e:
            skipped.append((("step", k), str(e)))
            continue
        sizes = [len(i.relevant) for i in (i0, i1, ic)]
        if 4 * max(sizes) > r:
            skipped.append((("step", k), f"relevant sizes {sizes} exceed r/4"))
            continue
        if not all(i.closure.maximal_verified for i in (i0, i1, ic)):
            skipped.append((("step", k), "closure maximality not verified"))
            continue
        n_steps += 1
        if l0.span(l1).contains(lc):
            n_in += 1
        else:
            step_bad.append(k)
            witnesses[k] = _starved_right(ctx, c, (i0, i1), ic)
    holes = [v for v in ctx.index.vertices if v > g.m]
    low = min((ctx.index.deg[v] for v in holes), default=0)
    hyp = {"min": low, "bound": Fraction(r) / Fraction(xi), "holds": low >= Fraction(r) / Fraction(xi)}
    return PMSpanReport(bottom, n_ax, ax_bad, n_fake, fake_bad, fracs, n_steps, n_in, step_bad, skipped,
                        hyp, witnesses)


def _starved_right(ctx, c, premises, info):
    """Right vertices heavy in a premise but light in ``c``, each with the
    number of its edges that do not satisfy ``c``."""
    idx = ctx.index
    parts = idx.split(c)
    heavy = set().union(*(i.view.thick for i in premises)) - set(info.relevant)
    out = []
    for w in sorted(v for v in heavy if not idx.is_left(v)):
        out.append((w, idx.deg[w] - len(idx.neighbourhood(c, w, parts))))
    return out


# ---------------------------------------------------------------------------
# preset instance, random derivations and fake axioms


@dataclass
class PMPreset:
    g: object
    partition: Partition
    profile: VertexProfile
    params: ClosureParams
    xi: Fraction
    seed: int

    def context(self, budget=DEFAULT_ZERO_BUDGET):
        return PMContext(self.g, self.partition, self.profile, self.params, self.xi, budget)

    def formula(self):
        return encode_pm(self.g)


def desk_profile(g, left_drop=4, right_drop=2):
    """``delta_v = 0`` and ``d_v = deg(v) - drop``: left factors of dimension
    ``left_drop / 2``, right factors ``right_drop / 2``."""
    idx = VertexIndex(g)
    d = [max(1, idx.deg[v] - (left_drop if v <= g.m else right_drop)) for v in idx.vertices]
    return VertexProfile(d, [0] * len(d))


def random_regular_graph(m, k, seed, max_restarts=1000):
    """Edges of a random simple ``k``-regular graph on nodes ``1..m``.

    Steger-Wormald: join two random free points on distinct, non-adjacent
    nodes until none are left; restart when stuck."""
    if (m * k) % 2 or k >= m:
        raise ParameterError("need m * k even and k < m")
    for t in range(max_restarts):
        rng = Stream(seed, "regular", t)
        free = [k] * (m + 1)
        free[0] = 0
        adj = {v: set() for v in range(1, m + 1)}
        while True:
            pairs = [(a, b) for a in range(1, m + 1) for b in range(a + 1, m + 1)
                     if free[a] and free[b] and b not in adj[a]]
            if not pairs:
                break
            a, b = pairs[rng.weighted([free[x] * free[y] for x, y in pairs])]
            adj[a].add(b)
            adj[b].add(a)
            free[a] -= 1
            free[b] -= 1
        if not any(free):
            return sorted((a, b) for a in adj for b in adj[a] if a < b)
    raise PreconditionError("regular graph sampling kept getting stuck")


def incidence_graph(m, k, seed):
    """Left vertices are the nodes of a random ``k``-regular graph ``H`` on ``m``
    nodes, right vertices its edges.  Boundary expansion of a left set equals
    its edge cut in ``H``."""
    edges = []
    for j, (a, b) in enumerate(random_regular_graph(m, k, seed), start=1):
        edges += [(a, j), (b, j)]
    return BipartiteGraph.from_edges(m, len(edges) // 2, edges)


def certified_radius(g, c, r_max):
    """Largest ``r <= r_max`` with ``g`` certified as an ``(r, c)`` boundary expander."""
    r = 0
    while r < r_max and certify_boundary_expansion(g, r + 1, c).certified:
        r += 1
    return r


def pm_preset(m=12, k=6, xi=Fraction(3, 64), seed=0, active=4, r_max=8, min_r=8, max_tries=50,
              left_drop=4, right_drop=0):
    """Validation instance on :func:`incidence_graph`.

    ``active`` left vertices go to ``V_P`` (factors of dimension
    ``left_drop / 2``); right vertices have degree 2, so none can carry a space
    and all stay in ``V_H``.  Each right vertex gets ``d = 2``: it is heavy only
    when both of its edges satisfy the clause.  The closure radius is the
    certified radius of ``G'`` at ``c = (1 - 12 xi) Delta / 2`` and must reach
    ``min_r``.
    """
    xi = Fraction(xi)
    for t in range(max_tries):
        g = incidence_graph(m, k, Stream(seed, "pm-preset", t).next64())
        profile = desk_profile(g, left_drop, right_drop)
        rng = Stream(seed, "pm-preset-partition", t)
        vp = [1 + x for x in rng.subset(m, active)]
        part = Partition.from_vp(g, vp, seed, t)
        try:
            profile.validate(g)
            PMSpaces(g, part, profile)
        except PreconditionError:
            continue
        c = (1 - 12 * xi) * g.delta_max / 2
        r = certified_radius(residual_graph(g, part), c, r_max)
        if r >= min_r:
            return PMPreset(g, part, profile, pm_closure_params(g, xi, r), xi, seed)
    raise PreconditionError("no preset instance found")


def random_pm_clause(index, rng, max_edges=3, neg_prob=Fraction(1, 6)):
    """A few random edge literals, mostly positive."""
    n_vars = len(index.vm)
    lits = set()
    for _ in range(1 + rng.below(max_edges)):
        v = 1 + rng.below(n_vars)
        lits.add(-v if rng.below(neg_prob.denominator) < neg_prob.numerator else v)
    return Clause(lits)


def random_pm_derivation(pre, steps, seed, weaken_prob=Fraction(1, 5), n_axioms=4, n_random=4):
    """Same shape as the FPHP sweep: axioms plus random clauses, then random steps."""
    rng = Stream(seed, "pm-derivation")
    f = pre.formula()
    index = VertexIndex(pre.g)
    pool = [f.clauses[k] for k in rng.subset(len(f.clauses), min(n_axioms, len(f.clauses)))]
    pool += [random_pm_clause(index, rng) for _ in range(n_random)]
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
            if c.tautology:
                continue
            out.append((c0, c0, c, "weaken"))
        else:
            pairs = [(a, b) for a in pool for b in pool
                     if any(x > 0 and -x in b for x in a.lits)]
            if not pairs:
                pool.append(random_pm_clause(index, rng))
                continue
            a, b = pairs[rng.below(len(pairs))]
            vs = [x for x in a.lits if x > 0 and -x in b]
            v = vs[rng.below(len(vs))]
            c = Clause((a.literal_set - {v}) | (b.literal_set - {-v}))
            if c.tautology:
                continue
            out.append((a, b, c, "resolve"))
        pool.append(c)
    return out


def construct_pm_fake_axiom(pre, w0, seed, max_tries=200):
    """Positive clause giving exactly ``w0`` left vertices ``d_v`` satisfying edges each.

    Candidates whose super-heavy set comes out different (a right vertex
    collecting too many literals) are redrawn.
    """
    g, prof = pre.g, pre.profile
    index = VertexIndex(g)
    if w0 > g.m:
        raise ParameterError("w0 exceeds the number of left vertices")
    for k in range(max_tries):
        rng = Stream(seed, "pm-fake", k)
        lits = set()
        chosen = [i + 1 for i in rng.subset(g.m, w0)]
        for v in chosen:
            nb = index.nb[v]
            for t in rng.subset(len(nb), prof.d[v - 1]):
                lits.add(index.var(v, nb[t]))
        c = Clause(lits)
        if prof.view(g, c, index=index).fat == frozenset(chosen):
            return c
    raise PreconditionError("could not build a clause with exactly w0 super-heavy vertices")
