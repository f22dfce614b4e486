"""Bipartite graphs, neighbourhoods and boundary-expansion certification.

Left vertices (pigeons) are ``1..m`` and right vertices (holes) are ``1..n``.
Internally each pigeon's neighbourhood is also kept as an int bitmask with
bit ``j - 1`` standing for hole ``j``; the enumeration kernels work on those.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .errors import BudgetError, ParameterError, ParseError
from .rng import Stream

DEFAULT_ENUM_CAP = 10**8


def _bits(mask):
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def _to_mask(holes):
    x = 0
    for j in holes:
        x |= 1 << (j - 1)
    return x


class BipartiteGraph:
    """Immutable bipartite graph ``G = (U u V, E)`` with ``|U| = m``, ``|V| = n``."""

    __slots__ = ("m", "n", "adj", "delta_max", "masks", "_hole_adj")

    def __init__(self, n, adj, allow_isolated=False):
        adj = tuple(tuple(int(j) for j in a) for a in adj)
        if n < 0:
            raise ParameterError("n must be non-negative")
        for i, a in enumerate(adj, 1):
            if not a and not allow_isolated:
                raise ParameterError(f"pigeon {i} has no neighbours")
            for k, j in enumerate(a):
                if not 1 <= j <= n:
                    raise ParameterError(f"pigeon {i}: hole {j} outside [1, {n}]")
                if k and a[k - 1] >= j:
                    raise ParameterError(f"pigeon {i}: adjacency not strictly ascending")
        self.m = len(adj)
        self.n = n
        self.adj = adj
        self.delta_max = max((len(a) for a in adj), default=0)
        self.masks = tuple(_to_mask(a) for a in adj)
        hole_adj = [[] for _ in range(n + 1)]
        for i, a in enumerate(adj, 1):
            for j in a:
                hole_adj[j].append(i)
        self._hole_adj = tuple(tuple(h) for h in hole_adj)

    # views shared with MaskedGraph -------------------------------------
    @property
    def pigeons(self):
        return range(1, self.m + 1)

    @property
    def holes(self):
        return range(1, self.n + 1)

    @property
    def base(self):
        return self

    def neighbours(self, i):
        return self.adj[i - 1]

    def hole_neighbours(self, j):
        return self._hole_adj[j]

    def degree(self, i):
        return len(self.adj[i - 1])

    def hole_degree(self, j):
        return len(self._hole_adj[j])

    def edges(self):
        return [(i, j) for i in self.pigeons for j in self.adj[i - 1]]

    @property
    def hole_mask(self):
        return (1 << self.n) - 1

    def __eq__(self, other):
        return (
            isinstance(other, BipartiteGraph)
            and self.n == other.n
            and self.adj == other.adj
        )

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"BipartiteGraph(m={self.m}, n={self.n}, delta_max={self.delta_max})"

    # constructors -------------------------------------------------------
    @classmethod
    def complete(cls, m, n):
        return cls(n, [range(1, n + 1)] * m)

    @classmethod
    def from_edges(cls, m, n, edges):
        adj = [set() for _ in range(m)]
        for i, j in edges:
            if not 1 <= i <= m:
                raise ParameterError(f"pigeon {i} outside [1, {m}]")
            adj[i - 1].add(j)
        return cls(n, [sorted(a) for a in adj])

    # serialisation ------------------------------------------------------
    def to_text(self):
        lines = [f"{self.m} {self.n} {self.delta_max}"]
        lines += [" ".join(map(str, a)) for a in self.adj]
        return "\n".join(lines) + "\n"

    def sha256(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


class MaskedGraph:
    """The view ``G \\ U`` of a graph with some pigeons and holes removed.

    Removed pigeons have empty adjacency; removed holes are dropped from every
    adjacency list.  Vertex numbering is that of the base graph.
    """

    __slots__ = ("base", "removed_pigeons", "removed_holes", "adj", "masks", "m", "n", "_keep")

    def __init__(self, base, removed_pigeons=(), removed_holes=()):
        if isinstance(base, MaskedGraph):
            removed_pigeons = set(removed_pigeons) | base.removed_pigeons
            removed_holes = set(removed_holes) | base.removed_holes
            base = base.base
        self.base = base
        self.removed_pigeons = frozenset(removed_pigeons)
        self.removed_holes = frozenset(removed_holes)
        for i in self.removed_pigeons:
            _check_pigeon(base, i)
        for j in self.removed_holes:
            if not 1 <= j <= base.n:
                raise ParameterError(f"hole {j} outside [1, {base.n}]")
        self.m = base.m
        self.n = base.n
        self._keep = base.hole_mask & ~_to_mask(self.removed_holes)
        self.adj = tuple(
            () if i in self.removed_pigeons else tuple(j for j in a if j not in self.removed_holes)
            for i, a in enumerate(base.adj, 1)
        )
        self.masks = tuple(_to_mask(a) for a in self.adj)

    @property
    def pigeons(self):
        return [i for i in range(1, self.m + 1) if i not in self.removed_pigeons]

    @property
    def holes(self):
        return [j for j in range(1, self.n + 1) if j not in self.removed_holes]

    @property
    def delta_max(self):
        return max((len(a) for a in self.adj), default=0)

    @property
    def hole_mask(self):
        return self._keep

    def neighbours(self, i):
        return self.adj[i - 1]

    def hole_neighbours(self, j):
        if j in self.removed_holes:
            return ()
        return tuple(i for i in self.base.hole_neighbours(j) if i not in self.removed_pigeons)

    def degree(self, i):
        return len(self.adj[i - 1])

    def hole_degree(self, j):
        return len(self.hole_neighbours(j))

    def edges(self):
        return [(i, j) for i in self.pigeons for j in self.adj[i - 1]]

    def __repr__(self):
        return (
            f"MaskedGraph(base={self.base!r}, -{len(self.removed_pigeons)} pigeons, "
            f"-{len(self.removed_holes)} holes)"
        )


def _check_pigeon(g, i):
    if not 1 <= i <= g.m:
        raise ParameterError(f"pigeon {i} outside [1, {g.m}]")


def _check_set(g, s):
    s = sorted(set(s))
    for i in s:
        _check_pigeon(g, i)
    return s


# ---------------------------------------------------------------------------
# sampling and file I/O


def sample_random(m, n, delta, seed):
    """Sample from G(m, n, delta): each pigeon gets a uniform delta-subset of holes.

    Pigeon ``i`` draws from its own stream ``(seed, "graph", i)``, so the
    graph on ``m`` pigeons is a prefix of the graph on ``m + 1``.
    """
    if m < 1:
        raise ParameterError("m must be at least 1")
    if not 1 <= delta <= n:
        raise ParameterError(f"need 1 <= delta <= n, got delta={delta}, n={n}")
    adj = [[j + 1 for j in Stream(seed, "graph", i).subset(n, delta)] for i in range(1, m + 1)]
    return BipartiteGraph(n, adj)


def parse_graph(text):
    """Parse the graph file format (see :meth:`BipartiteGraph.to_text`)."""
    if text and not text.endswith("\n"):
        raise ParseError("missing trailing newline", len(text.splitlines()))
    rows = []
    for no, line in enumerate(text.split("\n")[:-1], 1):
        if line.startswith("#"):
            continue
        try:
            rows.append((no, [int(t) for t in line.split(" ")] if line else []))
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", no) from None
    if not rows:
        raise ParseError("missing header", 1)
    no, header = rows[0]
    if len(header) != 3:
        raise ParseError("header must be 'm n delta_max'", no)
    m, n, dmax = header
    body = rows[1:]
    if len(body) != m:
        raise ParseError(f"expected {m} pigeon lines, found {len(body)}", no)
    try:
        g = BipartiteGraph(n, [a for _, a in body])
    except ParameterError as exc:
        raise ParseError(str(exc), no) from None
    if g.delta_max != dmax:
        raise ParseError(f"declared delta_max {dmax} but maximum degree is {g.delta_max}", no)
    return g


def read_graph(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_graph(fh.read())


def write_graph(g, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(g.to_text())


# ---------------------------------------------------------------------------
# neighbourhoods


def neighbourhood(g, s):
    """N(S): union of the adjacency lists of ``s``."""
    x = 0
    for i in _check_set(g, s):
        x |= g.masks[i - 1]
    return set(_bits(x))


def boundary_mask(g, s):
    once = twice = 0
    for i in s:
        a = g.masks[i - 1]
        twice |= once & a
        once = (once | a) & ~twice
    return once


def boundary(g, s):
    """Unique neighbourhood: holes with exactly one neighbour in ``s``."""
    return set(_bits(boundary_mask(g, _check_set(g, s))))


def remove_vertices(g, pigeons=(), holes=()):
    """Masked view ``G \\ U``; the original graph is untouched."""
    return MaskedGraph(g, pigeons, holes)


def check_unique_neighbour_inequality(g, s):
    """|N(S)| <= (Delta |S| + |boundary(S)|) / 2 -- holds for every bipartite graph."""
    s = _check_set(g, s)
    if not s:
        raise ParameterError("s must be nonempty")
    return 2 * len(neighbourhood(g, s)) <= g.delta_max * len(s) + len(boundary(g, s))


# ---------------------------------------------------------------------------
# expansion


@dataclass(frozen=True)
class ExpansionReport:
    r: int
    c: Fraction
    certified: bool
    worst_set: tuple
    worst_ratio: Fraction | None
    mode: str = "exhaustive"
    trials: int | None = None
    kind: str = "boundary"
    notes: tuple = field(default=())


def enumeration_size(m, r):
    return sum(math.comb(m, s) for s in range(1, min(r, m) + 1))


def _certify(g, r, c, unique, cap, backend=None):
    c = Fraction(c)
    if r < 1:
        raise ParameterError("r must be at least 1")
    pigeons = list(g.pigeons)
    r_eff = min(r, len(pigeons))
    work = enumeration_size(len(pigeons), r_eff)
    if work > cap:
        raise BudgetError(
            f"{work} subsets exceed the enumeration cap {cap}; use Monte Carlo", estimate=work
        )
    kind = "boundary" if unique else "vertex"
    if not pigeons:
        return ExpansionReport(r, c, True, (), None, kind=kind, notes=("no left vertices",))
    cnt, size, members = kernels.min_expansion(
        g.masks, r_eff, unique, [i - 1 for i in pigeons], g.hole_mask, backend=backend
    )
    ratio = Fraction(cnt, size)
    return ExpansionReport(r, c, ratio >= c, tuple(i + 1 for i in members), ratio, kind=kind)


def certify_boundary_expansion(g, r, c, cap=DEFAULT_ENUM_CAP, backend=None):
    """Exhaustively check |boundary(S)| >= c|S| for all nonempty S, |S| <= r.

    ``r`` larger than the number of (unmasked) pigeons is clamped.  The
    witness is the lexicographically first set of minimum ratio.
    """
    return _certify(g, r, c, True, cap, backend)


def certify_vertex_expansion(g, r, c, cap=DEFAULT_ENUM_CAP, backend=None):
    """Same as :func:`certify_boundary_expansion` with |N(S)| in place of the boundary."""
    return _certify(g, r, c, False, cap, backend)


def estimate_expansion_monte_carlo(g, r, c, trials, seed):
    """Worst boundary ratio over ``trials`` random sets; never certifies."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if r < 1:
        raise ParameterError("r must be at least 1")
    c = Fraction(c)
    pigeons = list(g.pigeons)
    if not pigeons:
        return ExpansionReport(r, c, False, (), None, "monte_carlo", trials)
    r_eff = min(r, len(pigeons))
    rng = Stream(seed, "monte-carlo")
    best = None
    for _ in range(trials):
        k = rng.between(1, r_eff)
        s = tuple(pigeons[x] for x in rng.subset(len(pigeons), k))
        ratio = Fraction(len(_bits(boundary_mask(g, s))), k)
        if best is None or ratio < best[0]:
            best = (ratio, s)
    return ExpansionReport(r, c, False, best[1], best[0], "monte_carlo", trials)


@dataclass(frozen=True)
class ExpanderExperiment:
    fraction: Fraction | None
    passed: int
    certified_trials: int
    skipped: int
    r: int
    c: Fraction
    r_clamped: bool
    hypotheses: dict
    notes: tuple = ()


def expander_probability_experiment(
    m, n, delta, xi, chi, trials, seed, cap=DEFAULT_ENUM_CAP, log_chi=None
):
    """Fraction of sampled graphs that are (r, delta, (1 - 2 xi) delta) boundary expanders.

    ``r = floor(n / (delta * chi))`` clamped to at least 1.  ``chi`` may be a
    float (e.g. ``e**8``); pass ``log_chi`` to state ``ln chi`` exactly.
    The hypotheses of the random-expander statement are evaluated and
    reported, never enforced.
    """
    xi = Fraction(xi)
    ln_chi = math.log(chi) if log_chi is None else float(log_chi)
    hyp = {
        "xi < 1/2": xi < Fraction(1, 2),
        "xi ln chi >= 2": float(xi) * ln_chi >= 2,
        "xi delta ln chi >= 4 ln m": float(xi) * delta * ln_chi >= 4 * math.log(m),
    }
    chi_q = Fraction(chi) if not isinstance(chi, float) else None
    if chi_q is not None:
        r_raw = math.floor(Fraction(n) / (delta * chi_q))
    else:
        r_raw = math.floor(n / (delta * chi))
    r = max(1, r_raw)
    c = (1 - 2 * xi) * delta
    notes = []
    if r_raw < 1:
        notes.append(f"r = n/(delta chi) rounds to {r_raw}; clamped to 1")
    if trials <= 0:
        notes.append("no trials requested; fraction undefined")
        return ExpanderExperiment(None, 0, 0, 0, r, c, r_raw < 1, hyp, tuple(notes))
    passed = skipped = 0
    for t in range(trials):
        g = sample_random(m, n, delta, Stream(seed, "expander-trial", t).next64())
        try:
            rep = certify_boundary_expansion(g, r, c, cap)
        except BudgetError:
            skipped += 1
            continue
        passed += rep.certified
    done = trials - skipped
    frac = Fraction(passed, done) if done else None
    if skipped:
        notes.append(f"{skipped} trials skipped (enumeration budget)")
    return ExpanderExperiment(frac, passed, done, skipped, r, c, r_raw < 1, hyp, tuple(notes))


# ---------------------------------------------------------------------------
# matchings


def maximum_matching(g):
    """Maximum matching as a dict pigeon -> hole (augmenting paths)."""
    hole_of = {}
    pigeon_of = {}

    def augment(i, seen):
        for j in g.neighbours(i):
            if j in seen:
                continue
            seen.add(j)
            if j not in pigeon_of or augment(pigeon_of[j], seen):
                hole_of[i] = j
                pigeon_of[j] = i
                return True
        return False

    for i in g.pigeons:
        augment(i, set())
    return hole_of


def exists_perfect_matching(g):
    """True iff some matching covers every pigeon and every hole."""
    if len(list(g.pigeons)) != len(list(g.holes)):
        return False
    return len(maximum_matching(g)) == len(list(g.pigeons))
