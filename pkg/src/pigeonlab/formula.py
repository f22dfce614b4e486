"""PHP / FPHP / perfect-matching CNF encodings over a bipartite graph.

Variable ``x_{i,j}`` gets the id equal to the 1-based rank of the edge
``(i, j)`` in lexicographic order, for every encoding.  Literals are signed
ints (DIMACS convention).
"""

from __future__ import annotations

from itertools import combinations

from .errors import ParameterError, ParseError

SATISFIED = "satisfied"
FALSIFIED = "falsified"
UNDETERMINED = "undetermined"


class Clause:
    """Immutable set of literals, kept sorted by ``(|lit|, lit)``."""

    __slots__ = ("lits", "_set", "_hash")

    def __init__(self, lits=()):
        s = frozenset(lits)
        if 0 in s:
            raise ParameterError("0 is not a literal")
        self._set = s
        self.lits = tuple(sorted(s, key=lambda x: (abs(x), x)))
        self._hash = hash(s)

    @property
    def literal_set(self):
        return self._set

    @property
    def tautology(self):
        return any(-x in self._set for x in self.lits if x > 0)

    def variables(self):
        return sorted({abs(x) for x in self.lits})

    def issubset(self, other):
        return self._set <= other._set

    def __contains__(self, lit):
        return lit in self._set

    def __len__(self):
        return len(self.lits)

    def __iter__(self):
        return iter(self.lits)

    def __bool__(self):
        return True

    def is_empty(self):
        return not self.lits

    def __eq__(self, other):
        return isinstance(other, Clause) and self._set == other._set

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Clause(" + (" ".join(map(str, self.lits)) or "⊥") + ")"


EMPTY = Clause()


class VarMap:
    """Bijection between edges ``(i, j)`` of a graph and variable ids."""

    __slots__ = ("_id", "_edge")

    def __init__(self, g):
        self._edge = [None] + g.edges()
        self._id = {e: k for k, e in enumerate(self._edge) if k}

    def var(self, i, j):
        try:
            return self._id[(i, j)]
        except KeyError:
            raise ParameterError(f"({i}, {j}) is not an edge") from None

    def edge(self, v):
        if not 1 <= v < len(self._edge):
            raise ParameterError(f"variable {v} out of range")
        return self._edge[v]

    def __len__(self):
        return len(self._edge) - 1

    def __contains__(self, e):
        return e in self._id


class CnfFormula:
    """Clause list with provenance tags; ``graph`` is ``None`` for formulas read from DIMACS."""

    def __init__(self, num_vars, clauses, tags=None, graph=None, variant=None, comments=()):
        self.num_vars = num_vars
        self.clauses = list(clauses)
        self.tags = list(tags) if tags is not None else [("clause",)] * len(self.clauses)
        self.graph = graph
        self.variant = variant
        self.comments = list(comments)
        self._vars = VarMap(graph) if graph is not None else None
        for c in self.clauses:
            for x in c.lits:
                if abs(x) > num_vars:
                    raise ParameterError(f"literal {x} exceeds {num_vars} variables")

    @property
    def varmap(self):
        return self._vars

    def clause_set(self):
        return set(self.clauses)

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)


def _emit(out, seen, clause, tag):
    if clause not in seen:
        seen.add(clause)
        out.append((clause, tag))


def _php_clauses(g, vm):
    out, seen = [], set()
    for i in g.pigeons:
        _emit(out, seen, Clause(vm.var(i, j) for j in g.neighbours(i)), ("pigeon_axiom", i))
    for j in g.holes:
        for i, k in combinations(g.hole_neighbours(j), 2):
            _emit(out, seen, Clause((-vm.var(i, j), -vm.var(k, j))), ("hole_axiom", i, k, j))
    return out, seen


def _functionality(g, vm, out, seen):
    for i in g.pigeons:
        for j, k in combinations(g.neighbours(i), 2):
            _emit(out, seen, Clause((-vm.var(i, j), -vm.var(i, k))), ("functionality_axiom", i, j, k))


def _build(g, vm, pairs, variant):
    return CnfFormula(len(vm), [c for c, _ in pairs], [t for _, t in pairs], g, variant)


def encode_php(g):
    """Pigeon axioms (ascending i) then hole axioms (ascending (j, i, i'))."""
    vm = VarMap(g)
    out, _ = _php_clauses(g, vm)
    return _build(g, vm, out, "php")


def encode_fphp(g):
    """PHP plus functionality axioms, ascending by (i, j, j')."""
    vm = VarMap(g)
    out, seen = _php_clauses(g, vm)
    _functionality(g, vm, out, seen)
    return _build(g, vm, out, "fphp")


def encode_pm(g):
    """Perfect-matching formula: vertex axioms for both sides plus pair axioms.

    Vertex ids are unified: pigeons ``1..m``, holes ``m+1..m+n``.  Order: pigeon
    vertex axioms, hole vertex axioms, pigeon-side pairs, hole-side pairs.  A
    clause equal to an earlier one (a degree-1 pigeon and degree-1 hole on
    the same edge) is emitted once.
    """
    vm = VarMap(g)
    out, seen = [], set()
    for i in g.pigeons:
        _emit(out, seen, Clause(vm.var(i, j) for j in g.neighbours(i)), ("vertex_axiom", i))
    for j in g.holes:
        _emit(out, seen, Clause(vm.var(i, j) for i in g.hole_neighbours(j)), ("vertex_axiom", g.m + j))
    _functionality(g, vm, out, seen)
    for j in g.holes:
        for i, k in combinations(g.hole_neighbours(j), 2):
            _emit(out, seen, Clause((-vm.var(i, j), -vm.var(k, j))), ("hole_axiom", i, k, j))
    return _build(g, vm, out, "pm")


ENCODERS = {"php": encode_php, "fphp": encode_fphp, "pm": encode_pm}


def encode(g, variant):
    try:
        return ENCODERS[variant](g)
    except KeyError:
        raise ParameterError(f"unknown variant {variant!r}") from None


# ---------------------------------------------------------------------------
# matchings and assignments


def check_matching(g, phi):
    """Validate a pigeon -> hole dict as a matching of ``g``."""
    holes = set()
    for i, j in phi.items():
        if j not in g.neighbours(i):
            raise ParameterError(f"({i}, {j}) is not an edge")
        if j in holes:
            raise ParameterError(f"hole {j} matched twice")
        holes.add(j)
    return True


def matching_to_assignment(g, phi, vm=None):
    """x_{i,phi(i)} = 1 and x_{i,j'} = 0 for the other holes of matched pigeons."""
    check_matching(g, phi)
    vm = vm or VarMap(g)
    rho = {}
    for i, j in phi.items():
        for k in g.neighbours(i):
            rho[vm.var(i, k)] = 1 if k == j else 0
    return rho


def clause_status(c, rho):
    undetermined = False
    for x in c.lits:
        v = rho.get(abs(x))
        if v is None:
            undetermined = True
        elif (v == 1) == (x > 0):
            return SATISFIED
    return UNDETERMINED if undetermined else FALSIFIED


def clause_satisfied(c, assignment, g=None):
    """Three-valued status of ``c`` under an assignment, or a matching when ``g`` is given."""
    rho = matching_to_assignment(g, assignment) if g is not None else assignment
    return clause_status(c, rho)


def restrict(obj, rho):
    """Restrict a clause (returns SATISFIED or the shrunk clause) or a formula."""
    if isinstance(obj, Clause):
        keep = []
        for x in obj.lits:
            v = rho.get(abs(x))
            if v is None:
                keep.append(x)
            elif (v == 1) == (x > 0):
                return SATISFIED
        return Clause(keep)
    clauses, tags = [], []
    for c, t in zip(obj.clauses, obj.tags):
        rc = restrict(c, rho)
        if rc is not SATISFIED:
            clauses.append(rc)
            tags.append(t)
    return CnfFormula(obj.num_vars, clauses, tags, obj.graph, obj.variant, obj.comments)


def evaluate(f, model):
    """True iff the total assignment ``model`` satisfies every clause."""
    return all(clause_status(c, model) == SATISFIED for c in f.clauses)


# ---------------------------------------------------------------------------
# DIMACS


def dimacs_text(f, seed=None):
    lines = []
    if f.comments:
        lines += [f"c {c}" if c else "c" for c in f.comments]
    else:
        if f.graph is not None:
            lines.append(f"c graph-sha256 {f.graph.sha256()}")
        if f.variant:
            lines.append(f"c variant {f.variant}")
        if seed is not None:
            lines.append(f"c seed {seed}")
    lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    for c in f.clauses:
        lines.append(" ".join(map(str, c.lits + (0,))))
    return "\n".join(lines) + "\n"


def write_dimacs(f, sink, seed=None):
    """Write to a path or a text stream."""
    text = dimacs_text(f, seed)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def parse_dimacs(text):
    comments, clauses = [], []
    header = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s == "c" or s.startswith("c "):
            if header is None:
                comments.append(s[2:])
            continue
        if s.startswith("p"):
            parts = s.split()
            if header is not None or len(parts) != 4 or parts[:2] != ["p", "cnf"]:
                raise ParseError("malformed problem line", no)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError("malformed problem line", no) from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError("negative counts in problem line", no)
            continue
        if header is None:
            raise ParseError("clause before problem line", no)
        try:
            toks = [int(t) for t in s.split()]
        except ValueError:
            raise ParseError(f"bad literal in {s!r}", no) from None
        if not toks or toks[-1] != 0 or 0 in toks[:-1]:
            raise ParseError("clause must end with a single terminating 0", no)
        lits = toks[:-1]
        if any(abs(x) > header[0] for x in lits):
            raise ParseError("literal exceeds declared variable count", no)
        if len(set(lits)) != len(lits):
            raise ParseError("duplicate literal", no)
        clauses.append(Clause(lits))
    if header is None:
        raise ParseError("missing problem line", 1)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}", None)
    variant = None
    for c in comments:
        if c.startswith("variant "):
            variant = c.split(None, 1)[1]
    return CnfFormula(header[0], clauses, None, None, variant, comments)


def read_dimacs(source):
    if hasattr(source, "read"):
        return parse_dimacs(source.read())
    with open(source, encoding="utf-8") as fh:
        return parse_dimacs(fh.read())
