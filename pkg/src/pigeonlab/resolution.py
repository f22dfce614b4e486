"""Resolution proofs: rules, checker, DPLL / Davis-Putnam provers, TRACECHECK I/O."""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .errors import BudgetError, ParseError, RuleError
from .formula import EMPTY, Clause
from .rng import Stream

AXIOM, RESOLVE, WEAKEN = "axiom", "resolve", "weaken"

DEFAULT_NODE_BUDGET = 2_000_000
DEFAULT_CLAUSE_BUDGET = 200_000


class ProofLine:
    __slots__ = ("id", "clause", "rule", "parents", "pivot")

    def __init__(self, id, clause, rule=AXIOM, parents=(), pivot=None):
        self.id = id
        self.clause = clause
        self.rule = rule
        self.parents = tuple(parents)
        self.pivot = pivot

    def __eq__(self, other):
        return isinstance(other, ProofLine) and (
            self.id, self.clause, self.rule, self.parents, self.pivot
        ) == (other.id, other.clause, other.rule, other.parents, other.pivot)

    def __repr__(self):
        extra = f" {self.parents}" if self.parents else ""
        if self.pivot is not None:
            extra += f" on {self.pivot}"
        return f"<{self.id}: {self.clause!r} {self.rule}{extra}>"


class ResolutionProof:
    def __init__(self, lines=()):
        self.lines = list(lines)

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    @property
    def length(self):
        return len(self.lines)

    @property
    def final(self):
        return self.lines[-1].clause if self.lines else None

    @property
    def is_refutation(self):
        return bool(self.lines) and self.lines[-1].clause.is_empty()

    def axioms(self):
        return [ln.clause for ln in self.lines if ln.rule == AXIOM]

    def __eq__(self, other):
        return isinstance(other, ResolutionProof) and self.lines == other.lines


class ProofBuilder:
    """Append-only proof under construction; axioms are added once, on first use."""

    def __init__(self):
        self.lines = []
        self._axiom_ids = {}

    def axiom(self, clause):
        lid = self._axiom_ids.get(clause)
        if lid is None:
            lid = len(self.lines) + 1
            self.lines.append(ProofLine(lid, clause, AXIOM))
            self._axiom_ids[clause] = lid
        return lid

    def add(self, clause, rule, parents=(), pivot=None):
        lid = len(self.lines) + 1
        self.lines.append(ProofLine(lid, clause, rule, parents, pivot))
        return lid

    def proof(self):
        return ResolutionProof(self.lines)


# ---------------------------------------------------------------------------
# rules


def resolve(b, c, pivot):
    """Resolvent of ``b`` (containing ``pivot``) and ``c`` (containing ``-pivot``)."""
    if pivot <= 0:
        raise RuleError("pivot must be a positive variable id")
    if pivot not in b:
        raise RuleError(f"pivot {pivot} does not occur positively in the first clause")
    if -pivot not in c:
        raise RuleError(f"pivot {pivot} does not occur negatively in the second clause")
    return Clause((b.literal_set - {pivot}) | (c.literal_set - {-pivot}))


def weaken(c, d):
    """Weakening ``c`` to its superset ``d``."""
    if not c.issubset(d):
        raise RuleError("weakening target is not a superset")
    return d


def _resolve_any_order(a, b, pivot):
    if pivot is None or pivot <= 0:
        raise RuleError("missing or non-positive pivot")
    if pivot in a and -pivot in b:
        return resolve(a, b, pivot)
    if pivot in b and -pivot in a:
        return resolve(b, a, pivot)
    raise RuleError(f"pivot {pivot} does not clash between the parents")


@dataclass(frozen=True)
class Verdict:
    valid: bool
    line: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.valid


def check_proof(f, pi, extra_axioms=(), require_refutation=True):
    """Validate every line of ``pi``; axioms must come from ``f`` or ``extra_axioms``."""
    allowed = set(f.clauses if hasattr(f, "clauses") else f) | set(extra_axioms)
    seen = {}
    last = 0
    for ln in pi.lines:
        if ln.id <= last:
            return Verdict(False, ln.id, "line ids not strictly increasing")
        last = ln.id
        try:
            for p in ln.parents:
                if p not in seen:
                    raise RuleError(f"parent {p} is not an earlier line")
            if ln.rule == AXIOM:
                if ln.parents or ln.pivot is not None:
                    raise RuleError("axiom line with parents")
                if ln.clause not in allowed:
                    raise RuleError("clause is not an axiom")
            elif ln.rule == RESOLVE:
                if len(ln.parents) != 2:
                    raise RuleError("resolution needs two parents")
                got = _resolve_any_order(seen[ln.parents[0]], seen[ln.parents[1]], ln.pivot)
                if got != ln.clause:
                    raise RuleError("clause differs from the resolvent")
            elif ln.rule == WEAKEN:
                if len(ln.parents) != 1 or ln.pivot is not None:
                    raise RuleError("weakening needs exactly one parent")
                weaken(seen[ln.parents[0]], ln.clause)
            else:
                raise RuleError(f"unknown rule {ln.rule!r}")
        except RuleError as exc:
            return Verdict(False, ln.id, str(exc))
        seen[ln.id] = ln.clause
    if require_refutation and not pi.is_refutation:
        return Verdict(False, pi.lines[-1].id if pi.lines else None, "last clause is not empty")
    return Verdict(True)


# ---------------------------------------------------------------------------
# DPLL with proof extraction


@dataclass
class ProverResult:
    status: str  # "unsat" | "sat"
    proof: ResolutionProof | None = None
    model: dict | None = None
    nodes: int = 0

    @property
    def unsat(self):
        return self.status == "unsat"


class _Sat(Exception):
    pass


class _Dpll:
    def __init__(self, f, branching, seed, node_budget):
        self.nv = f.num_vars
        self.branching = branching
        self.rng = Stream(seed, "dpll") if branching == "random" else None
        self.budget = node_budget
        self.nodes = 0
        self.clauses = []
        self.cl_obj = []
        for c in dict.fromkeys(f.clauses):
            if not c.tautology:
                self.clauses.append(c.lits)
                self.cl_obj.append(c)
        nv = self.nv
        self.occ = {lit: [] for v in range(1, nv + 1) for lit in (v, -v)}
        for ci, c in enumerate(self.clauses):
            for x in c:
                self.occ[x].append(ci)
        self.val = [-1] * (nv + 1)
        self.nsat = [0] * len(self.clauses)
        self.nfalse = [0] * len(self.clauses)
        self.size = [len(c) for c in self.clauses]
        self.count = [0] * (nv + 1)
        for c in self.clauses:
            for x in c:
                self.count[abs(x)] += 1
        self.reason = [None] * (nv + 1)
        self.pb = ProofBuilder()
        self.sets = [c.literal_set for c in self.cl_obj]

    # assignment bookkeeping ------------------------------------------------
    def _assign(self, lit):
        v = abs(lit)
        self.val[v] = 1 if lit > 0 else 0
        nsat, count, clauses = self.nsat, self.count, self.clauses
        for ci in self.occ[lit]:
            nsat[ci] += 1
            if nsat[ci] == 1:
                for x in clauses[ci]:
                    count[abs(x)] -= 1
        nfalse, size = self.nfalse, self.size
        hits = []
        for ci in self.occ[-lit]:
            nfalse[ci] += 1
            if not nsat[ci] and nfalse[ci] >= size[ci] - 1:
                hits.append(ci)
        return hits

    def _unassign(self, lit):
        v = abs(lit)
        self.val[v] = -1
        self.reason[v] = None
        nsat, count, clauses = self.nsat, self.count, self.clauses
        for ci in self.occ[lit]:
            nsat[ci] -= 1
            if nsat[ci] == 0:
                for x in clauses[ci]:
                    count[abs(x)] += 1
        nfalse = self.nfalse
        for ci in self.occ[-lit]:
            nfalse[ci] -= 1

    def _propagate(self, trail, pending):
        """Unit propagation; returns a conflicting clause index or ``None``."""
        nsat, nfalse, size, val, clauses = self.nsat, self.nfalse, self.size, self.val, self.clauses
        while pending:
            ci = pending.pop()
            if nsat[ci]:
                continue
            if nfalse[ci] == size[ci]:
                return ci
            if nfalse[ci] != size[ci] - 1:
                continue
            for x in clauses[ci]:
                if val[abs(x)] < 0:
                    break
            self.reason[abs(x)] = ci
            trail.append(x)
            pending.extend(self._assign(x))
        return None

    def _choose(self):
        val, count = self.val, self.count
        if self.branching == "fixed-order":
            for v in range(1, self.nv + 1):
                if val[v] < 0 and count[v] > 0:
                    return v
            return None
        best, bv = 0, None
        ties = []
        for v in range(1, self.nv + 1):
            if val[v] < 0:
                c = count[v]
                if c > best:
                    best, bv = c, v
                    ties = [v]
                elif c == best and c:
                    ties.append(v)
        if bv is None:
            return None
        if self.rng is not None:
            return ties[self.rng.below(len(ties))]
        return bv

    # proof extraction ------------------------------------------------------
    def _axiom(self, ci):
        return self.pb.axiom(self.cl_obj[ci])

    def _res(self, a_set, a_id, b_set, b_id, v):
        # a contains +v, b contains -v
        out = (a_set - {v}) | (b_set - {-v})
        return out, self.pb.add(Clause(out), RESOLVE, (a_id, b_id), v)

    def _explain(self, cur, cid, trail):
        """Resolve away propagated literals of ``trail`` (reverse order)."""
        for lit in reversed(trail):
            if -lit not in cur:
                continue
            ci = self.reason[abs(lit)]
            rset, rid = self.sets[ci], self._axiom(ci)
            v = abs(lit)
            if lit > 0:
                cur, cid = self._res(rset, rid, cur, cid, v)
            else:
                cur, cid = self._res(cur, cid, rset, rid, v)
        return cur, cid

    def _node(self, decision):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetError(f"DPLL node budget {self.budget} exceeded", estimate=self.nodes)
        trail = []
        pending = []
        if decision is not None:
            trail.append(decision)
            pending = self._assign(decision)
        else:
            pending = [ci for ci in range(len(self.clauses)) if self.size[ci] <= 1]
        # the decision literal is part of the entry assignment; keep it out of _explain
        start = 1 if decision is not None else 0
        try:
            out = self._body(trail, pending, start)
        except _Sat:
            raise
        except BaseException:
            self._undo(trail)
            raise
        self._undo(trail)
        return out

    def _undo(self, trail):
        for lit in reversed(trail):
            self._unassign(lit)

    def _body(self, trail, pending, start):
        conflict = self._propagate(trail, pending)
        if conflict is not None:
            cur, cid = self.sets[conflict], self._axiom(conflict)
            return self._explain(cur, cid, trail[start:])
        v = self._choose()
        if v is None:
            raise _Sat()
        c1, id1 = self._node(v)
        if -v not in c1:
            cur, cid = c1, id1
        else:
            c0, id0 = self._node(-v)
            if v not in c0:
                cur, cid = c0, id0
            else:
                cur, cid = self._res(c0, id0, c1, id1, v)
        return self._explain(cur, cid, trail[start:])

    def run(self):
        if any(not c for c in self.clauses):
            lid = self.pb.axiom(EMPTY)
            return ProverResult("unsat", ResolutionProof(self.pb.lines[:lid]), nodes=0)
        limit = max(sys.getrecursionlimit(), 4 * self.nv + 100)
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(limit)
        try:
            cur, cid = self._node(None)
        except _Sat:
            model = {v: (self.val[v] if self.val[v] >= 0 else 0) for v in range(1, self.nv + 1)}
            return ProverResult("sat", model=model, nodes=self.nodes)
        finally:
            sys.setrecursionlimit(old)
        assert not cur, "root explanation must be empty"
        return ProverResult("unsat", ResolutionProof(self.pb.lines[:cid]), nodes=self.nodes)


def prove_dpll(f, branching="max-occurrence", seed=0, node_budget=DEFAULT_NODE_BUDGET):
    """Tree-like DPLL; on UNSAT the result carries a checker-valid refutation.

    ``branching`` is ``"max-occurrence"`` (ties to the lowest variable id),
    ``"fixed-order"`` (lowest unassigned variable) or ``"random"`` (seeded
    tie-breaking among max-occurrence variables).  The positive branch is
    explored first; when its clause does not mention the branch variable the
    negative branch is skipped.
    """
    if branching not in ("max-occurrence", "fixed-order", "random"):
        raise ValueError(f"unknown branching rule {branching!r}")
    return _Dpll(f, branching, seed, node_budget).run()


# ---------------------------------------------------------------------------
# Davis-Putnam elimination


def prove_dp(f, elimination_order=None, clause_budget=DEFAULT_CLAUSE_BUDGET):
    """Ordered variable elimination, recording every resolvent as a proof line.

    Variables missing from ``elimination_order`` are eliminated afterwards in
    ascending order.  Resolvents that are tautologies or already present are
    not added.  Input clauses enter the proof as axiom lines on first use.
    """
    order = list(dict.fromkeys(elimination_order or ()))
    order += [v for v in range(1, f.num_vars + 1) if v not in set(order)]
    pb = ProofBuilder()
    line_id = {}
    current = dict.fromkeys(c for c in f.clauses if not c.tautology)
    if EMPTY in current:
        pb.axiom(EMPTY)
        return ProverResult("unsat", pb.proof())

    def lid(c):
        if c not in line_id:
            line_id[c] = pb.axiom(c)
        return line_id[c]

    removed = []
    total = len(current)
    for v in order:
        pos = [c for c in current if v in c]
        neg = [c for c in current if -v in c]
        for c in pos + neg:
            del current[c]
        removed.append((v, neg))
        for a in pos:
            for b in neg:
                r = Clause((a.literal_set - {v}) | (b.literal_set - {-v}))
                if r.tautology or r in current:
                    continue
                line_id[r] = pb.add(r, RESOLVE, (lid(a), lid(b)), v)
                current[r] = None
                total += 1
                if total > clause_budget:
                    raise BudgetError(f"DP clause budget {clause_budget} exceeded", estimate=total)
                if r.is_empty():
                    return ProverResult("unsat", pb.proof())
    # satisfiable: back-substitute in reverse elimination order
    model = {u: 0 for u in range(1, f.num_vars + 1)}
    for v, neg in reversed(removed):
        model[v] = 1
        for c in neg:
            if not any(x != -v and (model[abs(x)] == 1) == (x > 0) for x in c.lits):
                model[v] = 0
                break
    return ProverResult("sat", model=model)


# ---------------------------------------------------------------------------
# weakening elimination


def strip_weakenings(pi):
    """Equivalent weakening-free proof whose line ``k`` derives a subset of line ``k``.

    Each original line is mapped to a line of the output deriving a subclause
    of it.  Weakenings disappear; a resolution whose strengthened parent has
    lost the pivot is replaced by that parent.  The output is never longer.
    """
    pb = ProofBuilder()
    strong = {}  # old id -> (clause, new id)
    for ln in pi.lines:
        if ln.rule == AXIOM:
            strong[ln.id] = (ln.clause, pb.axiom(ln.clause))
        elif ln.rule == WEAKEN:
            strong[ln.id] = strong[ln.parents[0]]
        else:
            (a, ia), (b, ib) = strong[ln.parents[0]], strong[ln.parents[1]]
            v = ln.pivot
            if -v in a and v in b:
                (a, ia), (b, ib) = (b, ib), (a, ia)
            if v not in a:
                strong[ln.id] = (a, ia)
            elif -v not in b:
                strong[ln.id] = (b, ib)
            else:
                c = resolve(a, b, v)
                strong[ln.id] = (c, pb.add(c, RESOLVE, (ia, ib), v))
    if not pi.lines:
        return ResolutionProof()
    # lines created after the final clause's image cannot be its ancestors
    _, last = strong[pi.lines[-1].id]
    return ResolutionProof(pb.lines[:last])


# ---------------------------------------------------------------------------
# TRACECHECK


def trace_text(pi):
    out = []
    for ln in pi.lines:
        parts = [str(ln.id)] + [str(x) for x in ln.clause.lits] + ["0"]
        parts += [str(p) for p in ln.parents] + ["0"]
        out.append(" ".join(parts))
    return "\n".join(out) + ("\n" if out else "")


def write_trace(pi, sink):
    text = trace_text(pi)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def parse_trace(text):
    """Parse TRACECHECK text.  Two antecedents: resolution (pivot re-derived);
    one: weakening; none: axiom."""
    lines = []
    clauses = {}
    last = 0
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s:
            continue
        try:
            toks = [int(t) for t in s.split()]
        except ValueError:
            raise ParseError(f"non-integer token in {s!r}", no) from None
        if toks.count(0) != 2 or toks[-1] != 0:
            raise ParseError("expected '<id> <lits> 0 <antecedents> 0'", no)
        lid = toks[0]
        if lid <= last:
            raise ParseError("ids must be positive and ascending", no)
        cut = toks.index(0, 1)
        lits, ants = toks[1:cut], toks[cut + 1 : -1]
        if len(set(lits)) != len(lits):
            raise ParseError("duplicate literal", no)
        clause = Clause(lits)
        for a in ants:
            if a not in clauses:
                raise ParseError(f"antecedent {a} is not an earlier line", no)
        if not ants:
            ln = ProofLine(lid, clause, AXIOM)
        elif len(ants) == 1:
            ln = ProofLine(lid, clause, WEAKEN, ants)
        elif len(ants) == 2:
            ln = ProofLine(lid, clause, RESOLVE, ants, _find_pivot(clauses[ants[0]], clauses[ants[1]], clause, no))
        else:
            raise ParseError("resolution chains longer than two antecedents are not supported", no)
        lines.append(ln)
        clauses[lid] = clause
        last = lid
    return ResolutionProof(lines)


def _find_pivot(a, b, c, no):
    for x in a.lits:
        if -x in b:
            v = abs(x)
            try:
                if _resolve_any_order(a, b, v) == c:
                    return v
            except RuleError:
                pass
    raise ParseError("antecedents do not resolve to the clause", no)


def read_trace(source):
    if hasattr(source, "read"):
        return parse_trace(source.read())
    with open(source, encoding="utf-8") as fh:
        return parse_trace(fh.read())


# ---------------------------------------------------------------------------
# adversarial mutations


def mutate_proof(pi, num_vars, rng):
    """Copy of ``pi`` with one token changed; returns ``(proof, description)``.

    Token kinds: a literal of some line (replaced by another literal, deleted
    or added), a parent reference, a pivot, or a rule tag.  The change always
    differs from the original token.
    """
    lines = [ProofLine(l.id, l.clause, l.rule, l.parents, l.pivot) for l in pi.lines]
    k = rng.below(len(lines))
    ln = lines[k]
    kinds = ["lit-replace", "lit-drop", "lit-add"]
    if ln.parents and k > 0:
        kinds.append("parent")
    if ln.rule == RESOLVE:
        kinds.append("pivot")
    kinds.append("rule")
    kind = kinds[rng.below(len(kinds))]
    lits = list(ln.clause.lits)
    if kind == "lit-drop" and not lits:
        kind = "lit-add"
    if kind == "lit-replace" and not lits:
        kind = "lit-add"
    if kind == "lit-add" and len(lits) >= 2 * num_vars:
        kind = "lit-drop"
    if kind == "lit-replace":
        pos = rng.below(len(lits))
        while True:
            x = rng.between(1, num_vars) * (1 if rng.coin() else -1)
            if x not in lits:
                break
        lits[pos] = x
        ln.clause = Clause(lits)
    elif kind == "lit-drop":
        lits.pop(rng.below(len(lits)))
        ln.clause = Clause(lits)
    elif kind == "lit-add":
        while True:
            x = rng.between(1, num_vars) * (1 if rng.coin() else -1)
            if x not in lits:
                break
        ln.clause = Clause(lits + [x])
    elif kind == "parent":
        pos = rng.below(len(ln.parents))
        ids = [l.id for l in lines[:k] if l.id != ln.parents[pos]]
        if not ids:
            kind = "rule"
        else:
            ps = list(ln.parents)
            ps[pos] = ids[rng.below(len(ids))]
            ln.parents = tuple(ps)
    elif kind == "pivot":
        while True:
            v = rng.between(1, num_vars)
            if v != ln.pivot or num_vars == 1:
                break
        if v == ln.pivot:
            kind = "rule"
        else:
            ln.pivot = v
    if kind == "rule":
        if ln.rule == AXIOM:
            # an axiom claimed as a weakening of the previous line
            ln.rule, ln.parents = WEAKEN, ((lines[k - 1].id,) if k else (ln.id,))
        else:
            ln.rule, ln.parents, ln.pivot = AXIOM, (), None
    return ResolutionProof(lines), f"line {ln.id}: {kind}"
