"""Closure of a pigeon set and the two closure lemmas as executable checks.

A set ``S`` is ``(U, r, nu)``-contained when ``|S| <= r`` and
``|boundary(S) - U| < nu |S|`` (the empty set always is).  The closure of
``T`` is a maximal contained superset of ``T`` for ``U = N(T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .errors import BudgetError, PreconditionError
from .graph import DEFAULT_ENUM_CAP, _check_set, _to_mask, boundary_mask, certify_boundary_expansion, neighbourhood, remove_vertices

UNBOUNDED_UP_TO = 16


@dataclass(frozen=True)
class ClosureParams:
    r: int
    nu: Fraction
    k_aug: int | None = None  # None: unbounded when m <= 16, else 2

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be at least 1")
        object.__setattr__(self, "nu", Fraction(self.nu))
        if self.nu <= 0:
            raise ValueError("nu must be positive")


@dataclass(frozen=True)
class ClosureResult:
    closure_set: frozenset
    trace: tuple = ()
    maximal_verified: bool = False
    seed_set: frozenset = field(default=frozenset())

    def __len__(self):
        return len(self.closure_set)


def is_contained(g, s, u, r, nu):
    s = _check_set(g, s)
    if not s:
        return True
    if len(s) > r:
        return False
    outside = boundary_mask(g, s) & ~_to_mask(u)
    return bin(outside).count("1") < Fraction(nu) * len(s)


def _search_size(n_cands, room):
    return sum(math.comb(n_cands, a) for a in range(1, min(room, n_cands) + 1))


def closure(g, t, r, nu, k_aug=None, cap=DEFAULT_ENUM_CAP, backend=None, u=None):
    """Deterministic closure of ``t``.

    Repeatedly adds the smallest, then lexicographically first, nonempty
    ``A`` keeping the set ``(N(t), r, nu)``-contained.  With an unbounded
    augmentation size the final failed search covers every superset of size
    at most ``r``, so the result is certified maximal.  ``u`` overrides the
    hole set ``N(t)``.
    """
    if isinstance(r, ClosureParams):
        r, nu, k_aug = r.r, r.nu, r.k_aug
    nu = Fraction(nu)
    t = _check_set(g, t)
    if len(t) > r:
        raise PreconditionError(f"|t| = {len(t)} exceeds r = {r}")
    pigeons = list(g.pigeons)
    if k_aug is None:
        k_aug = r if len(pigeons) <= UNBOUNDED_UP_TO else 2
    u_mask = _to_mask(neighbourhood(g, t) if u is None else u)
    current = [i - 1 for i in t]
    members = set(current)
    trace = []
    while True:
        cands = [i - 1 for i in pigeons if i - 1 not in members]
        room = min(k_aug, r - len(current))
        work = _search_size(len(cands), room)
        if work > cap:
            raise BudgetError(f"augmentation search needs {work} subsets", estimate=work)
        a = kernels.find_augmentation(
            g.masks, current, u_mask, r, nu.numerator, nu.denominator, k_aug, cands, backend=backend
        )
        if a is None:
            break
        trace.append(tuple(i + 1 for i in a))
        current = sorted(members.union(a))
        members = set(current)
    cl = frozenset(i + 1 for i in current)
    verified = k_aug >= r - len(cl) or len(cl) == len(pigeons)
    return ClosureResult(cl, tuple(trace), verified, frozenset(t))


def validate_closure_size(g, t, r, nu, delta, c, result=None):
    """Closure size bound: ``|Cl(t)| < k delta / (c - nu)`` with ``k = |t|``.

    The caller supplies a graph certified as an ``(r, delta, c)`` boundary
    expander.  For ``k = 0`` the bound reads ``|Cl| < 0``; there the check is
    ``Cl(t)`` empty, which is what the argument actually yields.
    """
    nu, c = Fraction(nu), Fraction(c)
    if c <= nu:
        raise PreconditionError("need c > nu")
    result = result or closure(g, t, r, nu)
    k = len(set(t))
    size = len(result.closure_set)
    if k == 0:
        return size == 0
    return size * (c - nu) < k * delta


def residual_graph(g, cl):
    """``G \\ (Cl u N(Cl))``."""
    return remove_vertices(g, cl, neighbourhood(g, cl))


def validate_closure_expansion(g, t, r, nu, result=None, cap=DEFAULT_ENUM_CAP):
    """Residual expansion: after removing ``Cl(t)`` and ``N(Cl(t))`` every pigeon
    set of size at most ``r/2`` has at least ``nu`` unique neighbours per vertex."""
    result = result or closure(g, t, r, nu)
    if not result.maximal_verified:
        raise PreconditionError("closure maximality not verified")
    if 2 * len(result.closure_set) > r:
        raise PreconditionError("closure larger than r/2")
    half = r // 2
    gp = residual_graph(g, result.closure_set)
    if half < 1 or not list(gp.pigeons):
        return True
    return certify_boundary_expansion(gp, half, nu, cap).certified
