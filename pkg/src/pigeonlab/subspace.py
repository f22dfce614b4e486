"""Exact subspaces of Q^n kept in a canonical reduced echelon form.

Rows are stored as primitive integer vectors (gcd 1, positive pivot) with
zeros above and below every pivot.  That is the rational RREF with each row
rescaled to clear denominators, so it is unique per subspace and equality of
subspaces is equality of representations.  Elimination is fraction-free:
rows are combined with integer multipliers and divided by their content.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from .errors import ParameterError


def _primitive(v):
    g = reduce(gcd, v, 0)
    if g == 0:
        return None
    lead = next(x for x in v if x)
    if lead < 0:
        g = -g
    return tuple(x // g for x in v)


def integer_vector(v):
    """Scale a rational vector to a primitive integer one (or ``None`` for zero)."""
    fs = [Fraction(x) for x in v]
    den = reduce(lcm, (f.denominator for f in fs), 1)
    return _primitive([int(f * den) for f in fs])


class Basis:
    """Mutable echelon basis used while accumulating spans."""

    __slots__ = ("n", "rows")

    def __init__(self, n):
        self.n = n
        self.rows = {}  # pivot column -> primitive row

    def __len__(self):
        return len(self.rows)

    @property
    def full(self):
        return len(self.rows) == self.n

    def reduce(self, v):
        """Integer multiple of ``v`` minus its projection on the basis pivots."""
        v = list(v)
        for p, row in self.rows.items():
            a = v[p]
            if a:
                b = row[p]
                g = gcd(a, b)
                ka, kb = b // g, a // g
                v = [ka * x - kb * y for x, y in zip(v, row)]
        return v

    def add(self, v):
        """Insert an integer vector; returns True if the span grew."""
        if len(v) != self.n:
            raise ParameterError("vector length does not match the ambient dimension")
        w = _primitive(self.reduce(v))
        if w is None:
            return False
        p = next(k for k, x in enumerate(w) if x)
        for q, row in list(self.rows.items()):
            a = row[p]
            if a:
                g = gcd(a, w[p])
                ka, kb = w[p] // g, a // g
                self.rows[q] = _primitive([ka * x - kb * y for x, y in zip(row, w)])
        self.rows[p] = w
        return True

    def contains(self, v):
        return _primitive(self.reduce(v)) is None

    def freeze(self):
        return Subspace(self.n, [self.rows[p] for p in sorted(self.rows)], _trusted=True)


class Subspace:
    """Immutable subspace of Q^n; ``rows`` is the canonical echelon basis."""

    __slots__ = ("n", "rows", "_hash")

    def __init__(self, n, vectors=(), _trusted=False):
        self.n = n
        if _trusted:
            rows = tuple(tuple(r) for r in vectors)
        else:
            b = Basis(n)
            for v in vectors:
                iv = integer_vector(v)
                if iv is not None:
                    b.add(iv)
            rows = tuple(b.rows[p] for p in sorted(b.rows))
        self.rows = rows
        self._hash = hash((n, rows))

    @classmethod
    def zero(cls, n):
        return cls(n, (), _trusted=True)

    @classmethod
    def full(cls, n):
        return cls(n, [tuple(int(i == k) for i in range(n)) for k in range(n)], _trusted=True)

    @property
    def dim(self):
        return len(self.rows)

    @property
    def pivots(self):
        return tuple(next(k for k, x in enumerate(r) if x) for r in self.rows)

    def basis(self):
        b = Basis(self.n)
        b.rows = dict(zip(self.pivots, self.rows))
        return b

    def contains_vector(self, v):
        iv = integer_vector(v)
        return iv is None or self.basis().contains(iv)

    def contains(self, other):
        """``other ⊆ self``."""
        self._same_ambient(other)
        b = self.basis()
        return all(b.contains(r) for r in other.rows)

    def span(self, *others):
        b = self.basis()
        for o in others:
            self._same_ambient(o)
            for r in o.rows:
                if b.full:
                    break
                b.add(r)
        return b.freeze()

    def _same_ambient(self, other):
        if other.n != self.n:
            raise ParameterError("subspaces live in different ambient spaces")

    def __le__(self, other):
        return other.contains(self)

    def __lt__(self, other):
        return self.dim < other.dim and other.contains(self)

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Subspace(n={self.n}, dim={self.dim})"


def span_union(*spaces):
    if not spaces:
        raise ParameterError("need at least one subspace")
    return spaces[0].span(*spaces[1:])


def kron(*vectors):
    """Kronecker product; the first factor is the most significant index."""
    out = [1]
    for v in vectors:
        out = [a * b for a in out for b in v]
    return out


def rank(vectors, n):
    b = Basis(n)
    for v in vectors:
        iv = integer_vector(v)
        if iv is not None:
            b.add(iv)
    return len(b)
