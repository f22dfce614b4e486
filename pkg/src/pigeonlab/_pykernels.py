"""Pure-Python subset-enumeration kernels.

Hole sets are Python int bitmasks (bit ``j`` = hole ``j + 1``).  Pigeons are
0-based indices into ``masks``.  The compiled module ``_ckernels`` implements
the same functions for instances with at most 64 holes.
"""

from itertools import combinations


def _popcount(x):
    return bin(x).count("1")


def min_expansion(masks, r, unique=True, allowed=None, hole_mask=-1):
    """Lexicographically first subset minimising expansion per vertex.

    Enumerates every nonempty ``S`` of ``allowed`` (default: all pigeons) with
    ``|S| <= r`` in lexicographic order and returns ``(count, size, S)`` for the
    first ``S`` that minimises ``count / size``, where ``count`` is the number
    of unique neighbours (``unique=True``) or of neighbours, restricted to
    ``hole_mask``.  Returns ``None`` when there is no nonempty candidate.
    """
    idx = list(range(len(masks))) if allowed is None else sorted(allowed)
    k = len(idx)
    best = None
    # explicit DFS in pre-order == lexicographic order of sorted tuples
    stack = [(idx[pos], pos + 1, 0, 0, ()) for pos in reversed(range(k))] if r > 0 else []
    while stack:
        v, nxt, once, twice, members = stack.pop()
        a = masks[v] & hole_mask
        t2 = twice | (once & a)
        o2 = (once | a) & ~t2
        mem = members + (v,)
        cnt = _popcount(o2) if unique else _popcount(o2 | t2)
        s = len(mem)
        if best is None or cnt * best[1] < best[0] * s:
            best = (cnt, s, mem)
        if s < r:
            for pos in reversed(range(nxt, k)):
                stack.append((idx[pos], pos + 1, o2, t2, mem))
    return best


def _boundary(masks, members, hole_mask=-1):
    once = twice = 0
    for i in members:
        a = masks[i] & hole_mask
        twice |= once & a
        once = (once | a) & ~twice
    return once


def find_augmentation(masks, current, outside, r, nu_num, nu_den, k_max, candidates):
    """Smallest-then-lexicographic ``A`` making ``current + A`` contained.

    Contained means ``|(boundary of current + A) minus outside| * nu_den <
    nu_num * |current + A|``; only ``A`` drawn from ``candidates`` with
    ``|A| <= k_max`` and ``|current| + |A| <= r`` are considered.
    """
    base = len(current)
    once = twice = 0
    for i in current:
        a = masks[i]
        twice |= once & a
        once = (once | a) & ~twice
    cands = sorted(candidates)
    top = min(k_max, r - base, len(cands))
    for size in range(1, top + 1):
        total = base + size
        for combo in combinations(cands, size):
            o, t = once, twice
            for i in combo:
                a = masks[i]
                t |= o & a
                o = (o | a) & ~t
            if _popcount(o & ~outside) * nu_den < nu_num * total:
                return combo
    return None
