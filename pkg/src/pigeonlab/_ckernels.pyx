# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the subset-enumeration kernels (at most 64 holes)."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int popc(uint64_t x) nogil:
    return __builtin_popcountll(x)


def min_expansion(masks, int r, bint unique=True, allowed=None, hole_mask=-1):
    cdef list idx = list(range(len(masks))) if allowed is None else sorted(allowed)
    cdef int k = len(idx)
    if k == 0 or r <= 0:
        return None
    cdef uint64_t hm = <uint64_t>(hole_mask & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t *m = <uint64_t *>malloc(k * sizeof(uint64_t))
    cdef int *pos = <int *>malloc((r + 1) * sizeof(int))
    cdef uint64_t *once = <uint64_t *>malloc((r + 1) * sizeof(uint64_t))
    cdef uint64_t *twice = <uint64_t *>malloc((r + 1) * sizeof(uint64_t))
    cdef int *best = <int *>malloc((r + 1) * sizeof(int))
    cdef int i, depth, cnt, best_cnt = -1, best_size = 1
    cdef uint64_t a, o2, t2
    try:
        for i in range(k):
            m[i] = (<uint64_t>(masks[idx[i]] & 0xFFFFFFFFFFFFFFFF)) & hm
        # depth d holds the set pos[0..d-1]; once/twice[d] describe it
        once[0] = 0
        twice[0] = 0
        depth = 0
        pos[0] = -1
        while True:
            # advance position at this depth
            pos[depth] += 1
            if pos[depth] >= k:
                if depth == 0:
                    break
                depth -= 1
                continue
            a = m[pos[depth]]
            t2 = twice[depth] | (once[depth] & a)
            o2 = (once[depth] | a) & ~t2
            cnt = popc(o2) if unique else popc(o2 | t2)
            if best_cnt < 0 or cnt * best_size < best_cnt * (depth + 1):
                best_cnt = cnt
                best_size = depth + 1
                for i in range(depth + 1):
                    best[i] = pos[i]
            if depth + 1 < r:
                once[depth + 1] = o2
                twice[depth + 1] = t2
                pos[depth + 1] = pos[depth]
                depth += 1
        return (best_cnt, best_size, tuple(idx[best[i]] for i in range(best_size)))
    finally:
        free(m); free(pos); free(once); free(twice); free(best)


def find_augmentation(masks, current, outside, int r, nu_num, nu_den, int k_max, candidates):
    cdef list cands = sorted(candidates)
    cdef int base = len(current)
    cdef int nc = len(cands)
    cdef int top = min(k_max, r - base, nc)
    if top <= 0:
        return None
    cdef uint64_t once0 = 0, twice0 = 0, a, o, t
    cdef uint64_t out = <uint64_t>(outside & 0xFFFFFFFFFFFFFFFF)
    for i0 in current:
        a = <uint64_t>(masks[i0] & 0xFFFFFFFFFFFFFFFF)
        twice0 |= once0 & a
        once0 = (once0 | a) & ~twice0
    # contained  <=>  cnt * nu_den < nu_num * total ; values stay small
    cdef long long num = nu_num, den = nu_den
    cdef uint64_t *m = <uint64_t *>malloc(nc * sizeof(uint64_t))
    cdef int *c = <int *>malloc((top + 1) * sizeof(int))
    cdef uint64_t *onc = <uint64_t *>malloc((top + 1) * sizeof(uint64_t))
    cdef uint64_t *twc = <uint64_t *>malloc((top + 1) * sizeof(uint64_t))
    cdef int size, j, d
    try:
        for j in range(nc):
            m[j] = <uint64_t>(masks[cands[j]] & 0xFFFFFFFFFFFFFFFF)
        for size in range(1, top + 1):
            # iterate combinations of `size` indices in lexicographic order
            for j in range(size):
                c[j] = j
            onc[0] = once0
            twc[0] = twice0
            d = 0
            while True:
                # rebuild prefix states from depth d
                while d < size:
                    a = m[c[d]]
                    t = twc[d] | (onc[d] & a)
                    o = (onc[d] | a) & ~t
                    onc[d + 1] = o
                    twc[d + 1] = t
                    d += 1
                if popc(onc[size] & ~out) * den < num * (base + size):
                    return tuple(cands[c[j]] for j in range(size))
                # next combination
                j = size - 1
                while j >= 0 and c[j] == nc - size + j:
                    j -= 1
                if j < 0:
                    break
                c[j] += 1
                for d in range(j + 1, size):
                    c[d] = c[d - 1] + 1
                d = j
        return None
    finally:
        free(m); free(c); free(onc); free(twc)
