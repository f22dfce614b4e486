"""Pigeon degrees, heavy pigeons, the filter-vector sampler and the proof
transformation behind the pseudo-width upper bound; bound calculators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParameterError, PreconditionError
from .formula import Clause, VarMap
from .resolution import AXIOM, RESOLVE, WEAKEN, ProofBuilder, ResolutionProof, resolve
from .rng import Stream

GAMMA_PRIME = 13
GAMMA = 65


@dataclass(frozen=True)
class FilterConstants:
    gamma_prime: int = GAMMA_PRIME
    gamma: int = GAMMA

    def __post_init__(self):
        if self.gamma < 5 * self.gamma_prime:
            raise ParameterError("need gamma >= 5 gamma'")


# ---------------------------------------------------------------------------
# exact logarithm helpers


def exact_log_ratio(a, b):
    """``log a / log b`` as ``(Fraction, exact)``.

    Exact when ``a`` and ``b`` are integer powers of a common base (verified
    by integer exponentiation); otherwise a close rational approximation.
    """
    if a <= 0 or b <= 0 or b == 1:
        raise ParameterError("need a > 0 and b > 0, b != 1")
    if a == 1:
        return Fraction(0), True
    approx = math.log(a) / math.log(b)
    cand = Fraction(approx).limit_denominator(4096)
    if cand > 0 and isinstance(a, int) and isinstance(b, int):
        p, q = cand.numerator, cand.denominator
        if a**q == b**p:
            return cand, True
    return Fraction(approx).limit_denominator(10**12), False


def exact_log2(x):
    """``log2 x`` as ``(Fraction, exact)``; exact for rational powers of two."""
    x = Fraction(x)
    if x <= 0:
        raise ParameterError("log of a non-positive number")
    num, den = x.numerator, x.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        return Fraction(num.bit_length() - den.bit_length()), True
    return Fraction(math.log2(num) - math.log2(den)), False


def filter_t(m, alpha):
    """``floor(log m / log alpha) - 1``, computed with integers."""
    if alpha < 2 or m < 1:
        raise ParameterError("need alpha >= 2 and m >= 1")
    k, p = 0, alpha
    while p <= m:
        k += 1
        p *= alpha
    return k - 1


# ---------------------------------------------------------------------------
# pigeon degrees


class PigeonIndex:
    """Per-graph lookup from variables to edges, reused across many clauses."""

    def __init__(self, g):
        self.g = g
        self.vm = VarMap(g)
        self.deg = [0] + [g.degree(i) for i in range(1, g.m + 1)]

    def split(self, c):
        """``{pigeon: (positive holes, negative holes)}`` for the pigeons of ``c``."""
        out = {}
        for x in c.lits:
            i, j = self.vm.edge(abs(x))
            pos, neg = out.setdefault(i, (set(), set()))
            (pos if x > 0 else neg).add(j)
        return out

    def degrees(self, c):
        """``{pigeon: deg_C(i)}`` for pigeons mentioned by ``c`` (others have 0)."""
        out = {}
        for i, (pos, neg) in self.split(c).items():
            if len(neg) >= 2:
                out[i] = self.deg[i]
            elif neg:
                (j,) = neg
                out[i] = self.deg[i] - 1 + (j in pos)
            else:
                out[i] = len(pos)
        return out

    def neighbourhood(self, c, i):
        parts = self.split(c).get(i)
        if parts is None:
            return set()
        pos, neg = parts
        return {j for j in self.g.neighbours(i) if j in pos or any(k != j for k in neg)}


def clause_pigeon_neighbourhood(g, c, i, index=None):
    """Holes ``j`` such that matching pigeon ``i`` to ``j`` satisfies ``c``."""
    return (index or PigeonIndex(g)).neighbourhood(c, i)


def clause_pigeon_degree(g, c, i, index=None):
    return (index or PigeonIndex(g)).degrees(c).get(i, 0)


@dataclass(frozen=True)
class WeightProfile:
    d: tuple
    delta: tuple
    alpha: int = 2
    w0: int = 4

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        object.__setattr__(self, "delta", tuple(Fraction(x) for x in self.delta))
        if len(self.d) != len(self.delta):
            raise ParameterError("d and delta differ in length")

    def validate(self, g):
        for i in g.pigeons:
            if not self.delta[i - 1] < self.d[i - 1] <= g.degree(i):
                raise PreconditionError(f"pigeon {i}: need delta < d <= deg")
        return True


@dataclass(frozen=True)
class HeavyProfile:
    clause: Clause
    super_heavy: frozenset
    heavy: frozenset

    @property
    def pseudo_width(self):
        return len(self.heavy)


def heavy_sets(g, c, profile, index=None):
    """Super-heavy (``deg_C >= d``) and heavy (``deg_C >= d - delta``) pigeons."""
    degs = (index or PigeonIndex(g)).degrees(c)
    fat = frozenset(i for i, k in degs.items() if k >= profile.d[i - 1])
    thick = frozenset(i for i, k in degs.items() if k >= profile.d[i - 1] - profile.delta[i - 1])
    return HeavyProfile(c, fat, thick)


def pseudo_width(g, pi, profile, index=None):
    index = index or PigeonIndex(g)
    return max((heavy_sets(g, ln.clause, profile, index).pseudo_width for ln in pi.lines), default=0)


def r_coordinate(deg_g, deg_c, delta):
    return math.floor(Fraction(deg_g - deg_c) / Fraction(delta)) + 1


def clause_r_vector(g, c, delta, index=None):
    """``r(C)_i = floor((deg_G(i) - deg_C(i)) / delta_i) + 1`` for every pigeon."""
    index = index or PigeonIndex(g)
    degs = index.degrees(c)
    return tuple(
        r_coordinate(index.deg[i], degs.get(i, 0), delta[i - 1]) for i in range(1, g.m + 1)
    )


def weight(rvec, alpha):
    """``W(r) = sum_i alpha^(-r_i)`` as an exact rational."""
    return sum((Fraction(1, alpha**x) for x in rvec), Fraction(0))


# ---------------------------------------------------------------------------
# filter lemma


def filter_distribution(m, alpha):
    """``(t, beta, mu)`` with ``mu[i-1] = beta alpha^-i`` on ``[t]``."""
    t = filter_t(m, alpha)
    if t < 1:
        raise ParameterError(f"t = {t}: need alpha^2 <= m")
    a = Fraction(alpha)
    beta = (a - 1) / (1 - a**-t)
    mu = tuple(beta * a**-i for i in range(1, t + 1))
    assert sum(mu) == 1
    return t, beta, mu


def filter_counts(rl, r):
    """Case counts ``(|{r(l)_i <= r_i}|, |{r(l)_i <= r_i + 1}|)``."""
    c1 = sum(1 for a, b in zip(rl, r) if a <= b)
    c2 = sum(1 for a, b in zip(rl, r) if a <= b + 1)
    return c1, c2


def filter_case(rl, r, w0, alpha, gamma=GAMMA):
    """1 if the many-super-heavy case holds, 2 if only the few-heavy case, 0 if neither."""
    c1, c2 = filter_counts(rl, r)
    if c1 >= w0:
        return 1
    if c2 <= gamma * alpha * w0:
        return 2
    return 0


@dataclass
class FilterResult:
    accepted: bool
    vector: tuple | None
    attempts: int
    transcript: list = field(default_factory=list)  # per distinct input vector: (c1, c2, case)
    worst: tuple | None = None  # violating input vector of the last attempt
    hypotheses: dict = field(default_factory=dict)


def filter_hypotheses(n_vectors, m, w0, alpha):
    return {
        "w0 > ln L": n_vectors == 0 or w0 > math.log(n_vectors),
        "w0 >= alpha^2 >= 4": w0 >= alpha * alpha >= 4,
        "w0, alpha in [m]": 1 <= w0 <= m and 1 <= alpha <= m,
    }


def sample_filter_vector(
    rvecs, m, w0, alpha, seed, max_attempts=200, gamma=GAMMA, enforce_hypotheses=True
):
    """Sample filter vectors from ``mu`` until one works for every input vector.

    Acceptance is checked directly: for each distinct input ``r(l)`` either
    ``|{r(l)_i <= r_i}| >= w0`` or ``|{r(l)_i <= r_i + 1}| <= gamma alpha w0``.
    The existence hypotheses (``w0 > ln L`` over distinct vectors,
    ``w0 >= alpha^2 >= 4``) raise a precondition error unless
    ``enforce_hypotheses`` is false; they are always reported.
    """
    distinct = list(dict.fromkeys(tuple(v) for v in rvecs))
    for v in distinct:
        if len(v) != m:
            raise ParameterError("r-vector length differs from m")
    hyp = filter_hypotheses(len(distinct), m, w0, alpha)
    if enforce_hypotheses and not all(hyp.values()):
        bad = [k for k, ok in hyp.items() if not ok]
        raise PreconditionError("filter hypotheses fail: " + ", ".join(bad))
    t, _, _ = filter_distribution(m, alpha)
    weights = [alpha ** (t - i) for i in range(1, t + 1)]
    rng = Stream(seed, "filter")
    worst = None
    for attempt in range(1, max_attempts + 1):
        r = tuple(rng.weighted(weights) + 1 for _ in range(m))
        transcript = []
        worst = None
        for rl in distinct:
            c1, c2 = filter_counts(rl, r)
            case = 1 if c1 >= w0 else (2 if c2 <= gamma * alpha * w0 else 0)
            transcript.append((c1, c2, case))
            if case == 0 and (worst is None or c2 > worst[1]):
                worst = (rl, c2)
        if worst is None:
            return FilterResult(True, r, attempt, transcript, None, hyp)
    return FilterResult(False, None, max_attempts, transcript, worst[0], hyp)


def thresholds_from_filter(g, rvec_filter, delta):
    """``d_i = deg_G(i) - ceil(delta_i r_i) + 1``."""
    return tuple(
        g.degree(i) - math.ceil(Fraction(delta[i - 1]) * rvec_filter[i - 1]) + 1
        for i in range(1, g.m + 1)
    )


def delta_default(g, alpha, variant="upper", xi=None, m=None):
    """Slack vectors: ``deg log alpha / log m`` (upper) or ``4 deg xi`` (lower).

    Returns ``(delta, exact)``; the upper form is exact when ``alpha`` and
    ``m`` are powers of a common integer.
    """
    m = g.m if m is None else m
    degs = [g.degree(i) for i in range(1, g.m + 1)]
    if variant == "upper":
        ratio, exact = exact_log_ratio(alpha, m)
        return tuple(d * ratio for d in degs), exact
    if variant == "lower":
        if xi is None:
            raise ParameterError("lower variant needs xi")
        return tuple(4 * d * Fraction(xi) for d in degs), True
    raise ParameterError(f"unknown variant {variant!r}")


def make_profile(g, filter_vector, delta, alpha, w0):
    profile = WeightProfile(thresholds_from_filter(g, filter_vector, delta), delta, alpha, w0)
    profile.validate(g)
    return profile


# ---------------------------------------------------------------------------
# proof transformation


@dataclass
class TransformResult:
    proof: ResolutionProof
    fake_axioms: list
    cases: list  # per original line: 1 (strengthened to a fake axiom) or 2
    log2_hypothesis: bool  # w0 > log2 L(pi)


def strengthen(c, keep_pigeons, index):
    return Clause(x for x in c.lits if index.vm.edge(abs(x))[0] in keep_pigeons)


def transform_proof(g, pi, profile, filter_vector, gamma=GAMMA, index=None, mode="weaken"):
    """Refutation of ``F + A`` with every case-1 clause routed through a fake axiom.

    A line is case 1 when at least ``w0`` pigeons have ``r(C)_i <= r_i``; its
    fake axiom keeps exactly the literals of the ``w0`` lowest-indexed
    super-heavy pigeons.

    ``mode="weaken"``: each case-1 line becomes the fake axiom followed by a
    weakening back to the original clause; other lines are copied.

    ``mode="propagate"``: the original case-1 clause is dropped and the
    strengthening is pushed down the proof.  A resolution step resolves the
    images of its parents when both still clash on the pivot, and otherwise
    copies the image lacking the pivot.  The output has one line per input
    line and every image is a subclause of its original, so case-2 lines keep
    pseudo-width below ``gamma alpha w0``.
    """
    if mode not in ("weaken", "propagate"):
        raise ParameterError(f"unknown mode {mode!r}")
    index = index or PigeonIndex(g)
    w0, alpha = profile.w0, profile.alpha
    rvecs = {ln.id: clause_r_vector(g, ln.clause, profile.delta, index) for ln in pi.lines}
    for rv in set(rvecs.values()):
        if filter_case(rv, filter_vector, w0, alpha, gamma) == 0:
            raise PreconditionError("filter vector not accepted for the proof's r-vectors")
    pb = ProofBuilder()
    image = {}
    fakes = {}
    cases = []
    for ln in pi.lines:
        case = filter_case(rvecs[ln.id], filter_vector, w0, alpha, gamma)
        cases.append(case)
        fake = None
        if case == 1:
            fat = sorted(heavy_sets(g, ln.clause, profile, index).super_heavy)
            fake = strengthen(ln.clause, set(fat[:w0]), index)
            fakes.setdefault(fake, None)
        if mode == "weaken":
            parents = tuple(image[p][1] for p in ln.parents)
            if fake is not None:
                fid = pb.add(fake, AXIOM)
                lid = pb.add(ln.clause, WEAKEN, (fid,))
            else:
                lid = pb.add(ln.clause, ln.rule, parents, ln.pivot)
            image[ln.id] = (ln.clause, lid)
        elif fake is not None:
            image[ln.id] = (fake, pb.add(fake, AXIOM))
        elif ln.rule == AXIOM:
            image[ln.id] = (ln.clause, pb.add(ln.clause, AXIOM))
        elif ln.rule == WEAKEN:
            c, cid = image[ln.parents[0]]
            image[ln.id] = (c, pb.add(c, WEAKEN, (cid,)))
        else:
            (a, ia), (b, ib) = image[ln.parents[0]], image[ln.parents[1]]
            v = ln.pivot
            if -v in a and v in b:
                (a, ia), (b, ib) = (b, ib), (a, ia)
            if v in a and -v in b:
                c = resolve(a, b, v)
                image[ln.id] = (c, pb.add(c, RESOLVE, (ia, ib), v))
            else:
                c, cid = (a, ia) if v not in a else (b, ib)
                image[ln.id] = (c, pb.add(c, WEAKEN, (cid,)))
    hyp = not pi.lines or w0 > math.log2(len(pi.lines))
    return TransformResult(pb.proof(), list(fakes), cases, hyp)


def heavy_profile_rows(g, pi, profile, filter_vector=None, gamma=GAMMA, index=None):
    """Rows ``(line_id, pseudo_width, n_super_heavy, case)``; case is empty without a filter."""
    index = index or PigeonIndex(g)
    rows = []
    for ln in pi.lines:
        hp = heavy_sets(g, ln.clause, profile, index)
        case = ""
        if filter_vector is not None:
            rv = clause_r_vector(g, ln.clause, profile.delta, index)
            case = filter_case(rv, filter_vector, profile.w0, profile.alpha, gamma)
        rows.append((ln.id, hp.pseudo_width, len(hp.super_heavy), case))
    return rows


HEAVY_CSV_HEADER = "line_id,pseudo_width,n_super_heavy,case"


def heavy_profile_csv(rows):
    return HEAVY_CSV_HEADER + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows)


# ---------------------------------------------------------------------------
# bound calculators


def _lg(x):
    return exact_log2(x)


@dataclass(frozen=True)
class BoundReport:
    value: Fraction | float
    exact: bool
    conditions: dict


def bound_calculator(m, n, delta, r, alpha, variant="fphp"):
    """The length-bound exponent ``r log^2 alpha / (alpha log^2 N)``, up to constants.

    ``N = m`` for fphp and ``m + n`` for pm.  The side condition
    ``8 <= alpha^3 / log alpha = o(r / log N)`` is reported in its finite form
    ``8 <= alpha^3 / log alpha <= r / log N``; ``alpha >= 2`` is also required.
    """
    if variant not in ("fphp", "pm"):
        raise ParameterError(f"unknown variant {variant!r}")
    big = m if variant == "fphp" else m + n
    conditions = {"alpha >= 2": alpha >= 2}
    if alpha < 2:
        conditions["8 <= alpha^3/log alpha"] = False
        conditions["alpha^3/log alpha <= r/log N"] = False
        return BoundReport(float("nan"), False, conditions)
    la, ea = _lg(alpha)
    lm, em = _lg(big)
    exact = ea and em
    value = Fraction(r) * la * la / (alpha * lm * lm)
    side = Fraction(alpha**3) / la
    conditions["8 <= alpha^3/log alpha"] = 8 <= side
    conditions["alpha^3/log alpha <= r/log N"] = side <= Fraction(r) / lm
    return BoundReport(value if exact else float(value), exact, conditions)


# a + b ln 2 with rational a, b; ln 2 enclosed by rational bounds


def _ln2_bounds(terms=80):
    # ln 2 = sum_{k>=1} 1 / (k 2^k); tail after K terms < 1 / 2^K
    s = Fraction(0)
    for k in range(1, terms + 1):
        s += Fraction(1, k * 2**k)
    return s, s + Fraction(1, 2**terms)


LN2_LO, LN2_HI = _ln2_bounds()


def _sign(a, b):
    """Sign of ``a + b ln 2``."""
    if b == 0:
        return (a > 0) - (a < 0)
    lo = a + b * (LN2_LO if b > 0 else LN2_HI)
    hi = a + b * (LN2_HI if b > 0 else LN2_LO)
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    raise ArithmeticError("ln 2 enclosure too coarse")


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class RegimeReport:
    variant: str
    log_m: Fraction
    log_n: Fraction
    delta: Fraction
    xi: Fraction
    log_alpha: Fraction
    checks: list
    exact: bool

    @property
    def pattern(self):
        return tuple(c.passed for c in self.checks[:3])


def regime_validator(m=None, n=None, delta=None, epsilon=Fraction(1, 2), variant="cor-random-fphp", log_m=None, log_n=None):
    """Evaluate the random-graph corollary hypotheses exactly.

    Sizes may be given directly or as base-2 logarithms.  Missing ``m`` and
    ``delta`` default to the corollary's extremal choices
    ``log m = (eps/K)^2 log^2 n`` and ``delta = (K log m / (eps log n))^2``,
    times ``log(m+n)`` for pm (``K = 16`` for fphp, ``128`` for pm).  With
    ``chi = alpha = n^(eps/4)`` and ``xi = log alpha / (c log m)`` (``c = 4``
    for fphp, ``64`` for pm) the three main checks are ``xi < 1/2``,
    ``xi ln chi >= 2`` and ``xi delta ln chi >= 4 ln m``.  Range hypotheses
    on ``m`` and ``delta`` follow them in the report.

    Every logarithm is ``q log 2`` with rational ``q``, so the checks reduce
    to comparisons of ``a + b ln 2`` with rational ``a, b``, decided with a
    rational enclosure of ``ln 2``.  ``exact`` is false when a size was not a
    power of two and its logarithm had to be approximated.
    """
    eps = Fraction(epsilon)
    if variant not in ("cor-random-fphp", "cor-random-pm"):
        raise ParameterError(f"unknown variant {variant!r}")
    if eps <= 0:
        raise ParameterError("epsilon must be positive")
    pm = variant == "cor-random-pm"
    k = 128 if pm else 16
    exact = True
    if log_n is None:
        if n is None:
            raise ParameterError("need n or log_n")
        log_n, e = _lg(n)
        exact &= e
    log_n = Fraction(log_n)
    if log_m is None:
        if m is None:
            log_m = (eps / k) ** 2 * log_n**2
        else:
            log_m, e = _lg(m)
            exact &= e
    log_m = Fraction(log_m)
    if log_m <= 0 or log_n <= 0:
        raise ParameterError("need m, n > 1")
    # log(m+n) is only needed for pm; with m > n^3 it is log m up to o(1)
    if pm and m is not None and n is not None:
        log_mn, e = _lg(m + n)
        exact &= e
    else:
        log_mn = log_m
    need = (k * log_mn / (eps * log_n)) ** 2 * (log_mn if pm else 1)
    delta = need if delta is None else Fraction(delta)
    log_alpha = eps * log_n / 4
    xi = log_alpha / ((64 if pm else 4) * log_m)
    # ln chi = log_alpha ln 2, ln m = log_m ln 2
    b = xi * log_alpha
    lhs3, rhs3 = xi * delta * log_alpha, 4 * log_m
    k_exp = (eps / k) ** 2 * log_n
    low = 3 if pm else 1
    checks = [
        Check("xi < 1/2", float(xi), 0.5, xi < Fraction(1, 2)),
        Check("xi ln chi >= 2", float(b * LN2_LO), 2.0, _sign(-2, b) >= 0),
        Check("xi delta ln chi >= 4 ln m", float(lhs3 * LN2_LO), float(rhs3 * LN2_LO), lhs3 >= rhs3),
        Check(f"m > n^{low}", float(log_m), float(low * log_n), log_m > low * log_n),
        Check("m <= n^((eps/K)^2 log n)", float(log_m), float(k_exp * log_n), log_m <= k_exp * log_n),
        Check("delta >= (K log m / (eps log n))^2", float(delta), float(need), delta >= need),
        Check("log delta <= log n", math.log2(delta) if delta > 0 else float("-inf"), float(log_n), _le_pow2(delta, log_n)),
    ]
    return RegimeReport(variant, log_m, log_n, delta, xi, log_alpha, checks, exact)


def _le_pow2(x, e):
    """``x <= 2**e`` for rationals, exact when ``e`` is an integer."""
    if x <= 0:
        return True
    if e.denominator == 1:
        return x <= Fraction(2) ** int(e)
    return math.log2(x) <= e
