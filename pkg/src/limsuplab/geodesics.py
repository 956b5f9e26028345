"""Continued fractions and cusp excursions of geodesics on the modular
surface.

The geodesic from i toward an irrational x in (0, 1) makes repeated
excursions into the cusp region {Im z > 1} of the standard fundamental
domain, one excursion per continued-fraction convergent p_n/q_n of x.
Everything quantitative about those excursions has a closed form in the
CF data.  Write a_1, a_2, ... for the partial quotients of x and

    alpha_{n+1} = [a_{n+1}; a_{n+2}, ...]            (the forward tail)
    xi_n        = (q_{n-1} + p_{n-1} x)/(q_n + p_n x)  (so xi_n = 1/(a_n + xi_{n-1}))

Mapping the geodesic by the integer matrix with bottom row (q_n, -p_n)
sends the two boundary endpoints x and -1/x to alpha_{n+1} and -xi_n.
The image is the semicircle over [-xi_n, alpha_{n+1}], so the n-th
excursion peaks at height

    H_n = (alpha_{n+1} + xi_n) / 2,     peak penetration = log H_n,

and the basepoint i lands at w0 with Im w0 = 1/(q_n^2 + p_n^2) and
Re w0 = -(q_{n-1} q_n + p_{n-1} p_n)/(q_n^2 + p_n^2).  Times along the
ray are hyperbolic distances from w0, via cosh t = 1 + |w0 - w|^2 /
(2 Im w0 Im w), evaluated in log form once q_n is large:  with
lnQ2 = 2 log q_n + log(1 + (p_n/q_n)^2),

    log X = log((Re w0 - Re w)^2 + (Im w0 - Im w)^2) + lnQ2 - log(2 Im w),
    t = arccosh(1 + X) = log(2X) + O(1/X).

Only bounded ratios (q_{n-1}/q_n, p_n/q_n, xi, alpha) and the log-size
of q_n enter, so the recursion runs to arbitrary times without ever
forming q_n itself.

Certification: a float carries no more than its half-ulp interval, so
the certified quotient prefix of a float direction is the common Euclid
prefix of the two interval endpoints.  Long-horizon directions must be
given exactly (a Fraction) or symbolically (the quotient sequence
itself).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple, Union
import warnings

import numpy as np

from limsuplab.errors import (
    InternalInvariantError,
    PrecisionExhausted,
    ResourceCapError,
    UsageError,
)

__all__ = [
    "CF_PROXY_CONSTANT",
    "CFExpansion",
    "GeodesicState",
    "ExcursionRecord",
    "SandwichCounts",
    "StepTooCoarseWarning",
    "cf_expand",
    "quotients_value",
    "gauss_kuzmin_probability",
    "sample_quotients",
    "geodesic_point",
    "hyperbolic_distance",
    "reduce_to_fundamental",
    "apply_word",
    "penetration",
    "predicted_excursions",
    "excursions",
    "loglaw_statistic",
    "sandwich_membership",
]

# |peak penetration - log a_{n+1}| <= CF_PROXY_CONSTANT for every
# excursion.  Frozen after calibration; the analytic bound is log 2
# (H_n/a_{n+1} lies in (1/2, 3/2]), so 0.75 leaves slack for float
# rounding only.
CF_PROXY_CONSTANT = 0.75

_LN2 = math.log(2.0)
# Tail digits held back when a quotient sequence is only a prefix of the
# direction: alpha_{n+1} read off a truncated tail of depth 25 is
# accurate to ~ 1/Fib(25)^2 < 2e-10 whatever the unseen digits are.
_ALPHA_TAIL = 25
_REDUCE_CAP = 100_000
MAX_SAMPLES = 2_000_000

Direction = Union[float, Fraction, Sequence[int]]
Word = Tuple[Tuple[int, int], Tuple[int, int]]

_IDENTITY: Word = ((1, 0), (0, 1))


class StepTooCoarseWarning(UserWarning):
    """Sampling skipped a cusp excursion predicted from the CF data."""


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients a_1..a_N with the convergents p_n/q_n.

    ``p`` and ``q`` start at index 0 (p_0/q_0 = 0/1), so they are one
    longer than ``quotients``.  ``terminated`` marks an exact rational
    whose expansion ended by itself; ``truncated`` marks a float whose
    certified prefix ran out before the requested depth.
    """

    x: Union[float, Fraction]
    quotients: Tuple[int, ...]
    p: Tuple[int, ...]
    q: Tuple[int, ...]
    terminated: bool
    truncated: bool

    @property
    def convergents(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(zip(self.p, self.q))

    def value(self, n: int) -> Fraction:
        return Fraction(self.p[n], self.q[n])


def _euclid_quotients(x: Fraction, depth: int) -> Tuple[List[int], bool]:
    """Exact partial quotients of x in (0, 1); True if the expansion
    ended within ``depth``."""
    num, den = x.numerator, x.denominator
    out: List[int] = []
    while num and len(out) < depth:
        a, num, den = den // num, den % num, num
        out.append(a)
    return out, num == 0


def _convergent_arrays(quots: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    p = [0]
    q = [1]
    pm, qm = 1, 0  # p_{-1}, q_{-1}
    for a in quots:
        p.append(a * p[-1] + pm)
        q.append(a * q[-1] + qm)
        pm, qm = p[-2], q[-2]
    return tuple(p), tuple(q)


def cf_expand(x: Union[float, Fraction], depth: int) -> CFExpansion:
    """Continued-fraction expansion of x in (0, 1), certified.

    A Fraction expands exactly (``terminated`` when the whole expansion
    fits in ``depth``).  A float stands for its half-ulp interval, and
    only the quotients shared by every real in that interval are
    returned; ``truncated`` is set when certification stops short of
    ``depth``.
    """
    if depth < 1:
        raise UsageError("depth must be >= 1, got %r" % (depth,))
    if isinstance(x, Fraction):
        if not 0 < x < 1:
            raise UsageError("x must lie in (0, 1), got %s" % (x,))
        quots, done = _euclid_quotients(x, depth)
        p, q = _convergent_arrays(quots)
        return CFExpansion(x, tuple(quots), p, q, done, False)
    xf = float(x)
    if not 0.0 < xf < 1.0:
        raise UsageError("x must lie in (0, 1), got %r" % (x,))
    half = Fraction(math.ulp(xf)) / 2
    lo = Fraction(xf) - half
    hi = Fraction(xf) + half
    if lo <= 0 or hi >= 1:
        raise UsageError("x is too close to the boundary of (0, 1) to certify")
    lo_q, _ = _euclid_quotients(lo, depth + 1)
    hi_q, _ = _euclid_quotients(hi, depth + 1)
    quots: List[int] = []
    for a, b in zip(lo_q, hi_q):
        if a != b:
            break
        quots.append(a)
    quots = quots[:depth]
    p, q = _convergent_arrays(quots)
    return CFExpansion(xf, tuple(quots), p, q, False, len(quots) < depth)


def _check_quotients(quots: Sequence[int]) -> List[int]:
    out = []
    for a in quots:
        ai = int(a)
        if ai != a or ai < 1:
            raise UsageError("partial quotients must be integers >= 1, got %r" % (a,))
        out.append(ai)
    if not out:
        raise UsageError("quotient sequence is empty")
    return out


def quotients_value(quots: Sequence[int]) -> Fraction:
    """The exact rational [0; a_1, ..., a_M] for a finite quotient list."""
    value = Fraction(0)
    for a in reversed(_check_quotients(quots)):
        value = Fraction(1, a + value)
    return value


def gauss_kuzmin_probability(k: int) -> float:
    """Limiting frequency log2(1 + 1/(k(k+2))) of the quotient value k."""
    if k < 1:
        raise UsageError("quotient value must be >= 1, got %r" % (k,))
    return math.log2(1 + Fraction(1, k * (k + 2)))


def sample_quotients(seed: int, index: int, depth: int) -> Tuple[int, ...]:
    """Seeded i.i.d. quotients with the Gauss-Kuzmin law.

    Inverse CDF in closed form: the distribution function at a is
    log2(2(a+1)/(a+2)) (the product of the cell probabilities
    telescopes), so a uniform u maps to a = max(1, ceil((2-c)/(c-1)))
    with c = 2^(1-u).  Stream index i uses its own Philox counter lane,
    the same splitting contract as the sampling in ``counting``.
    """
    if depth < 1:
        raise UsageError("depth must be >= 1, got %r" % (depth,))
    bits = np.random.Philox(key=seed, counter=[0, 0, 1, index])
    u = np.random.Generator(bits).random(depth)
    c = np.exp2(1.0 - u)
    a = np.maximum(1.0, np.ceil((2.0 - c) / (c - 1.0)))
    return tuple(int(v) for v in a)


# ---------------------------------------------------------------------------
# the geodesic and the fundamental domain


@dataclass(frozen=True)
class GeodesicState:
    """A point of the unit-speed ray toward x, tagged with its time."""

    z: complex
    t: float

    def __post_init__(self):
        if not self.z.imag > 0:
            raise PrecisionExhausted(
                "geodesic point left the representable upper half-plane "
                "(Im = %r at t = %r)" % (self.z.imag, self.t))


def geodesic_point(x: float, t: float) -> GeodesicState:
    """The ray from i toward boundary point x, at time t.

    Closed form: conjugating the vertical ray s -> i e^s by the
    isometry fixing x gives, with u = e^{-t},

        z(t) = (x (1 - u^2) + i u (1 + x^2)) / (1 + x^2 u^2).

    x may be math.inf (the vertical ray itself).
    """
    if not t >= 0:
        raise UsageError("t must be >= 0, got %r" % (t,))
    if math.isinf(x):
        if t > 700:
            raise PrecisionExhausted("e^t overflows for t = %r" % (t,))
        return GeodesicState(complex(0.0, math.exp(t)), t)
    if not abs(x) < 1e100:
        raise UsageError("finite direction |x| must be < 1e100, got %r" % (x,))
    u = math.exp(-t)
    u2 = u * u
    den = 1.0 + x * x * u2
    re = x * (1.0 - u2) / den
    im = u * (1.0 + x * x) / den
    return GeodesicState(complex(re, im), t)


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    if not (z1.imag > 0 and z2.imag > 0):
        raise UsageError("hyperbolic distance needs Im > 0 on both points")
    w = z1 - z2
    x = (w.real * w.real + w.imag * w.imag) / (2.0 * z1.imag * z2.imag)
    return math.acosh(1.0 + max(x, 0.0))


def apply_word(word: Word, z: complex) -> complex:
    """Mobius action of an integer word on z, evaluated in exact
    rational arithmetic and rounded once at the end (the naive float
    form cancels badly for ill-conditioned words)."""
    (a, b), (c, d) = word
    x, y = Fraction(z.real), Fraction(z.imag)
    nre, nim = a * x + b, a * y
    dre, dim = c * x + d, c * y
    den = dre * dre + dim * dim
    if den == 0:
        raise UsageError("word denominator vanishes at %r" % (z,))
    return complex((nre * dre + nim * dim) / den,
                   (nim * dre - nre * dim) / den)


def _word_det(word: Word) -> int:
    (a, b), (c, d) = word
    return a * d - b * c


def reduce_to_fundamental(z: complex) -> Tuple[complex, Word]:
    """Move z to the standard fundamental domain of SL(2, Z).

    Alternates the translation taking Re into [-1/2, 1/2) with the
    inversion z -> -1/z whenever |z| < 1 (strict).  Returns the reduced
    point and the integer word applied, det +1, with
    |word . z - zReduced| small at desk precision.
    """
    if not z.imag > 0:
        raise UsageError("z must have Im > 0, got %r" % (z,))
    a, b, c, d = 1, 0, 0, 1
    w = z
    for _ in range(_REDUCE_CAP):
        m = math.floor(w.real + 0.5)
        if m:
            w = complex(w.real - m, w.imag)
            a, b = a - m * c, b - m * d
        if w.real * w.real + w.imag * w.imag < 1.0:
            w = -1.0 / w
            a, b, c, d = -c, -d, a, b
        else:
            break
    else:
        raise PrecisionExhausted(
            "fundamental-domain reduction did not settle within %d steps "
            "(Im z = %r is below desk precision)" % (_REDUCE_CAP, z.imag))
    word: Word = ((a, b), (c, d))
    if _word_det(word) != 1:
        raise InternalInvariantError("reduction word has det != 1")
    return w, word


def _reduced_im(z: complex) -> float:
    """Im of the reduced point, without tracking the word."""
    w = z
    for _ in range(_REDUCE_CAP):
        m = math.floor(w.real + 0.5)
        if m:
            w = complex(w.real - m, w.imag)
        if w.real * w.real + w.imag * w.imag < 1.0:
            w = -1.0 / w
        else:
            return w.imag
    raise PrecisionExhausted(
        "fundamental-domain reduction did not settle within %d steps" % (_REDUCE_CAP,))


def penetration(z: complex) -> float:
    """log Im above the horocycle Im = 1, and 0 elsewhere in the domain."""
    if not z.imag > 0:
        raise UsageError("z must have Im > 0, got %r" % (z,))
    if abs(z.real) > 0.5 + 1e-9 or z.real * z.real + z.imag * z.imag < 1.0 - 1e-9:
        raise UsageError("point %r is not reduced; call reduce_to_fundamental first"
                         % (z,))
    return math.log(z.imag) if z.imag > 1.0 else 0.0


# ---------------------------------------------------------------------------
# excursions, exactly from the convergents


@dataclass(frozen=True)
class ExcursionRecord:
    """One excursion above the horocycle Im = 1.

    ``convergent_index`` is the n of the convergent p_n/q_n whose
    horoball the excursion runs through (None when a sampled excursion
    could not be matched).
    """

    index: int
    convergent_index: Optional[int]
    t_enter: float
    t_peak: float
    t_exit: float
    peak_pen: float

    def __post_init__(self):
        if not (self.t_enter <= self.t_peak <= self.t_exit):
            raise InternalInvariantError(
                "excursion times out of order: %r <= %r <= %r fails"
                % (self.t_enter, self.t_peak, self.t_exit))
        if not self.peak_pen > 0:
            raise InternalInvariantError("peak penetration must be > 0")


@dataclass(frozen=True)
class SandwichCounts:
    hits: int
    violations: int


def _acosh_one_plus(ln_x: float) -> float:
    """arccosh(1 + e^{ln_x}), stable for any ln_x."""
    if ln_x > 37.0:
        # arccosh(1 + X) = log(2X) + O(1/X); the dropped term is < 1e-16.
        return _LN2 + ln_x
    return math.acosh(1.0 + math.exp(ln_x))


def _alpha_sweep(quots: Sequence[int]) -> List[float]:
    """alpha[j] = [a_j; a_{j+1}, ..., a_M] for j = 1..M, one backward pass."""
    M = len(quots)
    alpha = [0.0] * (M + 1)
    alpha[M] = float(quots[M - 1])
    for j in range(M - 1, 0, -1):
        alpha[j] = quots[j - 1] + 1.0 / alpha[j + 1]
    return alpha


@dataclass(frozen=True)
class _DirectionData:
    quots: List[int]      # certified partial quotients a_1..a_M
    x0: float             # float value of the direction
    alpha: List[float]    # alpha[j] certified for j <= n_cap + 1
    n_cap: int            # last convergent index with certified data
    exhaust_ok: bool      # running out of quotients is a clean stop


def _direction_data(direction: Direction) -> _DirectionData:
    if isinstance(direction, Fraction):
        if not 0 < direction < 1:
            raise UsageError("direction must lie in (0, 1), got %s" % (direction,))
        quots, done = _euclid_quotients(direction, 1 << 30)
        if not done:  # pragma: no cover - euclid always terminates
            raise InternalInvariantError("exact expansion did not terminate")
        return _DirectionData(quots, float(direction), _alpha_sweep(quots),
                              len(quots) - 1, True)
    if isinstance(direction, (int, float)):
        # A float is its half-ulp interval.  The two endpoint expansions
        # share the certified quotient prefix, and alpha_{n+1} is
        # certified wherever the endpoint alphas agree; the contraction
        # of the Gauss map makes agreement improve toward the front.
        xf = float(direction)
        if not 0.0 < xf < 1.0:
            raise UsageError("direction must lie in (0, 1), got %r" % (direction,))
        half = Fraction(math.ulp(xf)) / 2
        lo_q, _ = _euclid_quotients(Fraction(xf) - half, 4096)
        hi_q, _ = _euclid_quotients(Fraction(xf) + half, 4096)
        common: List[int] = []
        for a, b in zip(lo_q, hi_q):
            if a != b:
                break
            common.append(a)
        alpha_lo = _alpha_sweep(lo_q) if lo_q else [0.0]
        alpha_hi = _alpha_sweep(hi_q) if hi_q else [0.0]
        # alpha_j is a monotone function of x on the depth-(j-1) cylinder
        # of the common digits, so for j <= len(common) + 1 the endpoint
        # values bracket it over the whole interval.
        j_top = min(len(common) + 1, len(lo_q), len(hi_q))
        j_cert = 0
        for j in range(j_top, 0, -1):
            if abs(alpha_lo[j] - alpha_hi[j]) <= 1e-9 * alpha_lo[j]:
                j_cert = j
                break
        if j_cert == 0:
            raise UsageError(
                "no certified continued-fraction data for %r; pass the "
                "direction as a Fraction or a quotient sequence" % (direction,))
        return _DirectionData(common, xf, alpha_lo[: j_cert + 1], j_cert - 1,
                              False)
    quots = _check_quotients(direction)
    tail = quots[: min(len(quots), 64)]
    return _DirectionData(quots, float(quotients_value(tail)),
                          _alpha_sweep(quots),
                          len(quots) - 1 - _ALPHA_TAIL, False)


def _excursion_stream(data: _DirectionData,
                      T: float) -> Iterator[Tuple[int, float, float, float, float]]:
    """Yield (n, t_enter, t_peak, t_exit, log H_n) for excursions with
    0 < t_peak <= T, in convergent order.

    Stops once 2 log q_n - 2.5 > T: every later excursion satisfies
    t_enter >= 2 log q_n - 2.1 > T, because the crossing distance is at
    least (1 - Im w0)^2 >= 1/4 once n >= 1.  The check runs after each
    state advance so one certified quotient beyond the last emitted
    record is enough to close the horizon.  Raises PrecisionExhausted
    when the certified data runs out first and running out is not the
    clean end of a complete expansion.
    """
    quots = data.quots
    alpha = data.alpha
    n_cap = data.n_cap
    x0 = data.x0

    log = math.log
    exp = math.exp
    sqrt = math.sqrt

    L = 0.0         # log q_n
    beta = 0.0      # q_{n-1}/q_n
    r_prev = 0.0    # p_{n-1}/q_{n-1}  (unused while beta = 0)
    r = 0.0         # p_n/q_n
    xi = x0
    n = 0
    while True:
        if n > n_cap:
            # only reachable when there was no certified data at all
            raise PrecisionExhausted(
                "certified quotients exhausted at index %d before reaching "
                "T = %r; pass a Fraction or a longer quotient sequence" % (n, T))
        a_next = alpha[n + 1]
        H = 0.5 * (a_next + xi)
        if H > 1.0:
            ln_q2 = 2.0 * L + math.log1p(r * r)
            im_w = exp(-ln_q2)
            re_w = -beta * (1.0 + r_prev * r) / (1.0 + r * r)
            c_star = 0.5 * (a_next - xi)
            dx = re_w - c_star
            num_peak = dx * dx + (im_w - H) * (im_w - H)
            t_peak = _acosh_one_plus(log(num_peak) + ln_q2 - log(2.0 * H))
            if 0.0 < t_peak <= T:
                s = sqrt(H * H - 1.0)
                t_cross = []
                for side in (s, -s):
                    num = (dx + side) ** 2 + (1.0 - im_w) ** 2
                    if num == 0.0:
                        t_cross.append(0.0)
                    else:
                        t_cross.append(_acosh_one_plus(log(num) + ln_q2 - _LN2))
                t_enter, t_exit = min(t_cross), max(t_cross)
                yield (n, t_enter, min(max(t_peak, t_enter), t_exit), t_exit, log(H))
        if n == n_cap:
            if data.exhaust_ok:
                return
            # a_{n+1} > alpha_{n+1} - 1, so q_{n+1} > q_n (alpha - 1 + beta)
            # bounds every later entry time below even though the next
            # quotient itself is not certified.
            growth = alpha[n + 1] - 1.0 + beta
            if growth > 1.0 and 2.0 * (L + log(growth)) - 2.1 > T:
                return
            raise PrecisionExhausted(
                "certified quotients exhausted at index %d before reaching "
                "T = %r; pass a Fraction or a longer quotient sequence"
                % (n + 1, T))
        # advance the bounded-ratio state from n to n+1
        a = quots[n]
        beta_new = 1.0 / (a + beta)
        L += log(a + beta)
        if n == 0:
            r_prev, r = 0.0, 1.0 / a       # p_1/q_1 = 1/a_1
        else:
            bb = beta * beta_new           # q_{n-1}/q_{n+1}
            r_prev, r = r, r * (1.0 - bb) + r_prev * bb
        beta = beta_new
        xi = 1.0 / (a + xi)
        n += 1
        if 2.0 * L - 2.5 > T:
            return


def predicted_excursions(direction: Direction, T: float) -> List[ExcursionRecord]:
    """All excursions with 0 < t_peak <= T, straight from the CF data.

    ``direction`` is a float (certified prefix; raises when the horizon
    exceeds what the float certifies), an exact Fraction (for a rational
    the final dive toward the direction's own cusp never ends and is not
    reported), or the quotient sequence itself for long horizons.
    """
    if not T > 0:
        raise UsageError("T must be > 0, got %r" % (T,))
    records = []
    for n, t_enter, t_peak, t_exit, ln_h in _excursion_stream(
            _direction_data(direction), T):
        records.append(ExcursionRecord(len(records), n, t_enter, t_peak,
                                       t_exit, ln_h))
    return records


# ---------------------------------------------------------------------------
# sampled excursions


def _bisect_boundary(pen_of, t_zero: float, t_pos: float) -> float:
    """Boundary of {pen > 0} between a zero sample and a positive one."""
    for _ in range(60):
        mid = 0.5 * (t_zero + t_pos)
        if pen_of(mid) > 0.0:
            t_pos = mid
        else:
            t_zero = mid
    return 0.5 * (t_zero + t_pos)


def _polish_peak(pen_of, lo: float, hi: float) -> Tuple[float, float]:
    """Ternary search for the peak of a locally concave penetration."""
    for _ in range(90):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if pen_of(m1) < pen_of(m2):
            lo = m1
        else:
            hi = m2
    t = 0.5 * (lo + hi)
    return t, pen_of(t)


def excursions(x: float, T: float, sample_step: Optional[float] = None
               ) -> List[ExcursionRecord]:
    """Excursions of the sampled geodesic toward x on [0, T].

    Samples penetration on a uniform grid, refines each maximal positive
    run by bisection (endpoints) and ternary search (peak), and matches
    the excursion to a convergent through the bottom row of the
    reduction word at the peak.  Emits StepTooCoarseWarning when an
    excursion predicted from the CF data contains no sample.

    Float sampling is faithful to the dyadic rational Fraction(x) and
    loses the cusp structure once e^{2t} ulp ~ 1 (t around 16); the
    CF-proxy comparison is intentionally left on beyond that point.
    """
    xf = float(x)
    if not 0.0 < xf < 1.0:
        raise UsageError("x must lie in (0, 1), got %r" % (x,))
    if not T > 0:
        raise UsageError("T must be > 0, got %r" % (T,))
    step = T / 1e6 if sample_step is None else float(sample_step)
    if not 0 < step <= T / 8:
        raise UsageError("sample_step must lie in (0, T/8], got %r" % (step,))
    n_samples = int(T / step) + 1
    if n_samples > MAX_SAMPLES:
        raise ResourceCapError(
            "%d samples exceed the cap %d; raise sample_step"
            % (n_samples, MAX_SAMPLES))

    def pen_at(t: float) -> float:
        im = _reduced_im(geodesic_point(xf, t).z)
        return math.log(im) if im > 1.0 else 0.0

    ts = [j * step for j in range(n_samples)]
    if ts[-1] < T:
        ts.append(T)
    pens = [pen_at(t) for t in ts]

    exact = Fraction(xf)
    cf = cf_expand(exact, 1 << 30)

    records: List[ExcursionRecord] = []
    j = 0
    while j < len(ts):
        if pens[j] <= 0.0:
            j += 1
            continue
        j0 = j
        while j + 1 < len(ts) and pens[j + 1] > 0.0:
            j += 1
        j1 = j
        j += 1
        t_enter = (0.0 if j0 == 0 else
                   _bisect_boundary(pen_at, ts[j0 - 1], ts[j0]))
        t_exit = (ts[j1] if j1 + 1 >= len(ts) else
                  _bisect_boundary(pen_at, ts[j1 + 1], ts[j1]))
        k_best = max(range(j0, j1 + 1), key=lambda k: pens[k])
        lo = max(t_enter, ts[k_best] - step)
        hi = min(t_exit, ts[k_best] + step)
        t_peak, peak = _polish_peak(pen_at, lo, hi)
        if peak <= 0.0:  # pragma: no cover - a positive sample is inside
            continue
        t_peak = min(max(t_peak, t_enter), t_exit)
        _, word = reduce_to_fundamental(geodesic_point(xf, t_peak).z)
        c, d = word[1]
        match: Optional[int] = None
        qc, pc = abs(c), abs(d)
        for n_idx, (pn, qn) in enumerate(zip(cf.p, cf.q)):
            if qn == qc and pn == pc:
                match = n_idx
                break
        records.append(ExcursionRecord(len(records), match, t_enter,
                                       t_peak, t_exit, peak))

    skipped = 0
    exact = _DirectionData(list(cf.quotients), xf,
                           _alpha_sweep(cf.quotients), len(cf.quotients) - 1,
                           True)
    for rec in _excursion_stream(exact, T):
        _, t_enter, _, t_exit, _ = rec
        if t_enter >= ts[-1]:
            continue
        # penetration vanishes at the boundary, so only a grid point
        # strictly inside (t_enter, t_exit) registers the excursion
        g = (math.floor(t_enter / step) + 1) * step
        if g >= t_exit or g > ts[-1]:
            skipped += 1
    if skipped:
        warnings.warn(StepTooCoarseWarning(
            "%d predicted excursion(s) contain no sample at step %g; "
            "decrease sample_step" % (skipped, step)))
    return records


# ---------------------------------------------------------------------------
# the log-law statistic


def _logcosh(s: float) -> float:
    a = abs(s)
    return a + math.log1p(math.exp(-2.0 * a)) - _LN2


def loglaw_statistic(direction: Direction, T: float, alpha: float = 0.0) -> float:
    """max over t in (e, T] of (pen(gamma(t)) - alpha t) / log t.

    Penetration along the n-th excursion is log(H_n sech(t - t_peak)),
    so the maximum over each excursion is a one-dimensional search; the
    excursions come from the exact CF engine.  Away from every excursion
    the penetration vanishes and the supremum of -alpha t / log t is
    -alpha e, the baseline returned when no excursion scores higher.
    """
    if not T > math.e:
        raise UsageError("T must exceed e, got %r" % (T,))
    if not 0.0 <= alpha < 1.0:
        raise UsageError("alpha must lie in [0, 1), got %r" % (alpha,))
    t_floor = math.nextafter(math.e, math.inf)

    candidates = []
    for _, t_enter, t_peak, t_exit, ln_h in _excursion_stream(
            _direction_data(direction), T):
        lo = max(t_enter, t_floor)
        hi = min(t_exit, T)
        if hi <= lo:
            continue
        bound = (ln_h - alpha * lo) / math.log(lo)
        candidates.append((bound, lo, hi, t_peak, ln_h))
    candidates.sort(reverse=True)

    best = -alpha * math.e
    for bound, lo, hi, t_peak, ln_h in candidates:
        if bound <= best:
            break

        def f(t: float) -> float:
            return (ln_h - _logcosh(t - t_peak) - alpha * t) / math.log(t)

        grid = 24
        vals = [(f(lo + (hi - lo) * k / grid), k) for k in range(grid + 1)]
        v_best, k_best = max(vals)
        a_lo = lo + (hi - lo) * max(k_best - 1, 0) / grid
        a_hi = lo + (hi - lo) * min(k_best + 1, grid) / grid
        for _ in range(70):
            m1 = a_lo + (a_hi - a_lo) / 3.0
            m2 = a_hi - (a_hi - a_lo) / 3.0
            if f(m1) < f(m2):
                a_lo = m1
            else:
                a_hi = m2
        best = max(best, v_best, f(0.5 * (a_lo + a_hi)))
    return best


# ---------------------------------------------------------------------------
# sandwich membership


def sandwich_membership(x: float, tau: float, epsilon: float, Q: int
                        ) -> SandwichCounts:
    """Hit counts against psi and psi_epsilon over Ford bases with q <= Q.

    With the weight L = 2 q^2, psi(L) = L^{-tau} (log L)^{-tau} and
    psi_eps(L) = L^{-tau} (log L)^{-tau(1+eps)}; a base p/q (reduced)
    is hit when |x - p/q| < psi(L) strictly, a violation when
    |x - p/q| < psi_eps(L).  Note log L < 1 at q = 1, where psi_eps
    exceeds psi; for q >= 2 the violation radius is the smaller one.
    """
    xf = float(x)
    if not tau >= 1:
        raise UsageError("tau must be >= 1, got %r" % (tau,))
    if not epsilon > 0:
        raise UsageError("epsilon must be > 0, got %r" % (epsilon,))
    if Q < 1:
        raise UsageError("Q must be >= 1, got %r" % (Q,))
    hits = violations = 0
    for q in range(1, Q + 1):
        ln_l = math.log(2 * q * q)
        ln_ln = math.log(ln_l)
        psi = math.exp(-tau * (ln_l + ln_ln))
        psi_e = math.exp(-tau * ln_l - tau * (1.0 + epsilon) * ln_ln)
        for radius, which in ((psi, 0), (psi_e, 1)):
            p_lo = math.ceil(q * (xf - radius))
            p_hi = math.floor(q * (xf + radius))
            count = 0
            for p in range(p_lo, p_hi + 1):
                if math.gcd(p, q) == 1 and abs(xf - p / q) < radius:
                    count += 1
            if which == 0:
                hits += count
            else:
                violations += count
    return SandwichCounts(hits, violations)
