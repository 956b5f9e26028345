"""Ford circles: the horoball family at the cusp of the modular group.

The circle based at p/q (in lowest terms) has radius 1/(2q^2), weight
2q^2, and touches the real line at p/q.  Everything in this module is
exact: radius windows translate to integer ranges of q via isqrt, base
windows are half-open [lo, hi) so each circle on the unit circle is
counted once, and the disjointness sweep runs in integer arithmetic
throughout.

The window algebra, spelled out once:

    radius >= r_lo  <=>  2 q^2 <= 1/r_lo        <=>  q <= isqrt(floor(1/(2 r_lo)))
    radius <  r_hi  <=>  2 q^2 >  1/r_hi        <=>  q >= isqrt(floor(1/(2 r_hi))) + 1

Both reductions are exact for rational bounds: q^2 <= M iff
q^2 <= floor(M), and the smallest q with q^2 > M is isqrt(floor(M)) + 1
because floor(M) + 1 > M strictly.

Disjointness rests on one polynomial identity.  With d = p/q - p'/q',
r = 1/(2q^2), r' = 1/(2q'^2) and D = p q' - p' q:

    d^2 + (r - r')^2 - (r + r')^2  =  d^2 - 4 r r'  =  (D^2 - 1) / (q q')^2

so two distinct circles overlap iff D = 0 (impossible for reduced
fractions), are tangent iff |D| = 1, and otherwise have a positive gap
(D^2 - 1)/(q q')^2 between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from limsuplab import farey
from limsuplab.errors import InternalInvariantError, ResourceCapError, UsageError

DEFAULT_BALL_CAP = 2_000_000
_ROW_BLOCK = 1024


def _frac(x, name: str) -> Fraction:
    if isinstance(x, float):
        raise UsageError("%s must be exact (int/Fraction), got float %r"
                         % (name, x))
    return Fraction(x)


@dataclass(frozen=True)
class Horoball:
    base: Fraction
    radius: Fraction
    weight: Fraction

    def __post_init__(self):
        if self.radius * self.weight != 1:
            raise UsageError("radius * weight must equal 1")

    @property
    def q(self) -> int:
        return self.base.denominator


def ball_at(p: int, q: int) -> Horoball:
    if q < 1 or math.gcd(p, q) != 1:
        raise UsageError("base must be p/q in lowest terms with q >= 1")
    return Horoball(Fraction(p, q), Fraction(1, 2 * q * q),
                    Fraction(2 * q * q))


def q_window(r_lo: Fraction, r_hi: Fraction) -> tuple[int, int]:
    """Integer range [q_min, q_max] with r_lo <= 1/(2q^2) < r_hi;
    empty when q_min > q_max."""
    r_lo, r_hi = _frac(r_lo, "r_lo"), _frac(r_hi, "r_hi")
    if not (0 < r_lo < r_hi):
        raise UsageError("need 0 < r_lo < r_hi")
    m_hi = Fraction(1, 2) / r_lo     # q^2 <= m_hi
    m_lo = Fraction(1, 2) / r_hi     # q^2 >  m_lo
    q_max = math.isqrt(m_hi.numerator // m_hi.denominator)
    q_min = math.isqrt(m_lo.numerator // m_lo.denominator) + 1
    return q_min, q_max


def _base_range(q: int, b_lo: Fraction, b_hi: Fraction) -> tuple[int, int]:
    """Numerators p with p/q in [b_lo, b_hi): half-open on both counts."""
    return math.ceil(q * b_lo), math.ceil(q * b_hi) - 1


def enumerate_horoballs(base_window: tuple, r_lo, r_hi,
                        cap: int = DEFAULT_BALL_CAP) -> list[Horoball]:
    """All Ford circles with base in the half-open window and radius in
    [r_lo, r_hi), ordered by denominator then base."""
    b_lo = _frac(base_window[0], "base lo")
    b_hi = _frac(base_window[1], "base hi")
    if b_lo >= b_hi:
        return []
    q_min, q_max = q_window(r_lo, r_hi)
    if q_max >= q_min:
        # coarse O(1) bound: each q contributes < width*q + 1 numerators
        width = b_hi - b_lo
        q_sum = (q_max * (q_max + 1) - (q_min - 1) * q_min) // 2
        bound = width * q_sum + (q_max - q_min + 1)
        if bound > cap:
            raise ResourceCapError(
                "window holds up to ~%d bases (cap %d); shrink it or raise "
                "the cap" % (math.ceil(bound), cap))
    out = []
    for q in range(q_min, q_max + 1):
        p_lo, p_hi = _base_range(q, b_lo, b_hi)
        for p in range(p_lo, p_hi + 1):
            if math.gcd(p, q) == 1:
                out.append(ball_at(p, q))
    return out


def count_horoballs(base_window: tuple, r_lo, r_hi) -> int:
    """len(enumerate_horoballs(...)) without building the list."""
    b_lo = _frac(base_window[0], "base lo")
    b_hi = _frac(base_window[1], "base hi")
    if b_lo >= b_hi:
        return 0
    q_min, q_max = q_window(r_lo, r_hi)
    total = 0
    for q in range(q_min, q_max + 1):
        p_lo, p_hi = _base_range(q, b_lo, b_hi)
        if p_hi < p_lo:
            continue
        if q == 1:
            total += p_hi - p_lo + 1
        else:
            ps = np.arange(p_lo, p_hi + 1, dtype=np.int64)
            total += int(np.count_nonzero(np.gcd(ps, q) == 1))
    return total


@dataclass(frozen=True)
class CountReport:
    R: Fraction
    lam: Fraction
    base_window: tuple[Fraction, Fraction]
    q_min: int
    q_max: int
    count: int
    ratio: float        # count / (R^-1 * m(B))


def horoball_count_ratio(base_window: tuple, R, lam) -> CountReport:
    """Count circles with base in the window and radius in [lam*R, R),
    normalized by R^-1 * m(B).

    An empty q-range is a legitimate zero (the radius window slid
    between consecutive admissible radii); a zero-measure base window is
    a degenerate request and rejected.
    """
    R = _frac(R, "R")
    lam = _frac(lam, "lambda")
    if R <= 0:
        raise UsageError("R must be positive")
    if not 0 < lam < 1:
        raise UsageError("lambda must lie in (0, 1)")
    b_lo = _frac(base_window[0], "base lo")
    b_hi = _frac(base_window[1], "base hi")
    if b_hi <= b_lo:
        raise UsageError("degenerate base window: m(B) = 0")
    q_min, q_max = q_window(lam * R, R)
    count = (count_horoballs((b_lo, b_hi), lam * R, R)
             if q_min <= q_max else 0)
    ratio = float(Fraction(count) * R / (b_hi - b_lo))
    return CountReport(R, lam, (b_lo, b_hi), q_min, q_max, count, ratio)


# -- exact pairwise geometry ----------------------------------------------

@dataclass(frozen=True)
class PairRelation:
    det: int            # p q' - p' q
    tangent: bool
    gap: Fraction       # d^2 - (r + r')^2 + (r - r')^2, exactly


def pair_relation(p: int, q: int, p2: int, q2: int) -> PairRelation:
    """Exact relation between the circles at p/q and p2/q2, via Fractions.

    Recomputes the center-distance identity from scratch (no shortcut
    through the determinant) so it can serve as the independent witness
    for the integer sweep.
    """
    for pp, qq in ((p, q), (p2, q2)):
        if qq < 1 or math.gcd(pp, qq) != 1:
            raise UsageError("bases must be reduced fractions")
    d = Fraction(p, q) - Fraction(p2, q2)
    r, r2 = Fraction(1, 2 * q * q), Fraction(1, 2 * q2 * q2)
    gap = d * d - (r + r2) ** 2 + (r - r2) ** 2
    det = p * q2 - p2 * q
    if gap != Fraction(det * det - 1, (q * q2) ** 2):
        raise InternalInvariantError(
            "center-distance identity failed at %d/%d vs %d/%d" % (p, q, p2, q2))
    return PairRelation(det, det * det == 1, gap)


@dataclass(frozen=True)
class DisjointnessReport:
    q_max: int
    points: int
    pairs: int
    tangent_pairs: int
    overlap_pairs: int          # must be 0
    identity_q_max: int
    identity_pairs: int

    @property
    def all_disjoint(self) -> bool:
        return self.overlap_pairs == 0


def disjointness_check(q_max: int, identity_q_max: int = 40) -> DisjointnessReport:
    """Verify, over every pair of distinct reduced fractions in [0, 1]
    with denominators <= q_max, that the Ford circle interiors are
    disjoint and that tangency happens exactly at |p q' - p' q| = 1.

    The sweep is pure integer arithmetic (products bounded by q_max^2,
    far inside int64).  On top of it, every pair with denominators
    <= identity_q_max is re-derived through exact Fractions in
    pair_relation, so the two layers confirm each other.
    """
    if q_max < 2:
        raise UsageError("q_max must be >= 2")
    nums, dens = farey.reduced_fractions(q_max)
    n = len(nums)
    pairs = tangent = overlap = 0
    for row0 in range(0, n, _ROW_BLOCK):
        row1 = min(row0 + _ROW_BLOCK, n)
        det = (nums[row0:row1, None] * dens[None, :]
               - dens[row0:row1, None] * nums[None, :])
        keep = np.arange(row0, row1)[:, None] < np.arange(n)[None, :]
        d2 = det * det
        pairs += int(keep.sum())
        tangent += int(np.count_nonzero((d2 == 1) & keep))
        overlap += int(np.count_nonzero((d2 == 0) & keep))
    if overlap:
        raise InternalInvariantError(
            "%d overlapping Ford pairs at q_max=%d" % (overlap, q_max))

    id_nums, id_dens = farey.reduced_fractions(min(identity_q_max, q_max))
    m = len(id_nums)
    identity_pairs = 0
    for i in range(m):
        for j in range(i + 1, m):
            rel = pair_relation(int(id_nums[i]), int(id_dens[i]),
                                int(id_nums[j]), int(id_dens[j]))
            if rel.gap < 0:
                raise InternalInvariantError("negative gap in exact layer")
            identity_pairs += 1
    return DisjointnessReport(q_max, n, pairs, tangent, 0,
                              min(identity_q_max, q_max), identity_pairs)
