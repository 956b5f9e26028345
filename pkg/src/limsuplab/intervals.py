"""Finite unions of subintervals of the unit interval.

Everything the stage-set machinery measures eventually lands here: a
union of balls clipped to [0,1] is a finite union of intervals, and its
Lebesgue measure is the sum of the lengths after normalisation.

Two arithmetic modes.  Exact mode keeps endpoints as Fractions and every
comparison and length is exact; this is the default, and the one the
rational stage sets use.  Float mode exists for endpoints that are
honestly transcendental (values of log-laden radius functions); its
error budget is one ulp per endpoint operation, which the measure sums
inherit.  The two modes never mix inside one set.

Endpoints are conventionally open/closed agnostic: single points carry
no measure, so touching intervals merge and degenerate intervals vanish
during normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

from limsuplab.errors import UsageError

Endpoint = Union[Fraction, float]

ZERO = Fraction(0)
ONE = Fraction(1)


class Mode(Enum):
    EXACT = "exact"
    FLOAT = "float"


@dataclass(frozen=True)
class IntervalSet:
    """Normalised finite union of subintervals of [0,1].

    intervals: sorted tuple of (lo, hi) with lo < hi, hi_i < lo_{i+1};
    all endpoints Fractions (exact mode) or floats (float mode).
    Build through `interval_set` (or the helpers below), which
    normalises; the constructor trusts its input.
    """

    intervals: Tuple[Tuple[Endpoint, Endpoint], ...]
    mode: Mode = Mode.EXACT

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    @property
    def empty(self) -> bool:
        return not self.intervals


def _coerce(x, mode: Mode) -> Endpoint:
    if mode is Mode.EXACT:
        if isinstance(x, float):
            raise UsageError(
                "float endpoint %r in exact mode; pass Fractions or choose "
                "Mode.FLOAT" % x)
        return Fraction(x)
    return float(x)


def interval_set(pairs: Iterable[Tuple[Endpoint, Endpoint]],
                 mode: Mode = Mode.EXACT) -> IntervalSet:
    """Normalise raw (lo, hi) pairs into an IntervalSet.

    Clips to [0,1], drops empty and degenerate pieces, sorts, and merges
    overlapping or touching neighbours.
    """
    lo_clip = ZERO if mode is Mode.EXACT else 0.0
    hi_clip = ONE if mode is Mode.EXACT else 1.0
    clipped = []
    for lo, hi in pairs:
        lo = _coerce(lo, mode)
        hi = _coerce(hi, mode)
        if lo < lo_clip:
            lo = lo_clip
        if hi > hi_clip:
            hi = hi_clip
        if lo < hi:
            clipped.append((lo, hi))
    clipped.sort()
    merged: list[list[Endpoint]] = []
    for lo, hi in clipped:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return IntervalSet(tuple((lo, hi) for lo, hi in merged), mode)


def empty_set(mode: Mode = Mode.EXACT) -> IntervalSet:
    return IntervalSet((), mode)


def whole_interval(mode: Mode = Mode.EXACT) -> IntervalSet:
    if mode is Mode.EXACT:
        return IntervalSet(((ZERO, ONE),), mode)
    return IntervalSet(((0.0, 1.0),), mode)


def measure(s: IntervalSet) -> Endpoint:
    """Total length; exact Fraction in exact mode."""
    if s.mode is Mode.EXACT:
        return sum((hi - lo for lo, hi in s.intervals), ZERO)
    return float(sum(hi - lo for lo, hi in s.intervals))


def intersect_ball(s: IntervalSet, center: Endpoint,
                   radius: Endpoint) -> IntervalSet:
    """Intersection with the open ball B(center, radius).

    Radius zero (or negative) gives the empty set: single points carry
    no measure here.
    """
    c = _coerce(center, s.mode)
    r = _coerce(radius, s.mode)
    if r <= 0:
        return empty_set(s.mode)
    lo_b, hi_b = c - r, c + r
    picked = []
    for lo, hi in s.intervals:
        if hi <= lo_b:
            continue
        if lo >= hi_b:
            break
        picked.append((max(lo, lo_b), min(hi, hi_b)))
    # already sorted, disjoint, inside [0,1]; degenerate pieces cannot
    # appear because both inputs had lo < hi and the overlap is nonempty
    return IntervalSet(tuple(picked), s.mode)


def intersect(s: IntervalSet, t: IntervalSet) -> IntervalSet:
    if s.mode is not t.mode:
        raise UsageError("cannot intersect sets in different modes")
    out = []
    i = j = 0
    a, b = s.intervals, t.intervals
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return IntervalSet(tuple(out), s.mode)


def union(s: IntervalSet, t: IntervalSet) -> IntervalSet:
    if s.mode is not t.mode:
        raise UsageError("cannot union sets in different modes")
    return interval_set(list(s.intervals) + list(t.intervals), s.mode)


def from_balls(centers: Sequence[Endpoint], radii,
               mode: Mode = Mode.EXACT) -> IntervalSet:
    """Union of balls B(c_i, r_i) clipped to [0,1].

    radii is a sequence matching centers, or a single radius shared by
    all centers.
    """
    try:
        iter(radii)
        rs = list(radii)
    except TypeError:
        rs = [radii] * len(centers)
    if len(rs) != len(centers):
        raise UsageError("radii length mismatch")
    return interval_set(((c - r, c + r) for c, r in zip(centers, rs)), mode)


def contains_point(s: IntervalSet, x: Endpoint) -> bool:
    """Membership of a single point, closed-interval convention."""
    x = _coerce(x, s.mode)
    for lo, hi in s.intervals:
        if lo <= x <= hi:
            return True
        if lo > x:
            return False
    return False
