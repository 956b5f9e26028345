"""Resonant point systems and their stage sets.

A *system* is a countable family of points in [0,1] carrying positive
weights: the rationals p/q weighted by q (with or without coprimality),
or the Ford configuration where p/q is weighted by 2Cq^2.  A *stage
spec* turns a system into a nested sequence of finite unions of balls:

* per-point stages collect B(p/q, psi(weight)) over weights in one
  geometric window (k^(n-1), k^n];
* uniform stages collect B(p/q, rho(k^n)) over all weights <= k^n.

The module provides exact enumeration (small stages, Fraction
arithmetic, loud failure beyond a pair cap) and a scan that certifies
two-sided bounds on the Lebesgue measure of every stage in a range.
The scan never raises on size: stages too large to sweep exhaustively
get a certified lower bound from a denominator-truncated subfamily
(a subset of the union can only be smaller) and an upper bound from
per-denominator ball counts (a union is at most the sum of lengths).

Duplicate centres are collapsed before sweeping: every ball of the
stage sits inside the ball at the reduced centre whose radius comes
from the smallest weight the centre attains in the window, so for a
nonincreasing radius function the union over reduced centres equals
the raw union exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from limsuplab import farey
from limsuplab import functions as fn
from limsuplab import intervals as iv
from limsuplab.errors import ResourceCapError, UsageError

DEFAULT_PAIR_CAP = 10 ** 8
# float sweep budgets: full stages below FULL_SWEEP_CAP reduced balls are
# swept exhaustively; larger stages fall back to the densest prefix of
# denominators that stays below SUBSET_SWEEP_CAP balls.
FULL_SWEEP_CAP = 32_000_000
SUBSET_SWEEP_CAP = 64_000_000
_CELL_BUDGET = 8_000_000  # target flattened pairs per sweep cell


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise UsageError("float weights/scales are not accepted; "
                         "pass int, Fraction or str")
    return Fraction(x)


# ---------------------------------------------------------------------------
# systems


class SystemKind(Enum):
    RATIONALS = "rationals"
    FORD = "ford-horoballs"


@dataclass(frozen=True)
class ResonantSystem:
    """A weighted family of rational points in [0,1]."""

    kind: SystemKind
    coprime_only: bool = False
    ford_scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "ford_scale", _frac(self.ford_scale))
        if self.ford_scale <= 0:
            raise UsageError("ford_scale must be positive")

    @property
    def reduced(self) -> bool:
        """True when enumeration only ever visits reduced fractions."""
        return self.coprime_only or self.kind is SystemKind.FORD

    def weight_of(self, q: int) -> Fraction:
        if self.kind is SystemKind.RATIONALS:
            return Fraction(q)
        return 2 * self.ford_scale * q * q

    def q_interval(self, w_lo: Fraction, w_hi: Fraction) -> tuple[int, int]:
        """Inclusive denominator range with weight in (w_lo, w_hi]."""
        w_lo, w_hi = _frac(w_lo), _frac(w_hi)
        if self.kind is SystemKind.RATIONALS:
            q_hi = w_hi.numerator // w_hi.denominator
            q_lo = w_lo.numerator // w_lo.denominator + 1
            return max(q_lo, 1), q_hi
        # Ford: 2Cq^2 <= w  <=>  q <= isqrt(floor(w / 2C))
        def q_below(w: Fraction) -> int:
            if w <= 0:
                return 0
            ratio = w / (2 * self.ford_scale)
            return math.isqrt(ratio.numerator // ratio.denominator)
        return q_below(w_lo) + 1, q_below(w_hi)

    def points_at(self, q: int) -> Iterator[int]:
        """Numerators p for denominator q, ascending."""
        if self.kind is SystemKind.RATIONALS and not self.coprime_only:
            yield from range(0, q + 1)
            return
        for p in range(0, q + 1):
            if math.gcd(p, q) == 1:
                yield p

    def count_at(self, q: int) -> int:
        if self.kind is SystemKind.RATIONALS and not self.coprime_only:
            return q + 1
        if q == 1:
            return 2  # 0/1 and 1/1
        return int(_totient_cumsum(q)[q] - _totient_cumsum(q)[q - 1])

    def count_window(self, w_lo: Fraction, w_hi: Fraction) -> int:
        """Exact number of (point, weight) pairs with weight in (w_lo, w_hi]."""
        q_lo, q_hi = self.q_interval(w_lo, w_hi)
        if q_lo > q_hi:
            return 0
        if self.kind is SystemKind.RATIONALS and not self.coprime_only:
            m = q_hi - q_lo + 1
            return m * (q_lo + q_hi + 2) // 2  # sum of (q + 1)
        cum = _totient_cumsum(q_hi)
        total = int(cum[q_hi] - cum[q_lo - 1])
        if q_lo <= 1 <= q_hi:
            total += 1  # 0/1 alongside 1/1
        return total


def classical_rationals(coprime_only: bool = False) -> ResonantSystem:
    return ResonantSystem(SystemKind.RATIONALS, coprime_only=coprime_only)


def ford_horoballs(scale=1) -> ResonantSystem:
    """Rationals weighted by twice the curvature scale: weight = 2*scale*q^2."""
    return ResonantSystem(SystemKind.FORD, ford_scale=_frac(scale))


def _totient_cumsum(limit: int) -> np.ndarray:
    # pad to a power of two so one sieve serves a whole range of stages
    padded = 1 << max(limit - 1, 1).bit_length()
    return _totient_cumsum_padded(padded)


@lru_cache(maxsize=4)
def _totient_cumsum_padded(padded: int) -> np.ndarray:
    return np.cumsum(farey.totient_sieve(padded))


# ---------------------------------------------------------------------------
# ambient measure model


@dataclass(frozen=True)
class MeasureModel:
    """Power-law control on ball measures: a r^delta <= m(B) <= b r^delta
    for radii up to scale_radius, with m supported on [0,1]."""

    delta: Fraction = Fraction(1)
    lower: Fraction = Fraction(1)
    upper: Fraction = Fraction(2)
    scale_radius: Fraction = Fraction(1, 2)

    def __post_init__(self):
        for name in ("delta", "lower", "upper", "scale_radius"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if not (0 < self.lower <= self.upper):
            raise UsageError("need 0 < lower <= upper")
        if self.delta <= 0 or self.scale_radius <= 0:
            raise UsageError("delta and scale_radius must be positive")

    def bounds(self, radius: Fraction) -> tuple[Fraction, Fraction]:
        radius = _frac(radius)
        if not (0 < radius <= self.scale_radius):
            raise UsageError("radius outside the model's validity range")
        if self.delta.denominator != 1:
            raise UsageError("exact bounds need an integer exponent")
        r_pow = radius ** self.delta.numerator
        return self.lower * r_pow, self.upper * r_pow

    def check_ball(self, center: Fraction, radius: Fraction) -> bool:
        """Exact verification of the two-sided bound on one ball."""
        lo, hi = self.bounds(radius)
        m = ball_measure(center, radius)
        return lo <= m <= hi


def unit_interval_model() -> MeasureModel:
    return MeasureModel()


def ball_measure(center, radius) -> Fraction:
    """Lebesgue measure of B(center, radius) intersected with [0,1]."""
    center, radius = _frac(center), _frac(radius)
    lo = max(center - radius, Fraction(0))
    hi = min(center + radius, Fraction(1))
    return max(hi - lo, Fraction(0))


# ---------------------------------------------------------------------------
# stage specifications


class StageMode(Enum):
    PER_POINT = "per-point"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class StageSpec:
    """How stage n is cut out of a system.

    PER_POINT: balls B(x, psi(weight)) over weights in (k^(n-1), k^n].
    UNIFORM:   balls B(x, rho(k^n)) over weights <= k^n.
    """

    mode: StageMode
    form: fn.FunctionForm
    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k", _frac(self.k))
        if self.k <= 1:
            raise UsageError("stage ratio k must exceed 1")
        if self.form.regime is not fn.Regime.LARGE:
            raise UsageError("stage radii are functions of a growing weight; "
                             "use a large-argument form")
        if not self.form.tends_to_zero():
            raise UsageError("stage radius function must decay")

    def window(self, n: int) -> tuple[Fraction, Fraction]:
        if n < 1:
            raise UsageError("stage index must be >= 1")
        if self.mode is StageMode.PER_POINT:
            return self.k ** (n - 1), self.k ** n
        return Fraction(0), self.k ** n

    def radius_exact(self, weight: Fraction) -> Fraction:
        return fn.evaluate_rational(self.form, weight)

    def radius_float(self, weight) -> float:
        return fn.evaluate(self.form, float(weight))


def per_point_stage(psi: fn.FunctionForm, k) -> StageSpec:
    return StageSpec(StageMode.PER_POINT, psi, _frac(k))


def uniform_stage(rho: fn.FunctionForm, k) -> StageSpec:
    return StageSpec(StageMode.UNIFORM, rho, _frac(k))


# ---------------------------------------------------------------------------
# enumeration and exact stage sets


def enumerate_system(system: ResonantSystem, w_lo, w_hi,
                     cap: int = DEFAULT_PAIR_CAP
                     ) -> Iterator[tuple[Fraction, Fraction]]:
    """(point, weight) pairs with weight in (w_lo, w_hi], ordered by
    weight then point.  Raises ResourceCapError before yielding anything
    if the window holds more than cap pairs."""
    w_lo, w_hi = _frac(w_lo), _frac(w_hi)
    total = system.count_window(w_lo, w_hi)
    if total > cap:
        raise ResourceCapError(
            "window (%s, %s] holds %d pairs, cap is %d"
            % (w_lo, w_hi, total, cap))
    q_lo, q_hi = system.q_interval(w_lo, w_hi)
    for q in range(q_lo, q_hi + 1):
        w = system.weight_of(q)
        for p in system.points_at(q):
            yield Fraction(p, q), w


def enumerate_stage(system: ResonantSystem, stage: StageSpec, n: int,
                    cap: int = DEFAULT_PAIR_CAP
                    ) -> Iterator[tuple[Fraction, Fraction]]:
    w_lo, w_hi = stage.window(n)
    return enumerate_system(system, w_lo, w_hi, cap=cap)


def delta_stage(system: ResonantSystem, stage: StageSpec, n: int,
                cap: int = DEFAULT_PAIR_CAP) -> iv.IntervalSet:
    """Stage n as an IntervalSet.

    Exact (Fraction endpoints) whenever the radius function is
    rational-valued at rational weights; float mode otherwise.
    """
    exact = fn.is_rational_valued(stage.form)
    mode = iv.Mode.EXACT if exact else iv.Mode.FLOAT
    centers, radii = [], []
    for point, weight in enumerate_stage(system, stage, n, cap=cap):
        if stage.mode is StageMode.UNIFORM:
            weight = stage.k ** n  # uniform radius at the stage scale
        if exact:
            r = stage.radius_exact(weight)
        else:
            r = stage.radius_float(weight)
        centers.append(point if exact else float(point))
        radii.append(r)
    return iv.from_balls(centers, radii, mode=mode)


# ---------------------------------------------------------------------------
# measure scan


@dataclass(frozen=True)
class StageMeasure:
    """Certified measure bracket for one stage."""

    n: int
    count: int        # reduced balls making up the stage
    pairs: int        # raw (point, weight) pairs in the window
    lower: float      # certified lower bound on the stage measure
    upper: float      # certified upper bound
    value: Optional[float]  # sweep value when the full stage was swept
    method: str
    truncated: bool


@dataclass(frozen=True)
class StageScan:
    system: ResonantSystem
    stage: StageSpec
    records: tuple[StageMeasure, ...]

    def lowers(self) -> list[float]:
        return [r.lower for r in self.records]

    def uppers(self) -> list[float]:
        return [r.upper for r in self.records]

    def tail_upper_sum(self) -> float:
        """Upper bound on the summed measures of the scanned stages."""
        return float(sum(r.upper for r in self.records))

    def min_lower(self) -> float:
        return min((r.lower for r in self.records), default=0.0)


def _radius_vector(stage: StageSpec, weights: np.ndarray) -> np.ndarray:
    """Vectorised stage radius over an array of float weights."""
    try:
        return fn.evaluate_array(stage.form, weights)
    except fn.DomainError as exc:
        raise UsageError(
            "stage weights violate the radius function's domain: %s"
            % exc) from exc


def _stage_ball_plan(system: ResonantSystem, stage: StageSpec, n: int):
    """Reduced-centre description of stage n.

    Returns (b_vals, radii, q_hi) where b_vals are the denominators of
    the reduced centres, radii the per-denominator ball radii.  The
    union of balls over reduced centres equals the stage set exactly
    (the raw ball at p/q = a/b has radius at most the reduced ball's,
    because the radius function is nonincreasing on the window and the
    reduced ball uses the smallest weight the centre attains).
    """
    w_lo, w_hi = stage.window(n)
    q_lo, q_hi = system.q_interval(w_lo, w_hi)
    if q_lo > q_hi:
        return np.zeros(0, dtype=np.int64), np.zeros(0), 0
    if stage.mode is StageMode.UNIFORM:
        # weights fill (0, k^n], so every denominator from 1 up appears
        r = stage.radius_float(stage.k ** n)
        b_vals = np.arange(1, q_hi + 1, dtype=np.int64)
        radii = np.full(len(b_vals), r)
        return b_vals, radii, q_hi
    # per-point windows
    if system.kind is SystemKind.RATIONALS and not system.coprime_only:
        # all reduced denominators up to q_hi appear, via their smallest
        # multiple inside the window
        b_vals = np.arange(1, q_hi + 1, dtype=np.int64)
        w_lo_floor = w_lo.numerator // w_lo.denominator
        qmin = farey.min_multiple_above(b_vals, w_lo_floor, q_hi)
        keep = qmin > 0
        b_vals, qmin = b_vals[keep], qmin[keep]
        radii = _radius_vector(stage, qmin.astype(np.float64))
        return b_vals, radii, q_hi
    # reduced systems: denominators live in the window themselves
    b_vals = np.arange(q_lo, q_hi + 1, dtype=np.int64)
    if system.kind is SystemKind.FORD:
        weights = 2.0 * float(system.ford_scale) * b_vals.astype(np.float64) ** 2
    else:
        weights = b_vals.astype(np.float64)
    radii = _radius_vector(stage, weights)
    return b_vals, radii, q_hi


def _cell_sweep(b_vals: np.ndarray, radii: np.ndarray,
                clip_lo: float = 0.0, clip_hi: float = 1.0
                ) -> tuple[float, int]:
    """Measure of union of balls at reduced fractions a/b (gcd(a,b)=1,
    a/b in [0,1]) with per-denominator radii, clipped to [clip_lo,
    clip_hi].  Chunked over x-cells so memory stays bounded.

    Returns (measure, number of reduced balls processed).
    """
    if len(b_vals) == 0:
        return 0.0, 0
    flat_fixed = float(np.sum(2.0 * radii * b_vals) + 3 * len(b_vals))
    flat_sweep = float(b_vals.astype(np.float64).sum())
    ncells = max(1, math.ceil(flat_sweep /
                              max(_CELL_BUDGET - flat_fixed, _CELL_BUDGET / 8)))
    edges = np.linspace(clip_lo, clip_hi, ncells + 1)
    total = 0.0
    n_balls = 0
    for i in range(ncells):
        clo, chi = float(edges[i]), float(edges[i + 1])
        a_lo = np.floor(b_vals * (clo - radii)).astype(np.int64) - 1
        a_hi = np.ceil(b_vals * (chi + radii)).astype(np.int64) + 1
        np.clip(a_lo, 0, b_vals, out=a_lo)
        np.clip(a_hi, 0, b_vals, out=a_hi)
        counts = a_hi - a_lo + 1
        tot = int(counts.sum())
        if tot > 10 * _CELL_BUDGET:
            raise ResourceCapError(
                "sweep cell holds %d candidate balls; the stage radii are "
                "too large for the configured cell budget" % tot)
        b_rep = np.repeat(b_vals, counts)
        starts = np.cumsum(counts) - counts
        a_flat = (np.arange(tot, dtype=np.int64)
                  - np.repeat(starts, counts) + np.repeat(a_lo, counts))
        keep = np.gcd(a_flat, b_rep) == 1
        b_rep, a_flat = b_rep[keep], a_flat[keep]
        r_flat = np.repeat(radii, counts)[keep]
        centers = a_flat / b_rep
        n_balls += len(centers)  # boundary balls counted per cell: budget
        total += farey.union_length(centers - r_flat, centers + r_flat,
                                    clo, chi)
    return total, n_balls


def _per_q_upper(system: ResonantSystem, stage: StageSpec, n: int) -> float:
    """Sum over denominators of (ball count) * (ball length), capped at 1
    per denominator and at 1 overall: a certified measure upper bound."""
    w_lo, w_hi = stage.window(n)
    q_lo, q_hi = system.q_interval(w_lo, w_hi)
    if q_lo > q_hi:
        return 0.0
    qs = np.arange(q_lo, q_hi + 1, dtype=np.int64)
    if stage.mode is StageMode.UNIFORM:
        r = np.full(len(qs), stage.radius_float(stage.k ** n))
    else:
        if system.kind is SystemKind.FORD:
            weights = 2.0 * float(system.ford_scale) * qs.astype(np.float64) ** 2
        else:
            weights = qs.astype(np.float64)
        r = _radius_vector(stage, weights)
    raw_counts = (system.kind is SystemKind.RATIONALS
                  and not system.coprime_only
                  and stage.mode is StageMode.PER_POINT)
    if raw_counts:
        counts = (qs + 1).astype(np.float64)
    else:
        # the union over reduced centres is the same set, so counting
        # phi(q) balls per denominator still bounds it from above
        cum = _totient_cumsum(q_hi)
        counts = (cum[q_lo:q_hi + 1] - cum[q_lo - 1:q_hi]).astype(np.float64)
        if q_lo <= 1 <= q_hi:
            counts[0] += 1
    per_q = np.minimum(1.0, 2.0 * r * counts)
    # one-ulp-per-term slack keeps the bound certified despite rounding
    slack = len(qs) * 4e-16 + float(np.abs(per_q).max(initial=0.0)) * 1e-12
    return min(1.0, float(per_q.sum()) + slack)


def _reduced_ball_counts(b_vals: np.ndarray) -> np.ndarray:
    """phi(b) per selected denominator (with both endpoints at b=1)."""
    if len(b_vals) == 0:
        return np.zeros(0, dtype=np.int64)
    cum = _totient_cumsum(int(b_vals[-1]))
    counts = cum[b_vals] - cum[b_vals - 1]
    if b_vals[0] == 1:
        counts = counts.copy()
        counts[0] += 1
    return counts


def _truncate_plan(b_vals: np.ndarray, radii: np.ndarray, cap: int):
    """Smallest-denominator prefix whose reduced-ball count fits cap.

    Small denominators carry the largest radii in every stage plan, so
    the prefix is the mass-greedy choice for a union lower bound.
    """
    if len(b_vals) == 0:
        return b_vals, radii
    running = np.cumsum(_reduced_ball_counts(b_vals))
    idx = int(np.searchsorted(running, cap, side="right"))
    return b_vals[:idx], radii[:idx]


def stage_measure_scan(system: ResonantSystem, stage: StageSpec,
                       n_lo: int, n_hi: int, *,
                       full_cap: int = FULL_SWEEP_CAP,
                       subset_cap: int = SUBSET_SWEEP_CAP) -> StageScan:
    """Certified measure brackets for stages n_lo..n_hi.

    Never raises on stage size: a stage whose reduced-ball count exceeds
    full_cap is reported from a truncated subfamily (lower bound) plus
    per-denominator sums (upper bound), flagged truncated.  Setting
    subset_cap to 0 skips sweeping for oversized stages entirely and
    reports the trivial lower bound 0 with the certified upper bound.
    """
    if n_hi < n_lo:
        raise UsageError("empty stage range")
    records = []
    for n in range(n_lo, n_hi + 1):
        w_lo, w_hi = stage.window(n)
        pairs = system.count_window(w_lo, w_hi)
        b_vals, radii, _ = _stage_ball_plan(system, stage, n)
        count = int(_reduced_ball_counts(b_vals).sum())
        upper = _per_q_upper(system, stage, n)
        if count == 0:
            records.append(StageMeasure(n, 0, pairs, 0.0, 0.0, 0.0,
                                        "empty", False))
            continue
        if count <= full_cap:
            value, swept = _cell_sweep(b_vals, radii)
            budget = farey.union_length_error_budget(swept)
            records.append(StageMeasure(
                n, count, pairs,
                max(0.0, value - budget), min(upper, value + budget),
                value, "full-sweep", False))
            continue
        if subset_cap > 0:
            b_sub, r_sub = _truncate_plan(b_vals, radii, subset_cap)
            value, swept = _cell_sweep(b_sub, r_sub)
            budget = farey.union_length_error_budget(swept)
            records.append(StageMeasure(
                n, count, pairs, max(0.0, value - budget), upper,
                None, "subset-sweep", True))
        else:
            records.append(StageMeasure(
                n, count, pairs, 0.0, upper, None, "per-q-upper", True))
    return StageScan(system, stage, tuple(records))
