"""Counting denominators that approximate a point, and the matching
almost-everywhere asymptotic.

R(x, N) counts the q <= N admitting an integer p with |x - p/q| <
psi(q).  Under the multiplicity condition 2 q psi(q) < 1 the admissible
p is unique when it exists, and for almost every x the count grows like
2 sum q psi(q).  The experiment here draws seeded uniform samples and
reports the distribution of R/prediction.

Sub-seed contract: sample i uses the counter-based Philox stream with
key = seed and counter = i, so any subset of samples can be computed in
any order (or in parallel) and still reproduce the serial run bit for
bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from limsuplab import functions as fn
from limsuplab.errors import UsageError


@dataclass(frozen=True)
class CountRecord:
    x: float
    N: int
    count: int
    prediction: float
    ratio: float


@dataclass(frozen=True)
class SchmidtPrediction:
    value: float
    condition_ok: bool          # 2 q psi(q) < 1 everywhere on [1, N]
    first_violation: Optional[int]


@dataclass(frozen=True)
class SchmidtSummary:
    psi: fn.FunctionForm
    N: int
    seed: int
    mean_ratio: float
    stddev: float
    records: tuple[CountRecord, ...]
    condition_ok: bool


def _q_psi(psi: fn.FunctionForm, N: int) -> np.ndarray:
    qs = np.arange(1, N + 1, dtype=np.float64)
    return qs * fn.evaluate_array(psi, qs)


def count_R(x, N: int, psi: fn.FunctionForm) -> int:
    """#{1 <= q <= N : |x - p/q| < psi(q) for some integer p}.

    Counts q, not (p, q) pairs.  The nearest integer to qx is the only
    candidate worth testing (any admissible p is within psi(q)·q < q/2
    of qx under the usual smallness of psi; at an exact half-integer tie
    both neighbours give the same distance, so the rounding choice is
    immaterial).
    """
    if N < 1:
        raise UsageError("N must be >= 1")
    xf = float(x)
    qs = np.arange(1, N + 1, dtype=np.float64)
    dist = np.abs(qs * xf - np.rint(qs * xf))
    return int(np.count_nonzero(dist < _q_psi(psi, N)))


def count_R_exact(x: Fraction, N: int, psi: fn.FunctionForm) -> int:
    """Fraction-arithmetic twin of count_R for rational x and
    rational-valued psi; the float path's oracle."""
    if not fn.is_rational_valued(psi):
        raise UsageError("exact counting needs a rational-valued psi")
    x = Fraction(x)
    count = 0
    for q in range(1, N + 1):
        t = q * x
        p = round(t)
        if abs(t - p) < q * fn.evaluate_rational(psi, q):
            count += 1
    return count


def schmidt_prediction(psi: fn.FunctionForm, N: int) -> SchmidtPrediction:
    """2 sum_{q<=N} q psi(q), with the multiplicity condition flagged."""
    if N < 1:
        raise UsageError("N must be >= 1")
    qpsi = _q_psi(psi, N)
    bad = np.flatnonzero(2.0 * qpsi >= 1.0)
    return SchmidtPrediction(
        value=float(2.0 * qpsi.sum()),
        condition_ok=len(bad) == 0,
        first_violation=int(bad[0]) + 1 if len(bad) else None)


def sample_x(seed: int, index: int) -> float:
    """Uniform sample i of the stream keyed by seed (see module docstring)."""
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))
    return float(gen.random())


def schmidt_experiment(psi: fn.FunctionForm, N: int, samples: int,
                       seed: int) -> SchmidtSummary:
    if samples < 0:
        raise UsageError("samples must be >= 0")
    pred = schmidt_prediction(psi, N)
    records = []
    for i in range(samples):
        x = sample_x(seed, i)
        c = count_R(x, N, psi)
        ratio = c / pred.value if pred.value > 0 else math.inf
        records.append(CountRecord(x, N, c, pred.value, ratio))
    ratios = [r.ratio for r in records]
    mean = sum(ratios) / len(ratios) if ratios else float("nan")
    var = (sum((r - mean) ** 2 for r in ratios) / len(ratios)
           if ratios else float("nan"))
    return SchmidtSummary(psi, N, seed, mean, math.sqrt(var) if ratios
                          else float("nan"), tuple(records), pred.condition_ok)
