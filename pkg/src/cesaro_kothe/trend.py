"""Finite-window trend extraction for asymptotic statements.

All sequences are handled through their logarithms, sampled at geometrically
spaced indices. Classification rules (``L`` = log-values, *h* = last half of the
samples, *q* = last quarter):

``vanishing``
    *h* strictly decreasing and either ``L[-1] - L[0] < log 1e-6`` or the log-log
    slope over *q* is ``<= -SLOPE``.
``divergent``
    *h* strictly increasing and either ``L[-1] - L[0] > log 1e6`` or the log-log
    slope over *q* is ``>= SLOPE``.
``bounded``
    ``max L[h] <= max L[q] + log 1.05`` without monotone growth across *h*, or
    *h* nonincreasing.
``unknown``
    anything else.

A bounded trend whose last half stays inside a factor-1.05 band is flagged as a
plateau; criteria that need a limit of zero read a plateau as evidence of a
positive limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrendReport",
    "SeriesReport",
    "sample_indices",
    "classify",
    "sequence_trend",
    "series_trend",
    "log_cumsum_exp",
    "VANISH_RATIO",
    "DIVERGE_RATIO",
    "BAND",
    "SLOPE",
]

VANISH_RATIO = math.log(1e-6)
DIVERGE_RATIO = math.log(1e6)
BAND = math.log(1.05)
SLOPE = 0.5
# p-series comparison margin for series convergence
SERIES_MARGIN = 0.05
DEFAULT_SAMPLES = 64


def sample_indices(N: int, count: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Distinct geometrically spaced indices in ``1..N`` (always includes 1 and N)."""
    pts = np.unique(np.rint(np.geomspace(1, N, num=min(count, N))).astype(np.int64))
    return pts


def _strict_dec(x) -> bool:
    a, b = x[:-1], x[1:]
    return bool(np.all((b < a) | (np.isneginf(a) & np.isneginf(b))))


def _strict_inc(x) -> bool:
    return bool(np.all(x[1:] > x[:-1]))


def _nonincreasing(x) -> bool:
    return bool(np.all(x[1:] <= x[:-1]))


def _slope(logv, idx) -> float:
    lo, hi = logv[0], logv[-1]
    if not (np.isfinite(lo) and np.isfinite(hi)):
        return -math.inf if np.isneginf(hi) else math.nan
    span = math.log(idx[-1]) - math.log(idx[0])
    if span <= 0:
        return math.nan
    with np.errstate(over="ignore"):
        return float((hi - lo) / span)


def classify(logv, idx) -> tuple[str, bool, float]:
    """Classify sampled log-values; returns ``(class, plateau, tail_slope)``."""
    logv = np.asarray(logv, dtype=np.longdouble)
    idx = np.asarray(idx)
    k = len(logv)
    if k < 4:
        return "unknown", False, math.nan
    h = logv[k // 2:]
    q = logv[(3 * k) // 4:]
    qi = idx[(3 * k) // 4:]
    slope = _slope(q, qi)
    if np.all(np.isneginf(h)):
        return "vanishing", False, -math.inf
    first, last = logv[0], logv[-1]
    if _strict_dec(h) and (last - first < VANISH_RATIO or slope <= -SLOPE):
        return "vanishing", False, slope
    if _strict_inc(h) and (last - first > DIVERGE_RATIO or slope >= SLOPE):
        return "divergent", False, slope
    finite_h = h[np.isfinite(h)]
    plateau = finite_h.size == h.size and float(finite_h.max() - finite_h.min()) <= BAND
    growth = _strict_inc(h) and (h[-1] - h[0] > BAND)
    if (h.max() <= q.max() + BAND and not growth) or _nonincreasing(h):
        return "bounded", plateau, slope
    return "unknown", False, slope


@dataclass(frozen=True)
class TrendReport:
    """Trend of a positive sequence given through its logarithm.

    ``samples`` are ``(i, log value)`` pairs at geometric indices;
    ``log_sup`` / ``argsup`` come from a full scan of the window.
    """

    samples: tuple
    classification: str
    plateau: bool
    tail_monotone: str  # 'decreasing' | 'increasing' | 'nonincreasing' | 'mixed'
    last_half_max: float
    tail_slope: float
    log_sup: float
    argsup: int
    N: int
    note: str = ""

    @property
    def bounded(self) -> bool:
        return self.classification in ("bounded", "vanishing")

    @property
    def vanishing(self) -> bool:
        return self.classification == "vanishing"

    @property
    def diverges(self) -> bool:
        return self.classification == "divergent"

    @property
    def nonvanishing(self) -> bool:
        """Certified to stay away from zero: divergent or a plateau."""
        return self.diverges or (self.classification == "bounded" and self.plateau)

    def to_json(self) -> dict:
        return {
            "samples": [[int(i), _jf(v)] for i, v in self.samples],
            "classification": self.classification,
            "plateau": self.plateau,
            "tail_monotone": self.tail_monotone,
            "tail_slope": _jf(self.tail_slope),
            "log_sup": _jf(self.log_sup),
            "argsup": self.argsup,
            "N": self.N,
        }


def _jf(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


def sequence_trend(log_values, note: str = "", count: int = DEFAULT_SAMPLES, offset: int = 0) -> TrendReport:
    """Trend report for the sequence ``exp(log_values[k-1])``, ``k = 1..len``.

    ``offset`` shifts the reported indices (a sequence starting at ``i = 2``
    uses ``offset=1``); the geometric sampling runs on the shifted indices.
    """
    lv = np.asarray(log_values)
    N = lv.shape[0] + offset
    idx = sample_indices(lv.shape[0], count) + offset
    sampled = np.asarray(lv[idx - 1 - offset], dtype=np.longdouble)
    cls, plateau, slope = classify(sampled, idx)
    h = sampled[len(sampled) // 2:]
    if _strict_dec(h):
        mono = "decreasing"
    elif _strict_inc(h):
        mono = "increasing"
    elif _nonincreasing(h):
        mono = "nonincreasing"
    else:
        mono = "mixed"
    k = int(np.argmax(lv))
    with np.errstate(over="ignore"):
        as_float = [float(v) for v in sampled]
        last_half_max = float(h.max()) if h.size else math.nan
        log_sup = float(lv[k])
    return TrendReport(
        samples=tuple(zip(idx.tolist(), as_float)),
        classification=cls,
        plateau=plateau,
        tail_monotone=mono,
        last_half_max=last_half_max,
        tail_slope=slope,
        log_sup=log_sup,
        argsup=k + 1 + offset,
        N=N,
        note=note,
    )


def log_cumsum_exp(log_terms) -> np.ndarray:
    """``log(sum_{j<=i} exp(t_j))`` for every prefix, in the input precision."""
    t = np.asarray(log_terms)
    if t.size == 0:
        return t.copy()
    return np.logaddexp.accumulate(t)


@dataclass(frozen=True)
class SeriesReport:
    """Convergence evidence for ``sum_i exp(log_terms[i-1])``.

    ``classification`` is ``convergent``, ``divergent`` or ``unknown``.
    Terms that do not tend to zero, or decay no faster than ``i^{-(1 - margin)}``,
    certify divergence; terms decaying like ``i^{-(1 + margin)}`` or faster, or
    partial sums that settle inside a factor 1.05 over the last half, certify
    convergence.
    """

    classification: str
    terms: TrendReport
    partial_sums: TrendReport
    log_total: float
    finite_support: bool = False

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "finite_support": self.finite_support,
            "log_total": _jf(self.log_total),
            "terms": self.terms.to_json(),
            "partial_sums": self.partial_sums.to_json(),
        }


def series_trend(log_terms, finite_support: bool = False, count: int = DEFAULT_SAMPLES) -> SeriesReport:
    lt = np.asarray(log_terms)
    sums = log_cumsum_exp(lt)
    terms = sequence_trend(lt, count=count)
    partial = sequence_trend(sums, count=count)
    if finite_support:
        cls = "convergent"
    elif terms.nonvanishing:
        cls = "divergent"
    elif terms.vanishing and terms.tail_slope <= -(1 + SERIES_MARGIN):
        cls = "convergent"
    elif terms.tail_monotone == "decreasing" and terms.tail_slope >= -(1 - SERIES_MARGIN):
        cls = "divergent"
    else:
        lv = np.array([v for _, v in partial.samples])
        half = lv[len(lv) // 2:]
        settled = len(lv) >= 4 and (half[-1] - half[0]) <= BAND and terms.vanishing
        cls = "convergent" if settled else "unknown"
    return SeriesReport(cls, terms, partial, float(sums[-1]), finite_support)
