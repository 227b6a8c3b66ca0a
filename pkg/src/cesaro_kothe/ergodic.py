"""Iterates and Cesàro means of C, the ergodic projection, and the closed-range check.

The means ``T_[k] x = (1/k) sum_{j=1}^{k} C^j x`` converge to ``P x = x_1 * (1, 1, ...)``.
On ``{x : x_1 = 0}`` the operator ``I - C`` is conjugate (through the left shift)
to the lower triangular ``T`` with ``T_ii = i/(i+1)`` and ``T_ij = -1/(i+1)``,
whose inverse ``R`` has ``r_ii = (i+1)/i`` and ``r_ij = 1/j`` below the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .criteria import Status, Verdict, Witness, check_vanishing_and_normability
from .kernel import SequenceVector, _window, cesaro_apply, real_divide, seminorm
from .trend import TrendReport, log_cumsum_exp, sequence_trend
from .weights import LD, WeightFamily

__all__ = [
    "DEFAULT_SCHEDULE",
    "power_iterate",
    "cesaro_means",
    "ergodic_projection",
    "make_vector",
    "ErgodicRun",
    "run_ergodic",
    "r_matrix_entry",
    "t_matrix_entry",
    "r_matrix",
    "t_matrix",
    "verify_closed_range",
    "NON_SUPERCYCLIC_NOTE",
]

DEFAULT_SCHEDULE = (1, 3, 10, 31, 100, 316, 1000)
POWER_SLACK = 1e-14
NON_SUPERCYCLIC_NOTE = (
    "C is power bounded and mean ergodic, hence not supercyclic (and not hypercyclic); "
    "stated, not tested by orbit experiments"
)
UNIFORMITY_NOTE = "convergence is checked on finitely many vectors; uniformity over bounded sets is not verifiable here"


def power_iterate(x: SequenceVector, k: int) -> SequenceVector:
    """``C^k x`` by k applications of the prefix-average kernel."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    for _ in range(k):
        x = cesaro_apply(x)
    return x


def cesaro_means(x: SequenceVector, k: int) -> SequenceVector:
    """``(1/k) sum_{j=1}^{k} C^j x`` in one pass."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cur = x
    acc = None
    for _ in range(k):
        cur = cesaro_apply(cur)
        acc = cur.entries.copy() if acc is None else acc + cur.entries
    return SequenceVector(real_divide(acc, k), x.tail_truncated)


def ergodic_projection(x: SequenceVector) -> SequenceVector:
    """``P x = x_1 * (1, ..., 1)``: projection onto the fixed space along ``{x_1 = 0}``."""
    out = np.empty_like(x.entries)
    out[:] = x.entries[0]
    return SequenceVector(out, False)


def make_vector(spec: str, N: int, exact: bool = False) -> SequenceVector:
    """Vectors by name: ``e1``, ``e<j>``/``ej:<j>``, ``ones``, ``random:<seed>``."""
    spec = spec.strip().lower()
    if spec in ("ones", "one", "1"):
        return SequenceVector.ones(N, exact)
    if spec.startswith("random"):
        seed = int(spec.split(":", 1)[1]) if ":" in spec else 0
        vals = np.random.default_rng(seed).uniform(-1, 1, N)
        return SequenceVector.from_values(vals, exact)
    if spec.startswith("ej:"):
        return SequenceVector.unit(int(spec[3:]), N, exact)
    if spec.startswith("e") and spec[1:].isdigit():
        return SequenceVector.unit(int(spec[1:]), N, exact)
    raise ValueError(f"unknown vector spec {spec!r}; use e1, e<j>, ones or random:<seed>")


@dataclass(frozen=True)
class ErgodicRun:
    """``p_n(T_[k] x - P x)`` along a k schedule, plus power-bound checks ``p_n(C^k x) <= p_n(x)``."""

    family: str
    params: dict
    x_spec: str
    N: int
    n_values: tuple
    k_schedule: tuple
    values: dict  # n -> tuple of p_n(T_[k] x - P x) along the schedule
    power_ratios: dict  # n -> tuple of p_n(C^k x) / p_n(x)
    power_violations: int
    status: Status
    trend: TrendReport | None = None
    notes: tuple = ()

    def __post_init__(self):
        ks = self.k_schedule
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("k schedule must increase strictly")
        if any(v < 0 for vals in self.values.values() for v in vals):
            raise ValueError("seminorm values are nonnegative")

    def rows(self):
        """``(k, n, value)`` records, ordered by n then k."""
        for n in self.n_values:
            for k, v in zip(self.k_schedule, self.values[n]):
                yield k, n, v

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": {k: v if isinstance(v, (int, float, str, bool)) else str(v) for k, v in self.params.items()},
            "x": self.x_spec,
            "N": self.N,
            "k_schedule": list(self.k_schedule),
            "values": {str(n): list(v) for n, v in self.values.items()},
            "power_bound_violations": self.power_violations,
            "status": self.status.value,
            "trend": self.trend.to_json() if self.trend else None,
            "notes": list(self.notes),
        }


def run_ergodic(family: WeightFamily, x_spec="e1", n_max: int = 1, k_schedule=DEFAULT_SCHEDULE,
                window=400) -> ErgodicRun:
    """Follow the Cesàro means of ``x`` toward ``P x`` in the seminorms ``p_1..p_{n_max}``.

    Holds when every recorded sequence is nonincreasing and either identically
    zero or reduced by a factor of at least 10 from the first to the last k.
    """
    N = _window(window)
    ks = tuple(sorted(set(int(k) for k in k_schedule)))
    if not ks or ks[0] < 1:
        raise ValueError("k schedule must contain positive integers")
    notes = [NON_SUPERCYCLIC_NOTE, UNIFORMITY_NOTE]
    van = check_vanishing_and_normability(family, n_max=max(n_max, 2), window=N)
    if not van.holds:
        notes.append(f"warning: a_n(i) -> 0 is {van.status.value} on the window; the constant vector may not lie in the space")
    x = x_spec if isinstance(x_spec, SequenceVector) else make_vector(str(x_spec), N)
    label = x_spec if isinstance(x_spec, str) else "custom"
    px = ergodic_projection(x).entries
    ns = tuple(range(1, n_max + 1))
    base = {n: seminorm(family, n, x) for n in ns}
    values = {n: [] for n in ns}
    ratios = {n: [] for n in ns}
    violations = 0
    cur = x
    acc = np.zeros(N, dtype=x.entries.dtype)
    want = set(ks)
    for k in range(1, ks[-1] + 1):
        cur = cesaro_apply(cur)
        acc = acc + cur.entries
        if k in want:
            diff = SequenceVector(real_divide(acc, k) - px)
            for n in ns:
                values[n].append(seminorm(family, n, diff))
                pn = seminorm(family, n, cur)
                ratios[n].append(pn / base[n] if base[n] > 0 else 0.0)
                if pn - base[n] > POWER_SLACK * max(1.0, base[n]):
                    violations += 1
    ok = True
    for n in ns:
        v = values[n]
        if all(t == 0 for t in v):
            continue
        nonincreasing = all(b <= a for a, b in zip(v, v[1:]))
        ok = ok and nonincreasing and v[0] > 0 and v[-1] / v[0] <= 0.1
    trend = None
    v1 = values[ns[0]]
    if len(v1) >= 4 and any(t > 0 for t in v1):
        with np.errstate(divide="ignore"):
            trend = sequence_trend(np.log(np.asarray(v1, dtype=LD)), note="means along the k schedule")
    status = Status.HOLDS if ok and violations == 0 else Status.INCONCLUSIVE
    if violations:
        status = Status.FAILS
    return ErgodicRun(
        family=family.name,
        params=dict(family.params),
        x_spec=label,
        N=N,
        n_values=ns,
        k_schedule=ks,
        values={n: tuple(v) for n, v in values.items()},
        power_ratios={n: tuple(v) for n, v in ratios.items()},
        power_violations=violations,
        status=status,
        trend=trend,
        notes=tuple(notes),
    )


# --- closed range ----------------------------------------------------------------

def r_matrix_entry(i: int, j: int) -> Fraction:
    """``r_ii = (i+1)/i``, ``r_ij = 1/j`` for ``j < i``, zero above the diagonal."""
    if i < 1 or j < 1:
        raise ValueError("indices are 1-based")
    if j > i:
        return Fraction(0)
    if i == j:
        return Fraction(i + 1, i)
    return Fraction(1, j)


def t_matrix_entry(i: int, j: int) -> Fraction:
    """``(I - C)`` with both indices shifted by one: ``i/(i+1)`` on the diagonal, ``-1/(i+1)`` below."""
    if j > i:
        return Fraction(0)
    if i == j:
        return Fraction(i, i + 1)
    return Fraction(-1, i + 1)


def _dense(entry, N):
    M = np.empty((N, N), dtype=object)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            M[i - 1, j - 1] = entry(i, j)
    return M


def r_matrix(N: int) -> np.ndarray:
    return _dense(r_matrix_entry, N)


def t_matrix(N: int) -> np.ndarray:
    return _dense(t_matrix_entry, N)


def _is_identity(M) -> bool:
    N = M.shape[0]
    return all(M[i, j] == (1 if i == j else 0) for i in range(N) for j in range(N))


def verify_closed_range(family: WeightFamily, n: int, m: int, window=4096, exact_N: int = 30) -> Verdict:
    """Bijectivity of ``I - C`` on ``{x_1 = 0}`` and continuity of its inverse in the weighted norms.

    Checks ``T R = R T = I`` exactly on an ``exact_N`` section, then for
    ``D_ij = (a_n(i+1)/a_m(j+1)) r_ij``: decay of column 1 and the row-sum bound
    ``(i+1) a_n(i+1)/a_m(i+1) -> 0``.
    """
    if m <= n:
        raise ValueError("m must exceed n")
    N = _window(window)
    M = min(exact_N, 30)
    T, R = t_matrix(M), r_matrix(M)
    tr_ok = _is_identity(T.dot(R))
    rt_ok = _is_identity(R.dot(T))
    rows_n = family.row(n, N + 1)[1:]  # log a_n(i+1), i = 1..N
    rows_m = family.row(m, N + 1)[1:]
    log_i = np.log(np.arange(1, N + 1, dtype=LD))
    bound = np.log(np.arange(2, N + 2, dtype=LD)) + rows_n - rows_m
    col = rows_n[1:] - rows_m[0]  # r_i1 = 1 for i >= 2
    # sum_{j<i} exp(-log a_m(j+1) - log j) + exp(-log a_m(i+1) + log((i+1)/i))
    below = log_cumsum_exp(-rows_m - log_i)
    diag = -rows_m + np.log1p(1 / np.arange(1, N + 1, dtype=LD))
    total = diag.copy()
    total[1:] = np.logaddexp(below[:-1], diag[1:])
    row_sums = rows_n + total
    bound_tr = sequence_trend(bound, note="(i+1) a_n(i+1)/a_m(i+1)")
    col_tr = sequence_trend(col, note="column 1", offset=1)
    rows_tr = sequence_trend(row_sums, note="row sums of D_mn")
    details = {
        "T_R_identity": tr_ok,
        "R_T_identity": rt_ok,
        "exact_N": M,
        "bound": bound_tr.classification,
        "column_1": col_tr.classification,
        "row_sums": rows_tr.classification,
        "row_sum_le_bound": bool(np.all(row_sums <= bound + 1e-12)),
    }
    anchor = "I - C has closed range: R = T^{-1} with weighted row-sum bound (i+1) a_n(i+1)/a_m(i+1)"
    fam = dict(family=family.name, params=dict(family.params), anchor=anchor, details=details)
    if not (tr_ok and rt_ok):
        return Verdict(criterion="closed-range", status=Status.FAILS,
                       counterexample={"exact_identity": False, "N": M}, **fam)
    if bound_tr.vanishing and col_tr.vanishing:
        return Verdict(criterion="closed-range", status=Status.HOLDS, trend=bound_tr,
                       witness=(Witness(n, m, rows_tr.log_sup, (1, N)),), **fam)
    if bound_tr.nonvanishing:
        return Verdict(criterion="closed-range", status=Status.FAILS, trend=bound_tr,
                       counterexample={"bound": bound_tr.classification, "m": m}, **fam)
    return Verdict(criterion="closed-range", status=Status.INCONCLUSIVE, trend=bound_tr, **fam)
