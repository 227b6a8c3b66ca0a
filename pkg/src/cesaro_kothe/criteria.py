"""Verdict engine for the structural criteria on a Köthe matrix.

Every criterion of the form "for all n there is m with sup_i (...) < infinity"
(or a limit statement) is evaluated on the window ``1..N`` with an explicit
witness search over ``m in (n, n + m_search]``. Outcomes are three-valued:
``Holds`` carries a witness, ``Fails`` a counterexample or a certified
divergence, ``Inconclusive`` the trend that blocked certification.
See :mod:`cesaro_kothe.trend` for the classification rules.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import TruncationWindow
from .trend import TrendReport, SeriesReport, log_cumsum_exp, sequence_trend, series_trend
from .weights import LD, WeightEvaluationError, WeightFamily, custom_family

__all__ = [
    "Status",
    "Witness",
    "Verdict",
    "SnReport",
    "SnMonotonicityError",
    "RegularizationError",
    "Regularization",
    "check_kothe",
    "check_g1",
    "check_vanishing_and_normability",
    "check_regular",
    "check_continuity_cesaro",
    "check_compactness_cesaro",
    "check_continuity_diff",
    "check_nuclearity",
    "check_invertibility",
    "check_point_spectrum_membership",
    "point_spectrum_memberships",
    "compute_sn",
    "regularize",
    "knopp_check",
    "theorem_consistency",
    "DEFAULT_N",
    "DEFAULT_N_MAX",
    "DEFAULT_M_SEARCH",
]

DEFAULT_N = 4096
DEFAULT_N_MAX = 5
DEFAULT_M_SEARCH = 12
SAFETY = 1.01


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Witness:
    """Evidence for one ``n``: the index ``m`` and the observed constant.

    ``bound`` is ``exp(log_sup) * 1.01``; ``log_sup`` keeps the value when the
    constant itself overflows a double.
    """

    n: int | None
    m: int | None
    log_sup: float | None
    i_range: tuple

    @property
    def observed(self) -> float | None:
        if self.log_sup is None:
            return None
        return _safe_exp(self.log_sup)

    @property
    def bound(self) -> float | None:
        if self.log_sup is None:
            return None
        return _safe_exp(self.log_sup) * SAFETY

    def to_json(self) -> dict:
        out = {"n": self.n, "m": self.m, "i_range": list(self.i_range)}
        if self.log_sup is not None:
            out["log_sup"] = _jf(self.log_sup)
            b = self.bound
            out["bound"] = b if math.isfinite(b) else None
        return out


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _jf(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


@dataclass(frozen=True)
class Verdict:
    criterion: str
    family: str
    params: dict
    status: Status
    witness: tuple = ()
    counterexample: dict | None = None
    trend: TrendReport | None = None
    anchor: str = ""
    notes: tuple = ()
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status is Status.HOLDS and not self.witness:
            raise ValueError(f"{self.criterion}: a Holds verdict needs a witness")
        if self.status is Status.FAILS and self.counterexample is None and not (self.trend and self.trend.diverges):
            raise ValueError(f"{self.criterion}: a Fails verdict needs a counterexample or a divergence trend")

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    def witness_for(self, n: int) -> Witness | None:
        for w in self.witness:
            if w.n == n:
                return w
        return None

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "family": self.family,
            "params": _json_params(self.params),
            "status": self.status.value,
            "witness": [w.to_json() for w in self.witness] or None,
            "counterexample": self.counterexample,
            "trend": self.trend.to_json() if self.trend else None,
            "anchor": self.anchor,
            "notes": list(self.notes),
            "details": self.details,
        }


def _json_params(params) -> dict:
    out = {}
    for k, v in dict(params).items():
        out[k] = v if isinstance(v, (int, float, str, bool, type(None))) else str(v)
    return out


def _N(window) -> int:
    if isinstance(window, TruncationWindow):
        return window.N
    return TruncationWindow(int(window)).N


def _log_i(N: int) -> np.ndarray:
    return np.log(np.arange(1, N + 1, dtype=LD))


def _max_row(family: WeightFamily, wanted: int) -> int:
    return wanted if family.n_limit is None else min(wanted, family.n_limit)


def _verdict(criterion, family, status, anchor, **kw) -> Verdict:
    return Verdict(criterion=criterion, family=family.name, params=dict(family.params), status=status, anchor=anchor, **kw)


def _combine(statuses) -> Status:
    statuses = list(statuses)
    if any(s is Status.FAILS for s in statuses):
        return Status.FAILS
    if any(s is Status.INCONCLUSIVE for s in statuses):
        return Status.INCONCLUSIVE
    return Status.HOLDS


# --- generic quantifier drivers ---------------------------------------------

def _forall_exists_bounded(family, n_max, m_search, N, seq_fn, criterion, anchor, notes=()):
    """For each n find the first m in (n, n + m_search] whose sequence is tail-bounded."""
    n_top = _max_row(family, n_max)
    witnesses, per_n = [], {}
    failed, unknown = [], []
    rep = {}
    for n in range(1, n_top + 1):
        classes = {}
        found = None
        last = None
        for m in range(n + 1, _max_row(family, n + m_search) + 1):
            try:
                lv = seq_fn(n, m)
            except (WeightEvaluationError, FloatingPointError, OverflowError) as exc:
                classes[m] = f"error: {exc}"
                continue
            if not np.all(np.isfinite(lv[np.logical_not(np.isneginf(lv))])):
                classes[m] = "overflow"
                continue
            tr = sequence_trend(lv)
            classes[m] = tr.classification
            last = tr
            if found is None and tr.bounded:
                found = (m, tr)
        per_n[n] = {"classes": {str(k): v for k, v in classes.items()}}
        if found is not None:
            m, tr = found
            witnesses.append(Witness(n, m, tr.log_sup, (1, tr.N)))
            per_n[n]["witness_m"] = m
            per_n[n]["succeeding_m"] = [k for k, c in classes.items() if c in ("bounded", "vanishing")]
            rep.setdefault("holds", tr)
        elif classes and all(c == "divergent" for c in classes.values()):
            failed.append(n)
            rep.setdefault("fails", last)
        else:
            unknown.append(n)
            if last is not None:
                rep.setdefault("unknown", last)
    if n_top < 1 or not per_n:
        return _verdict(criterion, family, Status.INCONCLUSIVE, anchor, notes=("no rows available",))
    details = {"per_n": {str(k): v for k, v in per_n.items()}, "N": N, "m_search": m_search}
    if failed:
        n0 = failed[0]
        return _verdict(
            criterion, family, Status.FAILS, anchor,
            witness=tuple(witnesses),
            counterexample={"n": n0, "reason": f"every m in ({n0}, {n0 + m_search}] diverges",
                            "classes": per_n[n0]["classes"]},
            trend=rep.get("fails"), notes=tuple(notes), details=details,
        )
    if unknown:
        return _verdict(
            criterion, family, Status.INCONCLUSIVE, anchor,
            witness=tuple(witnesses), trend=rep.get("unknown"),
            notes=tuple(notes) + (f"no certified witness for n in {unknown}",), details=details,
        )
    return _verdict(criterion, family, Status.HOLDS, anchor, witness=tuple(witnesses),
                    trend=rep.get("holds"), notes=tuple(notes), details=details)


def _forall_vanishing(family, n_max, N, seq_fn, criterion, anchor, notes=()):
    """Holds iff every n <= n_max gives a certified limit of zero."""
    n_top = _max_row(family, n_max)
    per_n, bad, unknown, trends = {}, [], [], {}
    for n in range(1, n_top + 1):
        tr = sequence_trend(seq_fn(n))
        trends[n] = tr
        per_n[str(n)] = {"class": tr.classification, "plateau": tr.plateau}
        if tr.vanishing:
            continue
        if tr.nonvanishing:
            bad.append(n)
        else:
            unknown.append(n)
    details = {"per_n": per_n, "N": N}
    if bad:
        n0 = bad[0]
        tr = trends[n0]
        return _verdict(
            criterion, family, Status.FAILS, anchor,
            counterexample={"n": n0, "class": tr.classification, "plateau": tr.plateau,
                            "log_value_at_N": _jf(tr.samples[-1][1])},
            trend=tr, notes=tuple(notes), details=details,
        )
    if unknown:
        return _verdict(criterion, family, Status.INCONCLUSIVE, anchor, trend=trends[unknown[0]],
                        notes=tuple(notes) + (f"limit not certified for n in {unknown}",), details=details)
    w = tuple(Witness(n, None, trends[n].log_sup, (1, N)) for n in trends)
    return _verdict(criterion, family, Status.HOLDS, anchor, witness=w, trend=trends[n_top],
                    notes=tuple(notes), details=details)


# --- Köthe, G1, vanishing, regularity -----------------------------------------

def check_kothe(family: WeightFamily, n_max: int = DEFAULT_N_MAX, window=DEFAULT_N) -> Verdict:
    """(K1) ``a_n(i) <= a_{n+1}(i)`` and positivity on the window, rows ``1..n_max``."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    N = _N(window)
    anchor = "Köthe matrix conditions (K1)-(K2)"
    n_top = _max_row(family, n_max)
    try:
        rows = {n: family.row(n, N) for n in range(1, n_top + 1)}
    except WeightEvaluationError as exc:
        return _verdict("kothe", family, Status.FAILS, anchor,
                        counterexample={"n": exc.n, "i": exc.i, "reason": "weight not strictly positive/finite"})
    violations = {}
    for n in range(1, n_top):
        bad = np.flatnonzero(rows[n + 1] < rows[n]) + 1
        if bad.size:
            violations[n] = bad.tolist()
    if not violations:
        return _verdict("kothe", family, Status.HOLDS, anchor,
                        witness=(Witness(None, n_top, None, (1, N)),), details={"N": N, "n_max": n_top})
    finite = all(max(v) <= N // 2 for v in violations.values())
    notes = []
    if finite:
        notes.append(
            "violations confined to small i in every row: rescaling each row by a constant > 1 "
            "restores (K1) without changing the space"
        )
    return _verdict(
        "kothe", family, Status.FAILS, anchor,
        counterexample={"violations": {str(k): v for k, v in violations.items()},
                        "max_violating_i": {str(k): max(v) for k, v in violations.items()},
                        "finitely_many": finite},
        notes=tuple(notes), details={"N": N, "n_max": n_top},
    )


def _check_g1_1(family, n_max, N) -> Verdict:
    anchor = "(G1-1): a_n(i+1) <= a_n(i)"
    violations = {}
    n_top = _max_row(family, n_max)
    for n in range(1, n_top + 1):
        r = family.row(n, N)
        bad = np.flatnonzero(r[1:] > r[:-1]) + 1
        if bad.size:
            violations[str(n)] = bad[:20].tolist()
    if violations:
        return _verdict("g1-1", family, Status.FAILS, anchor, counterexample={"increasing_at_i": violations})
    return _verdict("g1-1", family, Status.HOLDS, anchor, witness=(Witness(None, None, None, (1, N)),),
                    details={"N": N, "n_max": n_top})


def check_g1(family: WeightFamily, n_max: int = DEFAULT_N_MAX, m_search: int = DEFAULT_M_SEARCH,
             window=DEFAULT_N) -> tuple[Verdict, Verdict]:
    """(G1-1) monotonicity in i and (G1-2) ``a_n <= C a_m^2`` with witness search."""
    N = _N(window)
    v1 = _check_g1_1(family, n_max, N)

    def seq(n, m):
        return family.row(n, N) - 2 * family.row(m, N)

    v2 = _forall_exists_bounded(family, n_max, m_search, N, seq, "g1-2", "(G1-2): a_n(i) <= C a_m(i)^2")
    return v1, v2


def g1_holds(family, n_max=DEFAULT_N_MAX, m_search=DEFAULT_M_SEARCH, window=DEFAULT_N) -> bool:
    v1, v2 = check_g1(family, n_max, m_search, window)
    return v1.holds and v2.holds


def check_vanishing_and_normability(family: WeightFamily, n_max: int = DEFAULT_N_MAX, window=DEFAULT_N) -> Verdict:
    """Dichotomy under (G1-1): every ``a_n(i) -> 0`` (Holds) or some row has a positive limit (Fails: normable)."""
    N = _N(window)
    anchor = "G1-1 dichotomy: normable (isomorphic to c0) or a_n(i) -> 0 for all n"
    notes = []
    if not _check_g1_1(family, n_max, N).holds:
        notes.append("warning: (G1-1) fails on the window; the dichotomy assumes it")
    n_top = _max_row(family, n_max)
    per_n, trends = {}, {}
    normable_at = None
    unknown = []
    for n in range(1, n_top + 1):
        tr = sequence_trend(family.row(n, N))
        trends[n] = tr
        per_n[str(n)] = tr.classification
        if tr.classification == "bounded" and tr.plateau and normable_at is None:
            normable_at = n
        elif not tr.vanishing:
            unknown.append(n)
    details = {"per_n": per_n, "N": N}
    if normable_at is not None:
        tr = trends[normable_at]
        limit = _safe_exp(tr.samples[-1][1])
        details["classification"] = "normable"
        return _verdict("vanishing", family, Status.FAILS, anchor, trend=tr,
                        counterexample={"n0": normable_at, "limit_estimate": limit},
                        notes=tuple(notes) + ("normable: p_n0 alone defines the topology",), details=details)
    if unknown:
        details["classification"] = "inconclusive"
        return _verdict("vanishing", family, Status.INCONCLUSIVE, anchor, trend=trends[unknown[0]],
                        notes=tuple(notes) + (f"limit not certified for n in {unknown}",), details=details)
    details["classification"] = "vanishing"
    return _verdict("vanishing", family, Status.HOLDS, anchor, trend=trends[n_top],
                    witness=tuple(Witness(n, None, trends[n].log_sup, (1, N)) for n in trends),
                    notes=tuple(notes), details=details)


def check_regular(family: WeightFamily, n_max: int = DEFAULT_N_MAX, window=DEFAULT_N) -> Verdict:
    """``a_n(i)/a_{n+1}(i)`` nonincreasing in i for every ``n < n_max``."""
    N = _N(window)
    anchor = "regular Köthe matrix: a_n/a_{n+1} nonincreasing"
    n_top = _max_row(family, n_max)
    violations = {}
    for n in range(1, n_top):
        d = family.row(n, N) - family.row(n + 1, N)
        bad = np.flatnonzero(d[1:] > d[:-1]) + 1
        if bad.size:
            violations[str(n)] = bad[:20].tolist()
    if violations:
        return _verdict("regular", family, Status.FAILS, anchor,
                        counterexample={"ratio_increases_after_i": violations})
    return _verdict("regular", family, Status.HOLDS, anchor, witness=(Witness(None, None, None, (1, N)),),
                    details={"N": N, "n_max": n_top})


# --- operator criteria ---------------------------------------------------------

def _continuity_seq(family, N):
    log_i = _log_i(N)

    def seq(n, m):
        return family.row(n, N) - log_i + log_cumsum_exp(-family.row(m, N))

    return seq


def check_continuity_cesaro(family: WeightFamily, n_max: int = DEFAULT_N_MAX, m_search: int = DEFAULT_M_SEARCH,
                            window=DEFAULT_N) -> Verdict:
    """C continuous iff for all n some m gives bounded ``(a_n(i)/i) sum_{j<=i} 1/a_m(j)``."""
    N = _N(window)
    notes = ()
    if _check_g1_1(family, n_max, N).holds:
        notes = ("(G1-1) holds: the sequence is at most a_n(i)/a_m(i) <= 1 for every m > n",)
    return _forall_exists_bounded(family, n_max, m_search, N, _continuity_seq(family, N), "continuity",
                                  "continuity of C: (a_n(i)/i) sum_{j<=i} 1/a_m(j) bounded", notes)


def check_compactness_cesaro(family: WeightFamily, n_max: int = DEFAULT_N_MAX, m_search: int = DEFAULT_M_SEARCH,
                             window=DEFAULT_N) -> Verdict:
    """C compact iff one m makes ``(a_n(i)/i) sum_{j<=i} 1/a_m(j)`` vanish for *every* n.

    The quantifier order (exists m, for all n) is kept as stated; a finite
    check therefore also tests ``n = m`` and ``n = m + 1`` for each candidate m,
    since ``n <= n_max`` alone would let any ``m > n_max`` pass.
    """
    N = _N(window)
    anchor = "compactness of C: exists m, for all n, (a_n(i)/i) sum_{j<=i} 1/a_m(j) -> 0"
    seq = _continuity_seq(family, N)
    per_m = {}
    found = None
    certified_fail = []
    for m in range(1, _max_row(family, n_max + m_search) + 1):
        n_hi = _max_row(family, max(n_max, m + 1))
        classes, bad_n = {}, None
        ok = True
        for n in range(1, n_hi + 1):
            tr = sequence_trend(seq(n, m))
            classes[str(n)] = tr.classification + ("/plateau" if tr.plateau else "")
            if not tr.vanishing:
                ok = False
                if tr.nonvanishing and bad_n is None:
                    bad_n = (n, tr)
        per_m[str(m)] = classes
        if ok and found is None:
            found = m
        if not ok and bad_n is not None:
            certified_fail.append((m, bad_n))
    note = ("quantifier order exists-m/for-all-n differs from continuity (for-all-n/exists-m); "
            "each candidate m is also tested at n = m and n = m + 1",)
    details = {"per_m": per_m, "N": N}
    if found is not None:
        return _verdict("compactness", family, Status.HOLDS, anchor,
                        witness=(Witness(None, found, None, (1, N)),), notes=note, details=details)
    if len(certified_fail) == len(per_m):
        m0, (n0, tr) = certified_fail[0]
        return _verdict("compactness", family, Status.FAILS, anchor, trend=tr,
                        counterexample={str(m): {"n": n, "class": t.classification} for m, (n, t) in certified_fail},
                        notes=note, details=details)
    return _verdict("compactness", family, Status.INCONCLUSIVE, anchor, notes=note, details=details)


def check_continuity_diff(family: WeightFamily, n_max: int = DEFAULT_N_MAX, m_search: int = DEFAULT_M_SEARCH,
                          window=DEFAULT_N) -> Verdict:
    """Formal differentiation D continuous iff ``i a_n(i) <= M a_m(i+1)``."""
    N = _N(window)
    log_i = _log_i(N)[:-1]

    def seq(n, m):
        return log_i + family.row(n, N)[:-1] - family.row(m, N)[1:]

    return _forall_exists_bounded(family, n_max, m_search, N, seq, "diff-continuity",
                                  "continuity of D: i a_n(i) <= M a_m(i+1)")


@functools.lru_cache(maxsize=256)
def _power_ratio_search(family, alpha, n_max, m_search, N) -> Verdict:
    log_i = _log_i(N)
    a = LD(alpha)

    def seq(n, m):
        return a * log_i + family.row(n, N) - family.row(m, N)

    return _forall_exists_bounded(family, n_max, m_search, N, seq, "power-ratio",
                                  f"sup_i i^{alpha:g} a_n(i)/a_m(i) < infinity")


def _retag(v: Verdict, criterion: str, anchor: str, notes=(), details=None, status=None) -> Verdict:
    return Verdict(criterion=criterion, family=v.family, params=v.params, status=status or v.status,
                   witness=v.witness, counterexample=v.counterexample, trend=v.trend, anchor=anchor,
                   notes=v.notes + tuple(notes), details=details if details is not None else v.details)


def check_nuclearity(family: WeightFamily, n_max: int = DEFAULT_N_MAX, m_search: int = DEFAULT_M_SEARCH,
                     window=DEFAULT_N, alpha: float = 1.0) -> Verdict:
    """Nuclearity of a G1 space through ``sup_i i^alpha a_n(i)/a_m(i) < infinity``.

    Also runs the Grothendieck-Pietsch sums ``sum_i a_n(i)/a_m(i)``; Holds needs
    both routes to agree.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    N = _N(window)
    anchor = f"nuclearity: for all n exists m, sup_i i^{alpha:g} a_n(i)/a_m(i) < infinity (Grothendieck-Pietsch)"
    sup = _power_ratio_search(family, float(alpha), n_max, m_search, N)
    gp = {}
    gp_ok = True
    for n in range(1, _max_row(family, n_max) + 1):
        first = None
        classes = {}
        for m in range(n + 1, _max_row(family, n + m_search) + 1):
            rep = series_trend(family.row(n, N) - family.row(m, N))
            classes[str(m)] = rep.classification
            if first is None and rep.classification == "convergent":
                first = m
        gp[str(n)] = {"first_convergent_m": first, "classes": classes}
        gp_ok = gp_ok and first is not None
    details = dict(sup.details)
    details["grothendieck_pietsch"] = gp
    if sup.status is Status.HOLDS and not gp_ok:
        return _retag(sup, "nuclearity", anchor, details=details, status=Status.INCONCLUSIVE,
                      notes=("sup criterion holds but Grothendieck-Pietsch sums are not certified convergent",))
    return _retag(sup, "nuclearity", anchor, details=details)


def check_invertibility(family: WeightFamily, n_max: int = DEFAULT_N_MAX, m_search: int = DEFAULT_M_SEARCH,
                        window=DEFAULT_N) -> Verdict:
    """``0`` outside the spectrum of C iff ``sup_i i a_n(i)/a_m(i) < infinity``; shares the nuclearity search."""
    N = _N(window)
    sup = _power_ratio_search(family, 1.0, n_max, m_search, N)
    return _retag(sup, "invertibility", "0 not in spectrum of C: for all n exists m, sup_i i a_n(i)/a_m(i) < infinity")


def check_point_spectrum_membership(family: WeightFamily, s: int, n_max: int = DEFAULT_N_MAX,
                                    window=DEFAULT_N) -> Verdict:
    """``1/s`` is an eigenvalue of C iff ``i^{s-1} a_n(i) -> 0`` for every n."""
    if s < 1:
        raise ValueError("s must be a positive integer")
    N = _N(window)
    shift = LD(s - 1) * _log_i(N)
    v = _forall_vanishing(family, n_max, N, lambda n: shift + family.row(n, N), f"eigenvalue 1/{s}",
                          f"1/{s} in point spectrum of C iff i^{s - 1} a_n(i) -> 0 for all n")
    v.details["s"] = int(s)
    return v


def point_spectrum_memberships(family: WeightFamily, s_values=range(1, 9), n_max: int = DEFAULT_N_MAX,
                               window=DEFAULT_N) -> dict:
    """Membership of ``1/s`` for each s, with the monotone implications filled in.

    ``(i^{s-1}) in the space`` implies the same for smaller s, so a certified
    failure at s settles every larger s and a success settles every smaller one.
    """
    s_values = sorted(int(s) for s in s_values)
    out = {s: check_point_spectrum_membership(family, s, n_max, window) for s in s_values}
    holds = [s for s in s_values if out[s].holds]
    fails = [s for s in s_values if out[s].fails]
    if holds and fails and min(fails) < max(holds):
        raise ValueError(f"membership not monotone: 1/{min(fails)} fails but 1/{max(holds)} holds")
    for s in s_values:
        v = out[s]
        if v.status is not Status.INCONCLUSIVE:
            continue
        below = [t for t in fails if t < s]
        above = [t for t in holds if t > s]
        if below:
            out[s] = _retag(v, v.criterion, v.anchor, status=Status.FAILS,
                            notes=(f"implied: 1/{below[0]} is not an eigenvalue",))
            object.__setattr__(out[s], "counterexample", {"implied_by_s": below[0]})
        elif above:
            out[s] = _retag(v, v.criterion, v.anchor, status=Status.HOLDS,
                            notes=(f"implied: 1/{above[-1]} is an eigenvalue",))
            object.__setattr__(out[s], "witness", out[above[-1]].witness)
    return out


# --- S_n sets --------------------------------------------------------------------

class SnMonotonicityError(ValueError):
    pass


@dataclass(frozen=True)
class SnReport:
    """Membership of exponents s in ``S_n = {s : sum_i 1/(i^s a_n(i)) < infinity}``."""

    n: int
    statuses: tuple  # ((s, 'member' | 'non-member' | 'inconclusive'), ...), increasing s
    s0_estimate: float | None
    bracket: tuple | None
    series: dict = field(default_factory=dict, repr=False)
    notes: tuple = ()

    def __post_init__(self):
        seen_member = False
        for s, st in self.statuses:
            if st == "member":
                seen_member = True
            elif st == "non-member" and seen_member:
                raise SnMonotonicityError(f"S_{self.n}: s={s} is a non-member above a member")

    @property
    def nonempty(self) -> bool:
        return any(st == "member" for _, st in self.statuses)

    def status_of(self, s: float) -> str:
        for t, st in self.statuses:
            if math.isclose(t, s):
                return st
        raise KeyError(s)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "statuses": [[s, st] for s, st in self.statuses],
            "s0_estimate": self.s0_estimate,
            "bracket": list(self.bracket) if self.bracket else None,
            "notes": list(self.notes),
        }


def compute_sn(family: WeightFamily, n: int, s_grid, window=DEFAULT_N) -> SnReport:
    """Classify each grid exponent and bracket ``s_0(n) = inf S_n``.

    Direct evidence comes from the series test; two implications are added:
    bounded terms at t put every ``s > t + 2`` in ``S_n``, and under (G1-1) with
    ``a_n <= 1`` eventually every ``s <= 1`` is excluded.
    """
    s_grid = sorted(float(s) for s in s_grid)
    if not s_grid or any(s <= 0 for s in s_grid):
        raise ValueError("s_grid must be a nonempty set of positive values")
    N = _N(window)
    log_i = _log_i(N)
    row = family.row(n, N)
    status, series, notes = {}, {}, []
    bounded_at = []
    for s in s_grid:
        rep = series_trend(-LD(s) * log_i - row)
        series[s] = rep
        status[s] = {"convergent": "member", "divergent": "non-member"}.get(rep.classification, "inconclusive")
        if rep.terms.bounded:
            bounded_at.append(s)
    if bounded_at:
        t = min(bounded_at)
        for s in s_grid:
            if s > t + 2 and status[s] == "inconclusive":
                status[s] = "member"
                notes.append(f"s={s:g}: member since terms are bounded at t={t:g} and s > t + 2")
    g1_1 = bool(np.all(row[1:] <= row[:-1])) and row[-1] <= 0
    if g1_1:
        for s in s_grid:
            if s <= 1 and status[s] != "non-member":
                status[s] = "non-member"
                notes.append(f"s={s:g}: excluded since s_0(n) >= 1 under (G1-1)")
    ordered = [(s, status[s]) for s in s_grid]
    # fill the monotone implications
    members = [s for s, st in ordered if st == "member"]
    nonmembers = [s for s, st in ordered if st == "non-member"]
    if members and nonmembers and max(nonmembers) > min(members):
        raise SnMonotonicityError(f"S_{n}: non-member s={max(nonmembers):g} above member s={min(members):g}")
    filled = []
    for s, st in ordered:
        if st == "inconclusive":
            if members and s > min(members):
                st = "member"
            elif nonmembers and s < max(nonmembers):
                st = "non-member"
        filled.append((s, st))
    members = [s for s, st in filled if st == "member"]
    nonmembers = [s for s, st in filled if st == "non-member"]
    bracket, estimate = None, None
    if members:
        hi = min(members)
        lo = max(nonmembers) if nonmembers else (1.0 if g1_1 else None)
        if lo is not None:
            bracket = (lo, hi)
            estimate = (lo + hi) / 2
        else:
            bracket = (None, hi)
            estimate = hi
    return SnReport(n=n, statuses=tuple(filled), s0_estimate=estimate, bracket=bracket,
                    series={f"{s:g}": r.to_json() for s, r in series.items()}, notes=tuple(notes))


# --- regularization ---------------------------------------------------------------

class RegularizationError(ValueError):
    pass


@dataclass(frozen=True)
class Regularization:
    """Regular family ``B`` built from ``A`` plus the transformation record.

    ``row_index[k-1]`` is the original row used as the k-th normalized row.
    ``a_le_b`` / ``b_le_a`` are the two-sided equivalence checks
    ``a_n <= C b_m`` and ``b_n <= D a_m``.
    """

    family: WeightFamily
    row_index: tuple
    normalized: bool
    a_le_b: Verdict | None
    b_le_a: Verdict | None


def _k1_on(family, rows, N):
    prev = family.row(1, N)
    for n in range(2, rows + 1):
        cur = family.row(n, N)
        bad = np.flatnonzero(cur < prev)
        if bad.size:
            raise RegularizationError(f"(K1) fails on the window: a_{n - 1}({bad[0] + 1}) > a_{n}({bad[0] + 1})")
        prev = cur


def regularize(family: WeightFamily, window=1024, normalize: bool = True, n_max: int = DEFAULT_N_MAX,
               m_search: int = DEFAULT_M_SEARCH, diagnostics: bool = True) -> Regularization:
    """``b_n(i) = 1`` for ``i < n`` and ``prod_{j=n}^{i} a~_j(i)`` for ``i >= n``.

    With ``normalize`` the rows are first brought to the form assumed by the
    construction: each row is rescaled by ``1/a_n(n)`` and capped at 1 (so
    ``a~_n(i) = 1`` for ``i <= n``), then a subsequence of rows is chosen with
    ``a~_{n_k} <= a~_{n_{k+1}}^2`` on the window. Without it the raw rows are
    multiplied directly.
    """
    N = _N(window)
    if normalize:
        _k1_on(family, _max_row(family, n_max + m_search), N)
        idx_i = np.arange(1, N + 1)

        def norm_row(j):
            r = family.log_weights(j, idx_i)
            out = np.minimum(r - family.log_weights(j, [j])[0], LD(0))
            out[: min(j, N)] = 0
            return out

        rows = [norm_row(1)]
        index = [1]
        while index[-1] < N:
            cur = index[-1]
            nxt = None
            for j in range(cur + 1, 4 * cur + m_search + 1):
                cand = norm_row(j)
                if np.all(rows[-1] <= 2 * cand):
                    nxt = (j, cand)
                    break
            if nxt is None:
                raise RegularizationError(f"no row j in ({cur}, {4 * cur + m_search}] with a~_{cur} <= a~_j^2")
            index.append(nxt[0])
            rows.append(nxt[1])
        table = np.array(rows, dtype=LD)  # (K, N)
        # suffix sums over k: log b_n(i) = sum_{k=n}^{K} log a~'_k(i); terms with k > i vanish
        suffix = np.cumsum(table[::-1], axis=0)[::-1]
        K = table.shape[0]

        def log_b(n, i):
            ii = i.astype(np.int64)
            if n > K:
                return np.zeros(ii.shape, dtype=LD)
            out = suffix[n - 1, ii - 1].copy()
            out[ii < n] = 0
            return out
    else:
        _k1_on(family, N, N)
        idx_i = np.arange(1, N + 1)
        total = np.zeros(N, dtype=LD)
        for j in range(1, N + 1):
            total[j - 1:] += family.row(j, N)[j - 1:]
        index = list(range(1, N + 1))

        def log_b(n, i):
            ii = i.astype(np.int64)
            acc = total.copy()
            for j in range(1, n):
                acc[j - 1:] -= family.row(j, N)[j - 1:]
            out = acc[ii - 1]
            out[ii < n] = 0
            return out

    b = WeightFamily(
        name=f"regularized({family.name})",
        params={"source": family.name, "normalized": normalize, **dict(family.params)},
        log_fn=log_b,
        i_limit=N,
        anchor="regularized Köthe matrix b_n(i) = prod_{j=n}^{i} a_j(i)",
    )
    a_le_b = b_le_a = None
    if diagnostics:
        a_le_b = _forall_exists_bounded(family, n_max, m_search, N, lambda n, m: family.row(n, N) - b.row(m, N),
                                        "a<=Cb", "a_n(i) <= C b_m(i)")
        b_le_a = _forall_exists_bounded(family, n_max, m_search, N, lambda n, m: b.row(n, N) - family.row(m, N),
                                        "b<=Da", "b_n(i) <= D a_m(i)")
    return Regularization(b, tuple(index), normalize, a_le_b, b_le_a)


def knopp_check(log_c) -> Verdict:
    """A positive nonincreasing sequence with bounded partial sums has ``i c_i -> 0``."""
    lc = np.asarray(log_c, dtype=LD)
    N = lc.shape[0]
    fam = custom_family("sequence", lambda n, i: lc[i.astype(np.int64) - 1], n_limit=1)
    anchor = "positive nonincreasing summable sequence has i c_i -> 0"
    if np.any(lc[1:] > lc[:-1]):
        return _verdict("knopp", fam, Status.INCONCLUSIVE, anchor, notes=("sequence is not nonincreasing",))
    rep = series_trend(lc)
    if rep.classification != "convergent":
        return _verdict("knopp", fam, Status.INCONCLUSIVE, anchor, notes=("partial sums not certified bounded",))
    tr = sequence_trend(_log_i(N) + lc)
    if tr.vanishing:
        return _verdict("knopp", fam, Status.HOLDS, anchor, trend=tr,
                        witness=(Witness(None, None, tr.log_sup, (1, N)),))
    if tr.nonvanishing:
        return _verdict("knopp", fam, Status.FAILS, anchor, trend=tr, counterexample={"class": tr.classification})
    return _verdict("knopp", fam, Status.INCONCLUSIVE, anchor, trend=tr)


# --- main-theorem cross-check ------------------------------------------------------

def theorem_consistency(family: WeightFamily, s_max: int = 8, n_max: int = DEFAULT_N_MAX,
                        m_search: int = DEFAULT_M_SEARCH, window=DEFAULT_N) -> dict:
    """For a G1 family the four statements below are equivalent; report them side by side.

    (1) 0 not in the spectrum, (2) 1/2 an eigenvalue, (3) some 1/s (s > 1) an
    eigenvalue, (4) every 1/s (s <= s_max) an eigenvalue. ``consistent`` means
    all four hold or none does.
    """
    inv = check_invertibility(family, n_max, m_search, window)
    members = point_spectrum_memberships(family, range(1, s_max + 1), n_max, window)
    half = members[2]
    higher = [members[s] for s in range(2, s_max + 1)]
    exists = _Status_any(higher)
    every = _combine(v.status for v in members.values())
    statuses = {"invertible": inv.status, "half": half.status, "exists_s": exists, "all_s": every}
    held = [k for k, v in statuses.items() if v is Status.HOLDS]
    return {
        "statuses": statuses,
        "consistent": len(held) in (0, len(statuses)),
        "verdicts": {"invertibility": inv, **{f"1/{s}": v for s, v in members.items()}},
    }


def _Status_any(verdicts) -> Status:
    st = [v.status for v in verdicts]
    if any(s is Status.HOLDS for s in st):
        return Status.HOLDS
    if all(s is Status.FAILS for s in st):
        return Status.FAILS
    return Status.INCONCLUSIVE
