"""Köthe weight matrices ``A = (a_n(i))`` held through their logarithms.

Every family exposes ``log a_n(i)`` as an extended-precision (``np.longdouble``)
function of ``n`` and an index array. Working with the logarithm keeps
families such as ``exp(-n e^{i/n})`` finite far past the double range:
``log a_1(10^4) = -e^{10^4}`` is about ``-8.8e4342``, which fits a longdouble but
not a float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import dsl

__all__ = [
    "WeightEvaluationError",
    "WeightFamily",
    "log_weight",
    "power_series",
    "nuclear_g1_example",
    "alpha_seq",
    "point_spectrum",
    "sn_gap",
    "dragilev",
    "dsl_family",
    "table_family",
    "custom_family",
    "BUILTINS",
    "builtin",
    "family_from_spec",
]

LD = np.longdouble


class WeightEvaluationError(ValueError):
    """A log-weight could not be evaluated to a finite number."""

    def __init__(self, message, n=None, i=None):
        self.n = n
        self.i = i
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class WeightFamily:
    """A Köthe matrix presented through ``log a_n(i)``.

    ``log_fn(n, i)`` receives a positive integer ``n`` and a longdouble array of
    indices and returns the log-weights for that row. ``known_facts`` is a
    labelling aid for tests and reports; the verdict engine never reads it.
    ``n_limit`` / ``i_limit`` bound the indices of finite (tabulated) families.
    """

    name: str
    params: Mapping = field(default_factory=dict)
    log_fn: Callable = None
    known_facts: frozenset = frozenset()
    anchor: str = ""
    n_limit: int | None = None
    i_limit: int | None = None
    _rows: dict = field(default_factory=dict, repr=False)

    def log_weights(self, n: int, i) -> np.ndarray:
        """Row ``n`` of log-weights at the indices ``i`` (array-like, 1-based)."""
        n = int(n)
        i_arr = np.atleast_1d(np.asarray(i, dtype=LD))
        if n < 1 or (i_arr < 1).any():
            raise WeightEvaluationError("indices are 1-based", n=n)
        if self.n_limit is not None and n > self.n_limit:
            raise WeightEvaluationError(f"{self.name} has no row n={n}", n=n)
        if self.i_limit is not None and i_arr.max() > self.i_limit:
            raise WeightEvaluationError(f"{self.name} is only defined for i <= {self.i_limit}", n=n)
        try:
            with np.errstate(all="ignore"):
                out = np.asarray(self.log_fn(n, i_arr), dtype=LD)
        except dsl.EvaluationError as exc:
            raise WeightEvaluationError(str(exc), n=exc.n, i=exc.i) from exc
        out = np.broadcast_to(out, i_arr.shape)
        bad = ~np.isfinite(out)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise WeightEvaluationError(
                f"log a_n(i) is not finite for {self.name} at n={n}, i={int(i_arr[k])}",
                n=n,
                i=int(i_arr[k]),
            )
        return out

    def row(self, n: int, N: int) -> np.ndarray:
        """Cached row ``log a_n(1..N)``. Treat the result as read-only."""
        key = (int(n), int(N))
        cached = self._rows.get(key)
        if cached is None:
            cached = self.log_weights(n, np.arange(1, N + 1))
            cached.flags.writeable = False
            self._rows[key] = cached
        return cached

    def describe(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def log_weight(family: WeightFamily, n: int, i: int) -> np.longdouble:
    """``log a_n(i)`` at a single index pair."""
    return family.log_weights(n, [i])[0]


# --- builtin families ------------------------------------------------------

def power_series(exponent: float = 1.0, kind: str = "power") -> WeightFamily:
    """Power series space of finite type, ``log a_n(i) = -alpha_i / n``.

    ``kind="power"`` uses ``alpha_i = i**exponent``; ``kind="log"`` uses
    ``alpha_i = log(i + 1)`` (a non-nuclear example with nonempty ``S_n``).
    """
    if kind == "power":
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        p = LD(exponent)

        def alpha(i):
            return i ** p

        facts = {"g1", "vanishing", "nuclear"}
    elif kind == "log":

        def alpha(i):
            return np.log1p(i)

        facts = {"g1", "vanishing", "not-nuclear", "sn-nonempty"}
    else:
        raise ValueError(f"unknown alpha kind {kind!r}")
    return WeightFamily(
        name="power-series",
        params={"exponent": float(exponent), "kind": kind},
        log_fn=lambda n, i: -alpha(i) / LD(n),
        known_facts=frozenset(facts),
        anchor="power series space of finite type",
    )


def nuclear_g1_example() -> WeightFamily:
    """``a_n(i) = exp(-n e^{i/n})``: nuclear G1, not a power series space."""
    return WeightFamily(
        name="nuclear-g1-example",
        params={},
        log_fn=lambda n, i: -LD(n) * np.exp(i / LD(n)),
        known_facts=frozenset({"g1", "vanishing", "nuclear", "k1-finite-violations"}),
        anchor="nuclear G1 space that is not a power series space",
    )


def alpha_seq(alpha: float = 0.9, alpha_n: Callable | None = None) -> WeightFamily:
    """``a_n(i) = i^{alpha_n} e^{-i}`` with ``alpha_n`` increasing to ``alpha`` in (0, 1).

    The default sequence is ``alpha_n = alpha * n / (n + 1)``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    seq = alpha_n or (lambda n: alpha * n / (n + 1))
    checked = [seq(k) for k in range(1, 65)]
    if any(b <= a for a, b in zip(checked, checked[1:])) or any(not 0 < a < alpha for a in checked):
        raise ValueError("alpha_n must increase strictly inside (0, alpha)")
    return WeightFamily(
        name="alpha-seq",
        params={"alpha": float(alpha)},
        log_fn=lambda n, i: LD(seq(n)) * np.log(i) - i,
        known_facts=frozenset({"g1-1", "vanishing", "not-g1", "not-invertible"}),
        anchor="G1 assumption cannot be removed: invertibility fails, every 1/s is an eigenvalue",
    )


def point_spectrum(s: int = 3) -> WeightFamily:
    """``a_n(i) = i^{-(s - 1/2 + 1/(n+1))}``; point spectrum exactly ``{1, ..., 1/s}``."""
    s = int(s)
    if s < 1:
        raise ValueError("s must be a positive integer")
    return WeightFamily(
        name="point-spectrum",
        params={"s": s},
        log_fn=lambda n, i: -(LD(s) - LD(0.5) + LD(1) / LD(n + 1)) * np.log(i),
        known_facts=frozenset({"g1-1", "vanishing", "not-g1", "not-nuclear", "sn-nonempty"}),
        anchor="G1 assumption cannot be removed: point spectrum is finite",
    )


def sn_gap() -> WeightFamily:
    """``a_n(i) = exp(-e^{alpha_i/n})`` with ``alpha_i = 2 log log(i + 2)``.

    ``S_1`` is empty while ``S_2`` is not.
    """

    def log_fn(n, i):
        alpha_i = 2 * np.log(np.log(i + 2))
        return -np.exp(alpha_i / LD(n))

    return WeightFamily(
        name="sn-gap",
        params={},
        log_fn=log_fn,
        known_facts=frozenset({"g1", "not-nuclear", "sn-nonempty"}),
        anchor="S_1 empty but S_2 nonempty",
    )


_DRAGILEV_F = {
    "xexp": lambda x: x * np.exp(x),
    "sinh": np.sinh,
}


def dragilev(f: str = "xexp", exponent: float = 1.0) -> WeightFamily:
    """Dragilev space of finite type, ``log a_n(i) = -f(alpha_i / n)``, ``alpha_i = i**exponent``.

    Presets: ``f(x) = x e^x`` and ``f(x) = sinh x``. The sufficient G1 condition
    (odd, log-convex, ``2 f(x) <= f(kx)``) is not machine-checked; G1 is always
    tested numerically.
    """
    if f not in _DRAGILEV_F:
        raise ValueError(f"unknown Dragilev preset {f!r}; choose from {sorted(_DRAGILEV_F)}")
    fn = _DRAGILEV_F[f]
    p = LD(exponent)
    return WeightFamily(
        name="dragilev",
        params={"f": f, "exponent": float(exponent)},
        log_fn=lambda n, i: -fn(i ** p / LD(n)),
        known_facts=frozenset({"g1", "vanishing", "nuclear"}),
        anchor="Dragilev space of finite type",
    )


def dsl_family(text: str, name: str = "dsl") -> WeightFamily:
    """Family whose ``log a_n(i)`` is the DSL expression ``text``."""
    ast = dsl.parse_weight_expr(text)
    return WeightFamily(
        name=name,
        params={"log_weight_expr": text},
        log_fn=lambda n, i: dsl.evaluate(ast, n, i),
        anchor="user-defined log-weight expression",
    )


def table_family(log_table, name: str = "table") -> WeightFamily:
    """Finite family from an explicit ``(rows, N)`` table of log-weights."""
    table = np.asarray(log_table, dtype=LD)
    if table.ndim != 2:
        raise ValueError("log_table must be two-dimensional")

    def log_fn(n, i):
        return table[n - 1, i.astype(np.int64) - 1]

    return WeightFamily(
        name=name,
        params={"rows": table.shape[0], "columns": table.shape[1]},
        log_fn=log_fn,
        n_limit=table.shape[0],
        i_limit=table.shape[1],
        anchor="tabulated weights",
    )


def custom_family(name: str, log_fn: Callable, n_limit: int | None = None, **params) -> WeightFamily:
    """Wrap an arbitrary vectorised ``log_fn(n, i_array)``."""
    return WeightFamily(name=name, params=params, log_fn=log_fn, n_limit=n_limit, anchor="custom weights")


# --- registry --------------------------------------------------------------

BUILTINS = {
    "power-series": power_series,
    "nuclear-g1-example": nuclear_g1_example,
    "alpha-seq": alpha_seq,
    "point-spectrum": point_spectrum,
    "sn-gap": sn_gap,
    "dragilev": dragilev,
}

_ALIASES = {
    "PowerSeriesFinite": "power-series",
    "NuclearG1Example": "nuclear-g1-example",
    "AlphaSeqExample": "alpha-seq",
    "PointSpectrumExample": "point-spectrum",
    "SnGapExample": "sn-gap",
    "DragilevFinite": "dragilev",
}


def builtin(name: str, **params) -> WeightFamily:
    key = _ALIASES.get(name, name)
    if key not in BUILTINS:
        raise KeyError(f"unknown builtin family {name!r}; available: {', '.join(BUILTINS)}")
    return BUILTINS[key](**params)


def family_from_spec(spec) -> WeightFamily:
    """Build a family from ``{builtin: name, params: {...}}`` or ``{log_weight_expr: "..."}``."""
    if isinstance(spec, WeightFamily):
        return spec
    if isinstance(spec, str):
        return builtin(spec)
    if "log_weight_expr" in spec:
        return dsl_family(str(spec["log_weight_expr"]), name=spec.get("name", "dsl"))
    if "builtin" in spec:
        return builtin(spec["builtin"], **dict(spec.get("params") or {}))
    raise ValueError("family spec needs either 'builtin' or 'log_weight_expr'")


def k1_threshold(n: int) -> float:
    """Index beyond which the raw nuclear G1 example satisfies ``a_n <= a_{n+1}``."""
    return n * (n + 1) * math.log1p(1 / n)
