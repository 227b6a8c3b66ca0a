"""Resolvent of the Cesàro operator, dual eigenvectors and spectrum regions.

For ``lambda`` outside ``Sigma_0 = {0} u {1/k}`` the resolvent ``(C - lambda I)^{-1}``
is lower triangular with

    r_ii = 1 / (1/i - lambda)
    r_ij = -1 / (i lambda^2 prod_{k=j}^{i} (1 - 1/(k lambda)))      (1 <= j < i)

and splits as ``D - E / lambda^2`` with ``D`` its diagonal and
``e_ij = 1 / (i prod_{k=j}^{i} (1 - 1/(k lambda)))`` for ``1 <= j < i``.
Floating-point products are accumulated as complex logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .criteria import SnReport, Status, Verdict, check_nuclearity, compute_sn
from .exact import GaussianRational, is_exact
from .kernel import (
    LogComplex,
    SequenceVector,
    TriangularKernel,
    _window,
    log_prefix_products,
)
from .trend import SeriesReport, TrendReport, log_cumsum_exp, sequence_trend, series_trend
from .weights import LD, WeightFamily

__all__ = [
    "SigmaProximityError",
    "ConsistencyError",
    "ResolventParams",
    "resolvent_entry",
    "resolvent_matrix",
    "resolvent_kernel",
    "split_DE",
    "resolvent_apply",
    "RowSumReport",
    "scaled_E_row_sums",
    "reade_ratio_bounds",
    "dual_eigenvector",
    "dual_residual",
    "dual_norm_trend",
    "Disk",
    "disk_membership",
    "SpectrumRegion",
    "assemble_spectrum",
    "EPS_SIGMA",
]

EPS_SIGMA = 1e-9
K_MAX = 50


class SigmaProximityError(ValueError):
    """``lambda`` lies on (or numerically on) ``{0} u {1/k}``."""


class ConsistencyError(RuntimeError):
    """Verdicts that cannot hold together: a nuclear space has every ``S_n`` empty."""


def _sigma_distance(lam: complex) -> float:
    d = abs(lam)
    cands = {1}
    if lam.real > 0:
        k0 = 1 / lam.real
        if k0 < 1e15:
            cands.update({max(1, math.floor(k0)), max(1, math.ceil(k0))})
        else:
            return min(d, abs(lam.imag))
    for k in cands:
        d = min(d, abs(lam - 1 / k))
    return d


def _exact_in_sigma0(lam) -> bool:
    g = GaussianRational.coerce(lam)
    if g.im != 0:
        return False
    r = g.re
    return r == 0 or (r > 0 and r.numerator == 1)


@dataclass(frozen=True)
class ResolventParams:
    """A spectral parameter away from ``Sigma_0``; exact when given as a rational."""

    lam: object
    alpha: float = field(init=False)
    sigma_distance: float = field(init=False)
    eps: float = EPS_SIGMA

    def __post_init__(self):
        lam = self.lam
        if isinstance(lam, int) and not isinstance(lam, bool):
            lam = Fraction(lam)
            object.__setattr__(self, "lam", lam)
        z = complex(lam)
        if is_exact(lam):
            if _exact_in_sigma0(lam):
                raise SigmaProximityError(f"lambda = {lam} lies in {{0}} u {{1/k}}")
        dist = _sigma_distance(z)
        if not is_exact(lam) and dist < self.eps:
            raise SigmaProximityError(f"lambda = {z} is within {dist:.3g} of {{0}} u {{1/k}}")
        object.__setattr__(self, "alpha", z.real / abs(z) ** 2)
        object.__setattr__(self, "sigma_distance", dist)

    @property
    def exact(self) -> bool:
        return is_exact(self.lam)

    @property
    def complex(self) -> complex:
        return complex(self.lam)


def _params(p) -> ResolventParams:
    return p if isinstance(p, ResolventParams) else ResolventParams(p)


def _exact_factor(k: int, lam):
    return 1 - 1 / (k * lam)


def resolvent_entry(i: int, j: int, params):
    """Entry ``(i, j)`` of ``(C - lambda I)^{-1}``; exact when ``lambda`` is rational."""
    p = _params(params)
    if j > i:
        return Fraction(0) if p.exact else 0j
    lam = p.lam
    if p.exact:
        lam = lam if isinstance(lam, (Fraction, GaussianRational)) else Fraction(lam)
        if i == j:
            return 1 / (Fraction(1, i) - lam)
        prod = Fraction(1)
        for k in range(j, i + 1):
            prod = prod * _exact_factor(k, lam)
        return -1 / (i * lam * lam * prod)
    z = complex(lam)
    if i == j:
        return 1 / (1 / i - z)
    prod = LogComplex.product(1 - 1 / (k * z) for k in range(j, i + 1))
    if prod.log_modulus == -math.inf:
        raise ArithmeticError(f"product factor vanished between k={j} and k={i}")
    return -((LogComplex.from_complex(i * z * z) * prod).reciprocal()).to_complex()


def _log_prefix(p: ResolventParams, N: int) -> np.ndarray:
    z = complex(p.lam)
    return log_prefix_products([1 - 1 / (k * z) for k in range(1, N + 1)])


def _exact_matrices(p: ResolventParams, N: int):
    lam = p.lam
    D = np.full((N, N), Fraction(0), dtype=object)
    E = np.full((N, N), Fraction(0), dtype=object)
    for i in range(1, N + 1):
        D[i - 1, i - 1] = 1 / (Fraction(1, i) - lam)
    for j in range(1, N + 1):
        prod = _exact_factor(j, lam)
        for i in range(j + 1, N + 1):
            prod = prod * _exact_factor(i, lam)
            E[i - 1, j - 1] = 1 / (i * prod)
    return D, E


def _float_matrices(p: ResolventParams, N: int):
    z = complex(p.lam)
    L = _log_prefix(p, N)
    i = np.arange(1, N + 1)
    D = np.diag(1 / (1 / i - z)).astype(np.complex128)
    # log e_ij = -log i - (L[i] - L[j-1])
    logE = -np.log(i)[:, None] - (L[1:][:, None] - L[:-1][None, :])
    logE[np.triu_indices(N)] = -np.inf
    if np.max(logE.real) > 709:
        raise OverflowError("resolvent entries overflow a double on this window")
    E = np.exp(logE)
    return D, E


def split_DE(params):
    """Kernels ``(D, E)`` with ``(C - lambda I)^{-1} = D - E / lambda^2``.

    ``E`` is supported on ``1 <= j < i`` (column 1 included).
    """
    p = _params(params)
    lam = p.lam

    def d_entry(i, j):
        if i != j:
            return Fraction(0) if p.exact else 0j
        return 1 / (Fraction(1, i) - lam) if p.exact else 1 / (1 / i - complex(lam))

    def e_entry(i, j):
        if j >= i:
            return Fraction(0) if p.exact else 0j
        if p.exact:
            prod = Fraction(1)
            for k in range(j, i + 1):
                prod = prod * _exact_factor(k, lam)
            return 1 / (i * prod)
        prod = LogComplex.product(1 - 1 / (k * complex(lam)) for k in range(j, i + 1))
        return (LogComplex.from_complex(i) * prod).reciprocal().to_complex()

    def mat(which):
        def build(N):
            D, E = (_exact_matrices if p.exact else _float_matrices)(p, N)
            return D if which == 0 else E

        return build

    D = TriangularKernel(d_entry, f"D_lambda, lambda={lam}", mat(0), p.exact)
    E = TriangularKernel(e_entry, f"E_lambda, lambda={lam}", mat(1), p.exact)
    return D, E


def resolvent_matrix(params, window) -> np.ndarray:
    """Dense ``N x N`` section of the resolvent (object array of exact values if rational)."""
    p = _params(params)
    N = _window(window)
    D, E = (_exact_matrices if p.exact else _float_matrices)(p, N)
    lam = p.lam if p.exact else complex(p.lam)
    return D - E / (lam * lam)


def resolvent_kernel(params) -> TriangularKernel:
    p = _params(params)
    return TriangularKernel(lambda i, j: resolvent_entry(i, j, p), f"resolvent, lambda={p.lam}",
                            lambda N: resolvent_matrix(p, N), p.exact)


def resolvent_apply(y: SequenceVector, params, verify: bool = False):
    """Solve ``(C - lambda I) x = y`` on the window by forward substitution.

    Row i reads ``x_i (1/i - lambda) = y_i - (x_1 + ... + x_{i-1}) / i``.
    With ``verify=True`` returns ``(x, deviation)`` where ``deviation`` is the
    largest gap to the product of the explicit entry matrix with ``y``.
    """
    p = _params(params)
    N = y.N
    exact = p.exact and y.exact
    lam = p.lam if exact else complex(p.lam)
    if exact:
        x = np.empty(N, dtype=object)
        s = Fraction(0)
    else:
        x = np.empty(N, dtype=np.complex128)
        s = 0j
    ys = y.entries if exact else y.entries.astype(np.complex128)
    for i in range(1, N + 1):
        diag = (Fraction(1, i) - lam) if exact else (1 / i - lam)
        if not exact and abs(diag) < 1e-13:
            raise ArithmeticError(f"near-singular diagonal at i={i}")
        xi = (ys[i - 1] - s / i) / diag
        x[i - 1] = xi
        s = s + xi
    out = SequenceVector(x, tail_truncated=y.tail_truncated)
    if not verify:
        return out
    R = resolvent_matrix(p, N)
    if not exact and R.dtype == object:
        R = np.vectorize(complex, otypes=[np.complex128])(R)
    alt = R.dot(ys)
    dev = max((abs(complex(a - b)) for a, b in zip(alt, x)), default=0.0)
    return out, dev


# --- scaled row sums ---------------------------------------------------------------

@dataclass(frozen=True)
class RowSumReport:
    """Row sums of ``E~_ij = (a_n(i)/a_m(j)) |e_ij|`` and the comparison bound.

    ``bound`` follows the product estimate ``|prod| ~ (j/i)^alpha``: the rows are
    at most a constant times ``a_n(i)/a_m(i)`` when ``alpha < 1`` and
    ``i^{alpha-1} a_n(i)/a_m(i)`` (times ``log i`` at ``alpha = 1``) otherwise.
    """

    trend: TrendReport
    bound_trend: TrendReport
    column_trend: TrendReport
    log_row_sums: np.ndarray = field(repr=False)
    log_bound: np.ndarray = field(repr=False)
    n: int = 0
    m: int = 0
    alpha: float = 0.0

    @property
    def max_log_ratio(self) -> float:
        """``max_i log(row sum / bound)``; finite means the rows sit under a constant times the bound."""
        d = self.log_row_sums - self.log_bound
        return float(np.max(d[np.isfinite(d)]))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "alpha": self.alpha,
            "row_sums": self.trend.to_json(),
            "bound": self.bound_trend.to_json(),
            "column_1": self.column_trend.to_json(),
            "max_log_ratio": self.max_log_ratio,
        }


def scaled_E_row_sums(family: WeightFamily, n: int, m: int, params, window=4096) -> RowSumReport:
    """``log sum_{j<i} (a_n(i)/a_m(j)) |e_ij|`` for ``i = 2..N`` with trend diagnostics."""
    if m <= n:
        raise ValueError("m must exceed n")
    p = _params(params)
    N = _window(window)
    L = _log_prefix(p, N).real.astype(LD)  # L[k] = log |prod_{t<=k} (1 - 1/(t lambda))|
    log_i = np.log(np.arange(1, N + 1, dtype=LD))
    an = family.row(n, N)
    am = family.row(m, N)
    # log |e_ij| = -log i - L[i] + L[j-1]
    inner = log_cumsum_exp(-am + L[:-1])  # index j-1 -> log sum_{t<=j} exp(-log a_m(t) + L[t-1])
    rows = an[1:] - log_i[1:] - L[2:] + inner[:-1]
    alpha = p.alpha
    extra = max(0.0, alpha - 1) * log_i[1:]
    if math.isclose(alpha, 1.0):
        extra = extra + np.log(np.maximum(log_i[1:], LD(1e-300)))
    bound = an[1:] - am[1:] + extra
    col = an[1:] - am[0] - log_i[1:] - L[2:] + L[0]
    return RowSumReport(
        trend=sequence_trend(rows, note="scaled E row sums", offset=1),
        bound_trend=sequence_trend(bound, note="estimate-based bound", offset=1),
        column_trend=sequence_trend(col, note="column j=1", offset=1),
        log_row_sums=rows,
        log_bound=bound,
        n=n,
        m=m,
        alpha=alpha,
    )


def reade_ratio_bounds(params, window) -> tuple[float, float]:
    """``min`` and ``max`` of ``|prod_{k=j}^{i} (1 - 1/(k lambda))| (i/j)^alpha`` over ``1 <= j < i <= N``."""
    p = _params(params)
    N = _window(window)
    L = _log_prefix(p, N).real
    i = np.arange(1, N + 1)
    logr = (L[1:][:, None] - L[:-1][None, :]) + p.alpha * (np.log(i)[:, None] - np.log(i)[None, :])
    mask = np.tril(np.ones((N, N), dtype=bool), -1)
    vals = logr[mask]
    return float(np.exp(vals.min())), float(np.exp(vals.max()))


# --- dual eigenvectors -----------------------------------------------------------

def _integer_reciprocal(lam) -> int | None:
    """``s`` when ``lambda = 1/s`` (exactly, or to 1e-12 in floating mode)."""
    if is_exact(lam):
        return None if not _exact_in_sigma0(lam) or GaussianRational.coerce(lam).re == 0 else \
            GaussianRational.coerce(lam).re.denominator
    z = complex(lam)
    if z == 0 or abs(z.imag) > 1e-12:
        return None
    s = 1 / z.real
    k = round(s)
    return k if k >= 1 and abs(s - k) <= 1e-12 * max(1, k) else None


def dual_eigenvector(lam, window, y1=1) -> SequenceVector:
    """Solution of ``C' y = lambda y`` on the window: ``y_{i+1} = (1 - 1/(lambda i)) y_i``.

    For ``lambda = 1/s`` the factor at ``i = s`` is exactly zero, so
    ``y_i = 0`` for ``i > s``. Rational ``lambda`` gives exact entries.
    """
    N = _window(window)
    if complex(lam) == 0:
        raise ValueError("lambda must be nonzero")
    s = _integer_reciprocal(lam)
    if is_exact(lam) and is_exact(y1):
        lamx = lam if isinstance(lam, (Fraction, GaussianRational)) else Fraction(lam)
        y = np.empty(N, dtype=object)
        cur = y1 if isinstance(y1, (Fraction, GaussianRational)) else Fraction(y1)
        for i in range(1, N + 1):
            y[i - 1] = cur
            cur = cur * (1 - 1 / (i * lamx))
        return SequenceVector(y, tail_truncated=s is None or s >= N)
    z = complex(lam)
    factors = np.array([1 - 1 / (k * z) for k in range(1, N)], dtype=np.complex128)
    if s is not None and s < N:
        factors[s - 1] = 0
    y = np.zeros(N, dtype=np.complex128)
    y[0] = complex(y1)
    cut = N if s is None or s >= N else s
    if cut > 1:
        L = log_prefix_products(factors[: cut - 1])
        with np.errstate(over="ignore", under="ignore"):
            y[1:cut] = complex(y1) * np.exp(L[1:])
    return SequenceVector(y, tail_truncated=s is None or s >= N)


def dual_residual(lam, window) -> float:
    """``max_{i <= N/2} |(C'y)_i - lambda y_i|`` for the truncated eigenvector; reported, not asserted."""
    from .kernel import cesaro_dual_apply

    y = dual_eigenvector(lam, window)
    r = cesaro_dual_apply(y).entries - complex(lam) * y.to_float().entries
    half = max(1, y.N // 2)
    return float(np.max(np.abs(r[:half].astype(np.complex128))))


def dual_norm_trend(family: WeightFamily, n: int, y: SequenceVector) -> SeriesReport:
    """Convergence of ``sum_i |y_i| / a_n(i)`` (membership of y in the weighted l1 dual)."""
    N = y.N
    mags = np.array([abs(complex(v)) for v in y.entries], dtype=LD)
    nz = np.flatnonzero(mags)
    finite = not y.tail_truncated and (nz.size == 0 or nz[-1] < N - 1)
    with np.errstate(divide="ignore"):
        terms = np.log(mags) - family.row(n, N)
    return series_trend(terms, finite_support=finite)


# --- disks and regions --------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    """Open disk ``|lambda - 1/(2r)| < 1/(2r)``; its points satisfy ``Re(1/lambda) > r``."""

    r: float

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("disk parameter r must be at least 1")

    @property
    def center(self) -> float:
        return 1 / (2 * self.r)

    @property
    def radius(self) -> float:
        return 1 / (2 * self.r)

    def __contains__(self, lam) -> bool:
        return abs(complex(lam) - self.center) < self.radius

    def to_json(self) -> dict:
        return {"r": self.r, "center": self.center, "radius": self.radius}


def disk_membership(lam, r: float) -> tuple[bool, dict]:
    """Membership in ``D(r)`` plus the equivalent test ``Re(1/lambda) > r``."""
    d = Disk(r)
    z = complex(lam)
    inside = z in d
    re_inv = (1 / z).real if z != 0 else -math.inf
    return inside, {"re_inv_lambda": re_inv, "re_inv_exceeds_r": re_inv > r, "agrees": (re_inv > r) == inside}


@dataclass(frozen=True)
class SpectrumRegion:
    """Evidence about ``sigma(C)``: the points ``1/k``, whether 0 is included, and disks contained in it.

    Disks are containment evidence; they are never claimed to exhaust the spectrum.
    """

    sigma_points: tuple
    zero_included: bool
    disks: tuple
    classification: str  # 'Nuclear' | 'NonNuclearWithSn' | 'Unknown'
    evidence: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        if self.classification == "Nuclear" and (self.zero_included or self.disks):
            raise ConsistencyError("a nuclear region is exactly {1/k}")
        if self.classification == "NonNuclearWithSn":
            if not self.zero_included or not any(d.r == 1 for d in self.disks):
                raise ConsistencyError("a region with nonempty S_n contains D(1) and 0")

    def classify_point(self, lam) -> str:
        z = complex(lam)
        for p in self.sigma_points:
            if abs(z - float(p)) < EPS_SIGMA:
                return "spectrum"
        if z == 0:
            return "spectrum" if self.zero_included else "resolvent"
        if any(z in d for d in self.disks):
            return "spectrum"
        if self.classification == "Nuclear":
            return "resolvent" if _sigma_distance(z) >= EPS_SIGMA else "spectrum"
        return "undetermined"

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "sigma_points": [str(p) for p in self.sigma_points],
            "zero_included": self.zero_included,
            "disks": [d.to_json() for d in self.disks],
            "disks_meaning": "contained in the spectrum",
            "evidence": self.evidence,
            "notes": list(self.notes),
        }


def assemble_spectrum(family: WeightFamily, verdicts: dict | None = None, k_max: int = K_MAX,
                      window=4096, n_max: int = 3, s_grid=(1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 6, 8)) -> SpectrumRegion:
    """Combine a nuclearity verdict and ``S_n`` reports into a spectrum region.

    ``verdicts`` may carry ``"nuclearity"`` (a Verdict) and ``"sn"`` (SnReports);
    anything missing is computed on the window.
    """
    verdicts = dict(verdicts or {})
    nuc: Verdict = verdicts.get("nuclearity") or check_nuclearity(family, window=window)
    sn: list[SnReport] = verdicts.get("sn")
    if sn is None:
        sn = [compute_sn(family, n, s_grid, window) for n in range(1, n_max + 1)]
    points = tuple(Fraction(1, k) for k in range(1, k_max + 1))
    nonempty = [r for r in sn if r.nonempty]
    evidence = {"nuclearity": nuc.status.value, "sn": [r.to_json() for r in sn]}
    if nuc.status is Status.HOLDS and nonempty:
        raise ConsistencyError(
            f"nuclearity holds but S_{nonempty[0].n} is nonempty; a nonempty S_n rules out nuclearity"
        )
    if nuc.status is Status.HOLDS:
        return SpectrumRegion(points, False, (), "Nuclear", evidence,
                              ("spectrum equals {1/k : k >= 1}",))
    if nonempty:
        radii = {1.0}
        for r in nonempty:
            if r.s0_estimate is not None:
                radii.add(max(1.0, float(r.s0_estimate)))
        disks = tuple(Disk(r) for r in sorted(radii))
        return SpectrumRegion(points, True, disks, "NonNuclearWithSn", evidence,
                              ("D(1) u {1} is contained in the spectrum; containment only",))
    return SpectrumRegion(points, False, (), "Unknown", evidence, ("no certified nuclearity and no nonempty S_n",))
