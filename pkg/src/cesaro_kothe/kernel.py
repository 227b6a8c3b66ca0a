"""Truncated sequence-space arithmetic.

Vectors are finite sections ``x_1..x_N`` of a sequence. Public indices are
1-based. Two arithmetic modes share the same code: floating (complex128
entries) and exact (``object`` arrays of ``Fraction`` or ``GaussianRational``).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .exact import GaussianRational
from .weights import WeightFamily

__all__ = [
    "TruncationWindow",
    "SequenceVector",
    "LogComplex",
    "LogComplexOverflow",
    "TriangularKernel",
    "KernelEntryError",
    "seminorm",
    "log_seminorm",
    "cesaro_apply",
    "cesaro_inverse_apply",
    "cesaro_dual_apply",
    "diff_apply",
    "shift_left",
    "truncate_kernel",
    "compose",
    "identity_kernel",
    "cesaro_kernel",
    "inverse_cesaro_kernel",
    "log_prefix_products",
    "write_vector_csv",
    "read_vector_csv",
    "write_matrix_csv",
    "read_matrix_csv",
]

# largest log-modulus that still converts to a finite double
LOG_OVERFLOW = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class TruncationWindow:
    N: int

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValueError("truncation window must contain at least one index")


def _window(N) -> int:
    if isinstance(N, TruncationWindow):
        return N.N
    TruncationWindow(int(N))
    return int(N)


def _indices(N: int, exact: bool) -> np.ndarray:
    if exact:
        return np.array(list(range(1, N + 1)), dtype=object)
    return np.arange(1, N + 1, dtype=np.float64)


def real_divide(z: np.ndarray, d) -> np.ndarray:
    """``z / d`` for real ``d``; complex arrays are divided part by part.

    numpy promotes ``d`` to complex and runs a full complex division, which is
    not exact (``49 / 49 != 1``); dividing the parts keeps real results exact.
    """
    if z.dtype == object or not np.iscomplexobj(z):
        return z / d
    out = np.empty(np.broadcast(z, d).shape, dtype=z.dtype)
    out.real = z.real / d
    out.imag = z.imag / d
    return out


@dataclass(frozen=True, eq=False)
class SequenceVector:
    """A finite section ``x_1..x_N``.

    ``tail_truncated`` marks results whose last entries depend on coordinates
    beyond the window (forward-reading operators, infinite-support vectors).
    """

    entries: np.ndarray
    tail_truncated: bool = False

    def __post_init__(self):
        e = self.entries
        if e.ndim != 1 or e.shape[0] < 1:
            raise ValueError("a sequence vector needs a nonempty one-dimensional window")
        if e.dtype != object and not np.all(np.isfinite(e)):
            raise ValueError("sequence entries must be finite")

    @classmethod
    def from_values(cls, values, exact: bool = False, tail_truncated: bool = False) -> "SequenceVector":
        if exact:
            arr = np.empty(len(values), dtype=object)
            for k, v in enumerate(values):
                arr[k] = v if isinstance(v, (Fraction, GaussianRational)) else Fraction(v)
        else:
            arr = np.asarray(values, dtype=np.complex128).copy()
        return cls(arr, tail_truncated)

    @classmethod
    def unit(cls, j: int, N, exact: bool = False) -> "SequenceVector":
        """Canonical vector ``e_j``."""
        N = _window(N)
        if not 1 <= j <= N:
            raise ValueError(f"e_{j} lies outside the window 1..{N}")
        vals = [0] * N
        vals[j - 1] = 1
        return cls.from_values(vals, exact)

    @classmethod
    def ones(cls, N, exact: bool = False) -> "SequenceVector":
        return cls.from_values([1] * _window(N), exact)

    @classmethod
    def zeros(cls, N, exact: bool = False) -> "SequenceVector":
        return cls.from_values([0] * _window(N), exact)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @property
    def window(self) -> TruncationWindow:
        return TruncationWindow(self.N)

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def __len__(self):
        return self.N

    def at(self, i: int):
        """Entry ``x_i`` (1-based)."""
        return self.entries[i - 1]

    def __sub__(self, other: "SequenceVector") -> "SequenceVector":
        return SequenceVector(self.entries - other.entries, self.tail_truncated or other.tail_truncated)

    def __add__(self, other: "SequenceVector") -> "SequenceVector":
        return SequenceVector(self.entries + other.entries, self.tail_truncated or other.tail_truncated)

    def scale(self, c) -> "SequenceVector":
        return SequenceVector(self.entries * c, self.tail_truncated)

    def to_float(self) -> "SequenceVector":
        if not self.exact:
            return self
        return SequenceVector(np.array([complex(v) for v in self.entries]), self.tail_truncated)

    def equals(self, other: "SequenceVector") -> bool:
        return self.N == other.N and bool(np.all(self.entries == other.entries))


# --- log-domain complex products --------------------------------------------

class LogComplexOverflow(OverflowError):
    pass


def _wrap(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if t == -math.pi else t


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as ``(log|z|, arg z)``; ``log_modulus = -inf`` is zero."""

    log_modulus: float
    argument: float = 0.0

    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), _wrap(math.atan2(z.imag, z.real)))

    @classmethod
    def product(cls, factors) -> "LogComplex":
        lm, arg = 0.0, 0.0
        for f in factors:
            z = complex(f)
            if z == 0:
                return cls(-math.inf, 0.0)
            lm += math.log(abs(z))
            arg += math.atan2(z.imag, z.real)
        return cls(lm, _wrap(arg))

    def __mul__(self, other) -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if math.isinf(self.log_modulus) or math.isinf(other.log_modulus):
            if self.log_modulus == -math.inf or other.log_modulus == -math.inf:
                return LogComplex(-math.inf, 0.0)
        return LogComplex(self.log_modulus + other.log_modulus, _wrap(self.argument + other.argument))

    def reciprocal(self) -> "LogComplex":
        if self.log_modulus == -math.inf:
            raise ZeroDivisionError("reciprocal of zero")
        return LogComplex(-self.log_modulus, _wrap(-self.argument))

    def to_complex(self) -> complex:
        if self.log_modulus > LOG_OVERFLOW:
            raise LogComplexOverflow(f"modulus exp({self.log_modulus:.6g}) overflows a double")
        if self.log_modulus == -math.inf:
            return 0j
        r = math.exp(self.log_modulus)
        return complex(r * math.cos(self.argument), r * math.sin(self.argument))


def log_prefix_products(factors) -> np.ndarray:
    """Complex logs of prefix products: ``out[k] = log prod_{m<=k} factors[m]``, ``out[0] = 0``.

    Products over a window ``j..i`` are then ``exp(out[i] - out[j-1])``.
    Imaginary parts are unwrapped running angles; wrap on conversion.
    """
    f = np.asarray(factors, dtype=np.complex128)
    if np.any(f == 0):
        k = int(np.flatnonzero(f == 0)[0])
        raise ZeroDivisionError(f"factor {k + 1} of the product vanishes")
    return np.concatenate([[0j], np.cumsum(np.log(f))])


# --- seminorms and operators ------------------------------------------------

def _abs_log(x: SequenceVector) -> np.ndarray:
    if x.exact:
        mags = np.array([abs(complex(v)) for v in x.entries], dtype=np.longdouble)
    else:
        mags = np.abs(x.entries).astype(np.longdouble)
    with np.errstate(divide="ignore"):
        return np.log(mags)


def log_seminorm(family: WeightFamily, n: int, x: SequenceVector) -> float:
    """``log p_n(x)``; ``-inf`` for the zero vector."""
    t = family.row(n, x.N) + _abs_log(x)
    return float(t.max())


def seminorm(family: WeightFamily, n: int, x: SequenceVector) -> float:
    """``p_n(x) = max_{i<=N} a_n(i) |x_i|`` with each term formed as ``exp(log a_n(i) + log|x_i|)``."""
    t = family.row(n, x.N) + _abs_log(x)
    m = t.max()
    if m == -np.inf:
        return 0.0
    return float(np.exp(m))


def cesaro_apply(x: SequenceVector) -> SequenceVector:
    """``(Cx)_i = (x_1 + ... + x_i) / i`` by a running prefix sum."""
    idx = _indices(x.N, x.exact)
    return SequenceVector(real_divide(np.cumsum(x.entries), idx), x.tail_truncated)


def cesaro_inverse_apply(y: SequenceVector) -> SequenceVector:
    """``(C^{-1} y)_i = i y_i - (i-1) y_{i-1}`` with ``y_0 = 0``."""
    idx = _indices(y.N, y.exact)
    iy = idx * y.entries
    out = iy.copy()
    out[1:] = iy[1:] - iy[:-1]
    return SequenceVector(out, y.tail_truncated)


def cesaro_dual_apply(y: SequenceVector) -> SequenceVector:
    """``(C'y)_i = sum_{j=i}^{N} y_j / j`` by a reverse suffix sum.

    Exact for vectors supported inside the window; the tail flag of the input
    is carried over otherwise.
    """
    idx = _indices(y.N, y.exact)
    terms = real_divide(y.entries, idx)
    return SequenceVector(np.cumsum(terms[::-1])[::-1].copy(), y.tail_truncated)


def diff_apply(x: SequenceVector) -> SequenceVector:
    """Formal differentiation ``(Dx)_i = i x_{i+1}``; the last entry is truncated to 0."""
    idx = _indices(x.N, x.exact)
    out = x.entries * 0
    out[:-1] = idx[:-1] * x.entries[1:]
    return SequenceVector(out, True)


def shift_left(x: SequenceVector) -> SequenceVector:
    """``S(x) = (x_2, x_3, ...)``; the window shrinks by one."""
    if x.N == 1:
        raise ValueError("left shift of a length-1 window is empty")
    return SequenceVector(x.entries[1:].copy(), x.tail_truncated)


# --- lower-triangular kernels -----------------------------------------------

class KernelEntryError(ArithmeticError):
    def __init__(self, i, j, cause):
        self.i, self.j = i, j
        super().__init__(f"kernel entry ({i}, {j}) failed: {cause}")


@dataclass(frozen=True)
class TriangularKernel:
    """Lazily evaluated lower-triangular matrix ``entry(i, j)``, zero for ``j > i``.

    ``materialize(N)`` is an optional fast path returning the dense section.
    """

    entry: Callable
    description: str = ""
    materialize: Callable | None = None
    exact: bool = False

    def __call__(self, i: int, j: int):
        if j > i:
            return Fraction(0) if self.exact else 0j
        return self.entry(i, j)


def truncate_kernel(k: TriangularKernel, window) -> np.ndarray:
    """Dense ``N x N`` section with entries ``(i, j)``, ``1 <= j <= i <= N``; upper triangle exactly 0."""
    N = _window(window)
    if k.materialize is not None:
        M = np.array(k.materialize(N), dtype=object if k.exact else np.complex128)
        M[np.triu_indices(N, 1)] = 0
        return M
    if k.exact:
        M = np.full((N, N), Fraction(0), dtype=object)
    else:
        M = np.zeros((N, N), dtype=np.complex128)
    for i in range(1, N + 1):
        for j in range(1, i + 1):
            try:
                M[i - 1, j - 1] = k.entry(i, j)
            except Exception as exc:  # noqa: BLE001 - re-raised with location
                raise KernelEntryError(i, j, exc) from exc
    return M


def compose(a: TriangularKernel, b: TriangularKernel) -> TriangularKernel:
    """Kernel of ``a o b``: ``sum_{k=j}^{i} a(i,k) b(k,j)``."""
    exact = a.exact and b.exact

    def entry(i, j):
        total = Fraction(0) if exact else 0j
        for k in range(j, i + 1):
            total = total + a(i, k) * b(k, j)
        return total

    return TriangularKernel(entry, f"({a.description})∘({b.description})", exact=exact)


def identity_kernel(exact: bool = True) -> TriangularKernel:
    one, zero = (Fraction(1), Fraction(0)) if exact else (1 + 0j, 0j)
    return TriangularKernel(lambda i, j: one if i == j else zero, "I", exact=exact)


def cesaro_kernel(exact: bool = True) -> TriangularKernel:
    if exact:
        return TriangularKernel(lambda i, j: Fraction(1, i), "C", exact=True)

    def dense(N):
        return np.tril(np.repeat(1.0 / np.arange(1, N + 1)[:, None], N, axis=1))

    return TriangularKernel(lambda i, j: 1.0 / i + 0j, "C", materialize=dense)


def inverse_cesaro_kernel(exact: bool = True) -> TriangularKernel:
    """``C^{-1}``: ``i`` on the diagonal, ``-(i-1)`` just below it."""

    def entry(i, j):
        if j == i:
            v = i
        elif j == i - 1:
            v = -(i - 1)
        else:
            v = 0
        return Fraction(v) if exact else complex(v)

    return TriangularKernel(entry, "C^-1", exact=exact)


# --- CSV interchange ---------------------------------------------------------

def _open(target, mode):
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        return open(target, mode, newline=""), True
    return target, False


def write_vector_csv(x: SequenceVector, target) -> None:
    """CSV with header ``index,re,im``; exact entries are written as fractions."""
    fh, close = _open(target, "w")
    try:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for k, v in enumerate(x.entries, start=1):
            if isinstance(v, Fraction):
                re, im = str(v), "0"
            elif isinstance(v, GaussianRational):
                re, im = str(v.re), str(v.im)
            else:
                z = complex(v)
                re, im = repr(z.real), repr(z.imag)
            w.writerow([k, re, im])
    finally:
        if close:
            fh.close()


def read_vector_csv(source, exact: bool = False) -> SequenceVector:
    fh, close = _open(source, "r")
    try:
        rows = list(csv.DictReader(fh))
    finally:
        if close:
            fh.close()
    if not rows:
        raise ValueError("vector CSV has no rows")
    rows.sort(key=lambda r: int(r["index"]))
    if [int(r["index"]) for r in rows] != list(range(1, len(rows) + 1)):
        raise ValueError("vector CSV indices must be exactly 1..N")
    if exact:
        vals = []
        for r in rows:
            re, im = Fraction(r["re"]), Fraction(r["im"])
            vals.append(GaussianRational(re, im) if im else re)
        return SequenceVector.from_values(vals, exact=True)
    return SequenceVector.from_values([complex(float(r["re"]), float(r["im"])) for r in rows])


def _fmt(v) -> str:
    if isinstance(v, (Fraction, GaussianRational)):
        return str(v)
    z = complex(v)
    if z.imag == 0:
        return repr(z.real)
    return repr(z).strip("()")


def write_matrix_csv(M, target) -> None:
    """Row-major CSV preceded by a ``# N=<size>`` comment line."""
    M = np.asarray(M)
    fh, close = _open(target, "w")
    try:
        fh.write(f"# N={M.shape[0]}\n")
        w = csv.writer(fh)
        for row in M:
            w.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()


def read_matrix_csv(source) -> np.ndarray:
    fh, close = _open(source, "r")
    try:
        text = fh.read()
    finally:
        if close:
            fh.close()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# N="):
        raise ValueError("matrix CSV must start with a '# N=' line")
    N = int(lines[0][4:])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    if len(rows) != N or any(len(r) != N for r in rows):
        raise ValueError(f"matrix CSV is not {N}x{N}")
    return np.array([[complex(v.replace("i", "j")) for v in r] for r in rows])
