"""Exact dense ground truth for the closed forms.

Matrices here are built from their textbook definitions and inverted by plain
substitution in rational (or Gaussian-rational) arithmetic. Nothing in this
module reuses the closed-form code paths it checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .exact import GaussianRational

__all__ = [
    "SingularMatrixError",
    "OracleMismatch",
    "ExactMatrix",
    "dense_triangular_inverse",
    "cesaro_matrix",
    "OracleCheck",
    "OracleReport",
    "oracle_suite",
    "MAX_N",
]

MAX_N = 50


class SingularMatrixError(ZeroDivisionError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"zero diagonal entry at index {index}")


class OracleMismatch(AssertionError):
    pass


def _q(v):
    if isinstance(v, (Fraction, GaussianRational)):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"exact matrices hold rationals only, got {type(v).__name__}")


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    """Square matrix of exact entries (``Fraction`` or ``GaussianRational``)."""

    entries: np.ndarray

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("exact matrices are square")
        for v in e.flat:
            _q(v)

    @classmethod
    def from_function(cls, f: Callable, N: int) -> "ExactMatrix":
        e = np.empty((N, N), dtype=object)
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                e[i - 1, j - 1] = _q(f(i, j))
        return cls(e)

    @classmethod
    def identity(cls, N: int) -> "ExactMatrix":
        return cls.from_function(lambda i, j: Fraction(int(i == j)), N)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i - 1, j - 1]

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        N = self.N
        out = np.empty((N, N), dtype=object)
        for i in range(N):
            for j in range(N):
                acc = Fraction(0)
                for k in range(N):
                    a, b = self.entries[i, k], other.entries[k, j]
                    if a and b:
                        acc = acc + a * b
                out[i, j] = acc
        return ExactMatrix(out)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(self.entries - other.entries)

    def scaled_identity_shift(self, lam) -> "ExactMatrix":
        """``self - lam I``."""
        out = self.entries.copy()
        for k in range(self.N):
            out[k, k] = out[k, k] - lam
        return ExactMatrix(out)

    def is_lower_triangular(self) -> bool:
        N = self.N
        return all(self.entries[i, j] == 0 for i in range(N) for j in range(i + 1, N))

    def is_identity(self) -> bool:
        N = self.N
        return all(self.entries[i, j] == (1 if i == j else 0) for i in range(N) for j in range(N))

    def first_difference(self, other, tol=None):
        """First ``(i, j)`` (1-based) where ``other[i, j]`` differs, or ``None``."""
        N = self.N
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                a, b = self[i, j], other(i, j) if callable(other) else other[i, j]
                if tol is None:
                    if a != b:
                        return i, j, a, b
                elif abs(complex(a) - complex(b)) > tol * max(1.0, abs(complex(a))):
                    return i, j, a, b
        return None


def dense_triangular_inverse(M: ExactMatrix) -> ExactMatrix:
    """Inverse of a lower triangular matrix, one column at a time by forward substitution."""
    if not M.is_lower_triangular():
        raise ValueError("matrix is not lower triangular")
    N = M.N
    for k in range(N):
        if M.entries[k, k] == 0:
            raise SingularMatrixError(k + 1)
    X = np.empty((N, N), dtype=object)
    X[:] = Fraction(0)
    for c in range(N):
        for i in range(c, N):
            rhs = Fraction(1) if i == c else Fraction(0)
            for k in range(c, i):
                rhs = rhs - M.entries[i, k] * X[k, c]
            X[i, c] = rhs / M.entries[i, i]
    return ExactMatrix(X)


def cesaro_matrix(N: int) -> ExactMatrix:
    """``C`` from its definition: row i averages the first i coordinates."""
    return ExactMatrix.from_function(lambda i, j: Fraction(1, i) if j <= i else Fraction(0), N)


# --- suite ------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    detail: str = ""
    location: tuple | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "location": list(self.location) if self.location else None}


@dataclass(frozen=True)
class OracleReport:
    N: int
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.checks if not c.passed)

    def raise_on_failure(self):
        if not self.passed:
            c = self.failures[0]
            raise OracleMismatch(f"{c.name}: {c.detail} at {c.location}")

    def to_json(self) -> dict:
        return {"N": self.N, "passed": self.passed, "checks": [c.to_json() for c in self.checks]}


DEFAULT_LAMBDAS = (Fraction(2), Fraction(3, 7), GaussianRational(Fraction(2, 5), Fraction(3, 10)))
REJECTED_LAMBDAS = (Fraction(1, 3),)


def _mismatch(name, diff, what) -> OracleCheck:
    if diff is None:
        return OracleCheck(name, True, f"{what}: exact agreement")
    i, j, a, b = diff
    return OracleCheck(name, False, f"{what}: oracle {a} vs closed form {b}", (i, j))


def oracle_suite(N: int = 20, resolvent_entry: Callable | None = None, lambdas=DEFAULT_LAMBDAS,
                 rejected=REJECTED_LAMBDAS, s_max: int = 8) -> OracleReport:
    """Run every exact cross-check at window size N.

    ``resolvent_entry(i, j, lam)`` may be swapped in to check an alternative
    implementation (a corrupted one should fail check (b) at a located entry).
    """
    from . import criteria, ergodic, kernel, spectral

    if not 1 <= N <= MAX_N:
        raise ValueError(f"oracle window must lie in 1..{MAX_N}")
    res_entry = resolvent_entry or spectral.resolvent_entry
    checks = []
    C = cesaro_matrix(N)

    # (a) inverse Cesàro closed form
    Cinv = dense_triangular_inverse(C)
    closed = kernel.inverse_cesaro_kernel(exact=True)
    checks.append(_mismatch("a: inverse Cesàro", Cinv.first_difference(closed), "C^{-1}"))

    # (b) resolvent rows and the D/E recombination
    for lam in lambdas:
        oracle_inv = dense_triangular_inverse(C.scaled_identity_shift(lam))
        checks.append(_mismatch(f"b: resolvent lambda={lam}", oracle_inv.first_difference(lambda i, j: res_entry(i, j, lam)),
                                "(C - lambda I)^{-1}"))
        D, E = spectral.split_DE(lam)
        checks.append(_mismatch(f"b: D - E/lambda^2, lambda={lam}",
                                oracle_inv.first_difference(lambda i, j: D(i, j) - E(i, j) / (lam * lam)),
                                "recombination"))
    for lam in rejected:
        try:
            spectral.ResolventParams(lam)
        except spectral.SigmaProximityError:
            checks.append(OracleCheck(f"b: lambda={lam} rejected", True, "excluded point refused before any solve"))
        else:
            checks.append(OracleCheck(f"b: lambda={lam} rejected", False, "excluded point was accepted"))

    # (c) R against the inverse of the shifted I - C
    T = ExactMatrix.from_function(
        lambda i, j: (Fraction(1) if i == j else Fraction(0)) - (Fraction(1, i + 1) if j <= i else Fraction(0)), N)
    checks.append(_mismatch("c: R = T^{-1}", dense_triangular_inverse(T).first_difference(ergodic.r_matrix_entry), "R"))

    # (d) finitely supported eigenvectors of the dual
    Ct = ExactMatrix(C.entries.T.copy())
    for s in range(1, min(s_max, N) + 1):
        y = spectral.dual_eigenvector(Fraction(1, s), N)
        lhs = Ct.entries.dot(y.entries)
        bad = [i + 1 for i in range(N) if lhs[i] != y.entries[i] / s]
        support_ok = all(v == 0 for v in y.entries[s:])
        ok = not bad and support_ok
        checks.append(OracleCheck(f"d: C'y = y/{s}", ok,
                                  "exact eigen-identity and zeros beyond s" if ok else f"mismatch at rows {bad[:5]}",
                                  None if ok else ((bad or [s + 1])[0],)))

    # (e) truncation commutes with composition for lower triangular kernels
    pairs = {
        "C o C^{-1}": (kernel.cesaro_kernel(True), kernel.inverse_cesaro_kernel(True)),
        "C o C": (kernel.cesaro_kernel(True), kernel.cesaro_kernel(True)),
        "R o C": (kernel.TriangularKernel(ergodic.r_matrix_entry, exact=True), kernel.cesaro_kernel(True)),
    }
    for name, (a, b) in pairs.items():
        lhs = ExactMatrix(kernel.truncate_kernel(kernel.compose(a, b), N))
        rhs = ExactMatrix(kernel.truncate_kernel(a, N)) @ ExactMatrix(kernel.truncate_kernel(b, N))
        checks.append(_mismatch(f"e: truncate({name})", rhs.first_difference(lhs), "composition"))

    # (f) positive nonincreasing summable sequences have i c_i -> 0
    i = np.arange(1, 4097, dtype=np.longdouble)
    for label, logc in {"1/i^2": -2 * np.log(i), "1/i^1.5": -1.5 * np.log(i), "exp(-sqrt i)": -np.sqrt(i)}.items():
        v = criteria.knopp_check(logc)
        checks.append(OracleCheck(f"f: i c_i -> 0 for {label}", v.holds, v.status.value))
    return OracleReport(N, tuple(checks))
