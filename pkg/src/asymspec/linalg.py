"""Dense complex matrix arithmetic, LU solves, and the spectral norm.

All operations are pure: inputs are never mutated and results are freshly
allocated, so matrices can be shared freely between threads and workers.
Singularity is reported as a value (``solve_inverse`` returns ``None``), not
as an exception, because downstream resolvent scans treat it as data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter, DimensionMismatch, OutOfRange, SchemaError

# Relative pivot threshold below which LU declares the matrix singular.
PIVOT_RTOL = 1e-14
# Power iteration: relative tolerance on successive norm estimates, and cap.
NORM_RTOL = 1e-12
NORM_MAX_ITER = 5000


class ComplexMatrix:
    """Immutable square matrix of complex128 entries.

    Construction validates squareness and finiteness; the backing array is
    marked read-only and exposed via :attr:`array`.
    """

    __slots__ = ("_a",)

    def __init__(self, entries) -> None:
        a = np.asarray(entries, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise BadParameter(f"expected a square matrix, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise BadParameter("matrix entries must be finite")
        a = a.copy()
        a.setflags(write=False)
        self._a = a

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only complex128 view of the entries."""
        return self._a

    def adjoint(self) -> "ComplexMatrix":
        return ComplexMatrix(self._a.conj().T)

    @staticmethod
    def identity(dim: int) -> "ComplexMatrix":
        return ComplexMatrix(np.eye(dim, dtype=np.complex128))

    @staticmethod
    def zeros(dim: int) -> "ComplexMatrix":
        return ComplexMatrix(np.zeros((dim, dim), dtype=np.complex128))

    @staticmethod
    def diagonal(entries) -> "ComplexMatrix":
        values = np.asarray(entries, dtype=np.complex128)
        if values.ndim != 1 or values.size < 1:
            raise BadParameter("diagonal wants a nonempty 1-d entry list")
        return ComplexMatrix(np.diag(values))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ComplexMatrix(dim={self.dim})"


def jordan_block(dim: int, eigenvalue: complex) -> ComplexMatrix:
    """Single Jordan block: ``eigenvalue`` on the diagonal, ones above it."""
    if dim < 1:
        raise BadParameter("jordan_block needs dim >= 1")
    a = np.zeros((dim, dim), dtype=np.complex128)
    np.fill_diagonal(a, complex(eigenvalue))
    for i in range(dim - 1):
        a[i, i + 1] = 1.0
    return ComplexMatrix(a)


def _check_same_dim(a: ComplexMatrix, b: ComplexMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def add(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    _check_same_dim(a, b)
    return ComplexMatrix(a.array + b.array)


def sub(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    _check_same_dim(a, b)
    return ComplexMatrix(a.array - b.array)


def mul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    _check_same_dim(a, b)
    return ComplexMatrix(a.array @ b.array)


def scale(a: ComplexMatrix, factor: complex) -> ComplexMatrix:
    return ComplexMatrix(complex(factor) * a.array)


def matrix_power(a: ComplexMatrix, n: int) -> ComplexMatrix:
    """``a**n`` for n >= 0 by binary exponentiation; ``a**0`` is the identity."""
    if n < 0:
        raise OutOfRange("matrix_power wants n >= 0")
    result = np.eye(a.dim, dtype=np.complex128)
    base = a.array
    k = n
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return ComplexMatrix(result)


def max_abs(a: ComplexMatrix) -> float:
    """Largest entry magnitude (the max-abs norm)."""
    return float(np.abs(a.array).max())


# ---------------------------------------------------------------------------
# LU inversion with partial pivoting


def _lu_inverse(a: np.ndarray) -> np.ndarray | None:
    """Invert via LU with partial pivoting; ``None`` when a pivot collapses.

    A pivot is considered collapsed when its magnitude falls below
    ``PIVOT_RTOL`` times the largest entry magnitude of the input.
    """
    n = a.shape[0]
    scale_ = float(np.abs(a).max())
    if scale_ == 0.0:
        return None
    threshold = PIVOT_RTOL * scale_
    lu = np.array(a, dtype=np.complex128)
    # Right-hand side starts as the identity and absorbs the row swaps.
    x = np.eye(n, dtype=np.complex128)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < threshold:
            return None
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            x[[k, p]] = x[[p, k]]
        col = lu[k + 1 :, k] / lu[k, k]
        lu[k + 1 :, k] = col
        lu[k + 1 :, k + 1 :] -= np.outer(col, lu[k, k + 1 :])
        # Forward substitution interleaved with elimination.
        x[k + 1 :] -= np.outer(col, x[k])
    for k in range(n - 1, -1, -1):
        x[k] /= lu[k, k]
        if k:
            x[:k] -= np.outer(lu[:k, k], x[k])
    return x


@dataclass(frozen=True)
class Inverse:
    """An inverse together with its max-abs residual ``|a @ inv - I|``."""

    matrix: ComplexMatrix
    residual: float


def solve_inverse(a) -> Inverse | None:
    """LU-invert with partial pivoting; ``None`` signals a singular input.

    Accepts a ComplexMatrix or a raw square array.
    """
    mat = a if isinstance(a, ComplexMatrix) else ComplexMatrix(a)
    inv = _lu_inverse(mat.array)
    if inv is None:
        return None
    residual = float(
        np.abs(mat.array @ inv - np.eye(mat.dim, dtype=np.complex128)).max()
    )
    return Inverse(ComplexMatrix(inv), residual)


# ---------------------------------------------------------------------------
# Spectral norm by power iteration on the Gram matrix


@dataclass(frozen=True)
class SpectralNorm:
    value: float
    converged: bool
    iterations: int


def _spectral_norm(a: np.ndarray) -> tuple[float, bool, int]:
    """Power iteration on ``a^H a`` from the all-ones start vector.

    Stops when successive estimates agree to ``NORM_RTOL`` relative, or at
    ``NORM_MAX_ITER`` iterations (the last estimate is still returned, with
    ``converged`` false). Ties between top singular values are harmless: any
    limit of the Rayleigh quotient inside the top cluster equals the norm to
    within the cluster width.
    """
    n = a.shape[0]
    gram = a.conj().T @ a
    if n <= 3:
        return _spectral_norm_small(gram, n)
    dot = gram.dot
    vdot = np.vdot
    x = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
    prev = -1.0
    est = 0.0
    for it in range(1, NORM_MAX_ITER + 1):
        y = dot(x)
        rayleigh = vdot(x, y).real
        est = math.sqrt(rayleigh) if rayleigh > 0.0 else 0.0
        if prev >= 0.0 and abs(est - prev) <= NORM_RTOL * max(est, prev, 1e-300):
            return est, True, it
        norm_sq = vdot(y, y).real
        if norm_sq == 0.0:
            return 0.0, True, it
        x = y / math.sqrt(norm_sq)
        prev = est
    return est, False, NORM_MAX_ITER


def _spectral_norm_small(gram: np.ndarray, n: int) -> tuple[float, bool, int]:
    # Same iteration as above on unrolled Python complexes; numpy call overhead
    # dominates at these sizes and field sweeps hit this path millions of times.
    if n == 1:
        # one Rayleigh quotient already equals the norm; the loop would agree
        # with itself at the second iteration
        return math.sqrt(max(gram[0, 0].real, 0.0)), True, 2
    if n == 2:
        return _spectral_norm_2(gram)
    return _spectral_norm_3(gram)


def _spectral_norm_2(gram: np.ndarray) -> tuple[float, bool, int]:
    g00 = complex(gram[0, 0])
    g01 = complex(gram[0, 1])
    g10 = complex(gram[1, 0])
    g11 = complex(gram[1, 1])
    r = 1.0 / math.sqrt(2.0)
    x0 = x1 = r + 0j
    prev = -1.0
    est = 0.0
    for it in range(1, NORM_MAX_ITER + 1):
        y0 = g00 * x0 + g01 * x1
        y1 = g10 * x0 + g11 * x1
        rayleigh = (x0.conjugate() * y0 + x1.conjugate() * y1).real
        est = math.sqrt(rayleigh) if rayleigh > 0.0 else 0.0
        if prev >= 0.0 and abs(est - prev) <= NORM_RTOL * max(est, prev, 1e-300):
            return est, True, it
        norm_sq = y0.real * y0.real + y0.imag * y0.imag + y1.real * y1.real + y1.imag * y1.imag
        if norm_sq == 0.0:
            return 0.0, True, it
        scale = 1.0 / math.sqrt(norm_sq)
        x0 = y0 * scale
        x1 = y1 * scale
        prev = est
    return est, False, NORM_MAX_ITER


def _spectral_norm_3(gram: np.ndarray) -> tuple[float, bool, int]:
    g00 = complex(gram[0, 0])
    g01 = complex(gram[0, 1])
    g02 = complex(gram[0, 2])
    g10 = complex(gram[1, 0])
    g11 = complex(gram[1, 1])
    g12 = complex(gram[1, 2])
    g20 = complex(gram[2, 0])
    g21 = complex(gram[2, 1])
    g22 = complex(gram[2, 2])
    r = 1.0 / math.sqrt(3.0)
    x0 = x1 = x2 = r + 0j
    prev = -1.0
    est = 0.0
    for it in range(1, NORM_MAX_ITER + 1):
        y0 = g00 * x0 + g01 * x1 + g02 * x2
        y1 = g10 * x0 + g11 * x1 + g12 * x2
        y2 = g20 * x0 + g21 * x1 + g22 * x2
        rayleigh = (x0.conjugate() * y0 + x1.conjugate() * y1 + x2.conjugate() * y2).real
        est = math.sqrt(rayleigh) if rayleigh > 0.0 else 0.0
        if prev >= 0.0 and abs(est - prev) <= NORM_RTOL * max(est, prev, 1e-300):
            return est, True, it
        norm_sq = (
            y0.real * y0.real
            + y0.imag * y0.imag
            + y1.real * y1.real
            + y1.imag * y1.imag
            + y2.real * y2.real
            + y2.imag * y2.imag
        )
        if norm_sq == 0.0:
            return 0.0, True, it
        scale = 1.0 / math.sqrt(norm_sq)
        x0 = y0 * scale
        x1 = y1 * scale
        x2 = y2 * scale
        prev = est
    return est, False, NORM_MAX_ITER


def spectral_norm_result(a: ComplexMatrix) -> SpectralNorm:
    value, converged, iterations = _spectral_norm(a.array)
    return SpectralNorm(value, converged, iterations)


def operator_norm(a: ComplexMatrix) -> float:
    """Spectral (2-)norm; the convergence flag is on :func:`spectral_norm_result`."""
    return _spectral_norm(a.array)[0]


# ---------------------------------------------------------------------------
# JSON form: {"dim": n, "re": [...], "im": [...]} with row-major entries


def matrix_to_dict(a) -> dict:
    """Row-major JSON form; accepts a ComplexMatrix or a raw square array."""
    mat = a if isinstance(a, ComplexMatrix) else ComplexMatrix(a)
    flat = mat.array.ravel()
    return {
        "dim": mat.dim,
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in flat.imag],
    }


def matrix_from_dict(data: object, path: str = "") -> ComplexMatrix:
    if not isinstance(data, dict):
        raise SchemaError("expected a matrix object", path)
    missing = {"dim", "re", "im"} - set(data)
    if missing:
        raise SchemaError(f"missing keys {sorted(missing)}", path)
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError("dim must be a positive integer", f"{path}/dim")
    for key in ("re", "im"):
        part = data[key]
        if not isinstance(part, list) or len(part) != dim * dim:
            raise SchemaError(f"expected {dim * dim} numbers", f"{path}/{key}")
        if not all(isinstance(v, (int, float)) for v in part):
            raise SchemaError("entries must be numbers", f"{path}/{key}")
    re = np.array(data["re"], dtype=np.float64).reshape(dim, dim)
    im = np.array(data["im"], dtype=np.float64).reshape(dim, dim)
    try:
        return ComplexMatrix(re + 1j * im)
    except BadParameter as exc:
        raise SchemaError(str(exc), path) from exc
