"""Dense complex linear algebra on small Hilbert spaces.

Hermitian operators are the carriers for effects, states, and observables.
Everything here is immutable after construction and every operation is a pure
function, so values can be shared freely across threads. Dimensions are
capped at :data:`MAX_DIM` (rebind it before constructing larger matrices);
the dense O(d^3) routines below are meant for desk-scale work.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimMismatch, SchemaError
from . import jsonio

MAX_DIM = 64

EIG_RESIDUAL_RTOL = 1e-9
DEFAULT_HERM_TOL = 1e-10
DEFAULT_PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Immutable square complex matrix with finite entries."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.array(self.array, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        d = arr.shape[0]
        if d < 1:
            raise ValueError("matrix dimension must be at least 1")
        if d > MAX_DIM:
            raise ValueError(f"dimension {d} exceeds MAX_DIM={MAX_DIM}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    def to_json_dict(self) -> dict:
        """Wire format: ``{"dim": d, "entries": [[re, im], ...]}`` row-major."""
        flat = self.array.reshape(-1)
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json_dict(cls, obj) -> "ComplexMatrix":
        obj = jsonio.expect_dict(obj, "matrix")
        d = jsonio.expect_int(jsonio.expect_key(obj, "dim", "matrix"), "matrix.dim")
        entries = jsonio.expect_list(
            jsonio.expect_key(obj, "entries", "matrix"), "matrix.entries")
        if d < 1:
            raise SchemaError("matrix.dim must be a positive integer")
        if len(entries) != d * d:
            raise SchemaError(
                f"matrix.entries: expected {d * d} [re, im] pairs, got {len(entries)}")
        flat = np.empty(d * d, dtype=np.complex128)
        for k, pair in enumerate(entries):
            pair = jsonio.expect_list(pair, f"matrix.entries[{k}]")
            if len(pair) != 2:
                raise SchemaError(f"matrix.entries[{k}]: expected [re, im]")
            re = jsonio.expect_number(pair[0], f"matrix.entries[{k}][0]")
            im = jsonio.expect_number(pair[1], f"matrix.entries[{k}][1]")
            flat[k] = complex(re, im)
        return cls(flat.reshape(d, d))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hermitian matrix, canonically symmetrized at construction.

    The input is replaced by (M + M^dagger)/2 and the worst entrywise
    deviation |M[i][j] - conj(M[j][i])| of the original input is kept in
    ``herm_deviation`` so float drift in files is visible instead of being
    silently absorbed. ``tol`` records the hermiticity tolerance the caller
    considers acceptable; construction never rejects.
    """

    matrix: ComplexMatrix
    tol: float = DEFAULT_HERM_TOL
    herm_deviation: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("hermiticity tolerance must be non-negative")
        arr = self.matrix.array
        dev = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
        sym = (arr + arr.conj().T) / 2.0
        object.__setattr__(self, "matrix", ComplexMatrix(sym))
        object.__setattr__(self, "herm_deviation", dev)

    @property
    def array(self) -> np.ndarray:
        return self.matrix.array

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @classmethod
    def from_array(cls, arr, tol: float = DEFAULT_HERM_TOL) -> "HermitianOperator":
        return cls(ComplexMatrix(np.asarray(arr, dtype=np.complex128)), tol)

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(ComplexMatrix(np.eye(dim, dtype=np.complex128)))

    @classmethod
    def zero(cls, dim: int) -> "HermitianOperator":
        return cls(ComplexMatrix(np.zeros((dim, dim), dtype=np.complex128)))

    @classmethod
    def from_json_dict(cls, obj, tol: float = DEFAULT_HERM_TOL) -> "HermitianOperator":
        return cls(ComplexMatrix.from_json_dict(obj), tol)

    def to_json_dict(self) -> dict:
        return self.matrix.to_json_dict()

    # Hermitian operators are closed under real-linear combinations; these
    # are the only arithmetic dunders provided on purpose (a product of
    # Hermitian operators is generally not Hermitian).
    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_dim(self, other)
        return HermitianOperator.from_array(self.array + other.array)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_dim(self, other)
        return HermitianOperator.from_array(self.array - other.array)

    def __mul__(self, scalar) -> "HermitianOperator":
        return HermitianOperator.from_array(self.array * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator.from_array(-self.array)

    def allclose(self, other: "HermitianOperator", tol: float = 1e-12) -> bool:
        _require_same_dim(self, other)
        return frobenius_distance(self, other) <= tol


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.complex128)
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    def reassemble(self) -> np.ndarray:
        """Return sum_i lambda_i |v_i><v_i| as a dense array."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _require_same_dim(a, b) -> None:
    if a.dim != b.dim:
        raise DimMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")


def adjoint(m: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose."""
    return ComplexMatrix(m.array.conj().T)


def trace(m: ComplexMatrix | HermitianOperator) -> complex:
    """Sum of diagonal entries."""
    arr = m.array if isinstance(m, HermitianOperator) else m.array
    return complex(np.trace(arr))


def eig_hermitian(h: HermitianOperator) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian operator.

    Uses a deterministic dense solver; identical input bits give identical
    output bits within one build of the underlying LAPACK. Within a
    degenerate eigenvalue cluster the eigenvector basis is solver-chosen and
    must not be relied on downstream.

    Raises
    ------
    ConvergenceFailure
        If the solver fails, or the reconstruction residual
        ||sum_i l_i v_i v_i^H - M||_F exceeds 1e-9 * (1 + ||M||_F), or the
        eigenvectors are not orthonormal to 1e-9.
    """
    arr = h.array
    try:
        vals, vecs = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    decomp = EigenDecomposition(vals, vecs)
    norm = np.linalg.norm(arr)
    residual = np.linalg.norm(decomp.reassemble() - arr)
    if residual > EIG_RESIDUAL_RTOL * (1.0 + norm):
        raise ConvergenceFailure(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance")
    gram_dev = np.max(np.abs(vecs.conj().T @ vecs - np.eye(h.dim)))
    if gram_dev > 1e-9:
        raise ConvergenceFailure(
            f"eigenvectors not orthonormal (deviation {gram_dev:.3e})")
    return decomp


def eigenvalues_of(h: HermitianOperator) -> np.ndarray:
    """Ascending eigenvalues (no eigenvectors computed)."""
    try:
        return np.linalg.eigvalsh(h.array)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc


def is_psd(h: HermitianOperator, tol: float = DEFAULT_PSD_TOL) -> bool:
    """True iff the minimum eigenvalue is >= -tol."""
    return bool(eigenvalues_of(h)[0] >= -tol)


def operator_norm(h: HermitianOperator) -> float:
    """Spectral norm: the largest absolute eigenvalue."""
    vals = eigenvalues_of(h)
    return float(max(abs(vals[0]), abs(vals[-1])))


def frobenius_inner(a: HermitianOperator, b: HermitianOperator) -> float:
    """tr[a b], which is real for Hermitian operands."""
    _require_same_dim(a, b)
    return float(np.einsum("ij,ji->", a.array, b.array).real)


def frobenius_norm(h: HermitianOperator) -> float:
    return float(np.linalg.norm(h.array))


def frobenius_distance(a: HermitianOperator, b: HermitianOperator) -> float:
    _require_same_dim(a, b)
    return float(np.linalg.norm(a.array - b.array))
