"""Effects, POVMs, projections, and the qubit Bloch parameterization.

An effect is a Hermitian operator E with 0 <= E <= I; a POVM is a finite
list of effects summing to the identity — one experiment's outcome set.
Effects carry caller-supplied string labels: identity of an effect across
measurement contexts is decided by label, never by float comparison, so
non-contextuality questions stay explicit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import (
    DimMismatch,
    DuplicateOperatorWarning,
    ExceedsIdentity,
    NotDimTwo,
    NotPositive,
    SchemaError,
    SumNotIdentity,
    TraceNotOne,
)
from .operators import (
    ComplexMatrix,
    HermitianOperator,
    eig_hermitian,
    eigenvalues_of,
    frobenius_distance,
)

EFFECT_TOL = 1e-9
POVM_TOL_PER_DIM = 1e-8
PROJECTION_TOL = 1e-8
SPECTRAL_GAP_TOL = 1e-9
DUPLICATE_OP_TOL = 1e-10

# Standard Pauli convention; sigma_y = [[0, -i], [i, 0]].
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
for _s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
    _s.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Effect:
    """Labeled operator with spectrum inside [0, 1] (within ``tol``)."""

    op: HermitianOperator
    label: str
    tol: float = EFFECT_TOL

    def __post_init__(self):
        vals = eigenvalues_of(self.op)
        lo, hi = float(vals[0]), float(vals[-1])
        if lo < -self.tol:
            raise NotPositive(
                f"effect {self.label!r}: minimum eigenvalue {lo:.6e} < 0",
                min_eig=lo)
        if hi > 1.0 + self.tol:
            raise ExceedsIdentity(
                f"effect {self.label!r}: maximum eigenvalue {hi:.6e} > 1",
                max_eig=hi)

    @property
    def dim(self) -> int:
        return self.op.dim

    def to_json_dict(self) -> dict:
        return {"label": self.label, "op": self.op.to_json_dict()}

    @classmethod
    def from_json_dict(cls, obj) -> "Effect":
        obj = jsonio.expect_dict(obj, "effect")
        label = jsonio.expect_str(jsonio.expect_key(obj, "label", "effect"),
                                  "effect.label")
        op = HermitianOperator.from_json_dict(jsonio.expect_key(obj, "op", "effect"))
        return cls(op, label)


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite list of effects on a common space, summing to the identity."""

    effects: tuple[Effect, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(self.effects))
        if not self.effects:
            raise SumNotIdentity("a POVM needs at least one effect")
        for e in self.effects:
            if e.dim != self.dim:
                raise DimMismatch(
                    f"effect {e.label!r} has dim {e.dim}, POVM has dim {self.dim}")
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for e in self.effects:
            total = total + e.op.array
        residual = float(np.linalg.norm(total - np.eye(self.dim)))
        if residual > POVM_TOL_PER_DIM * self.dim:
            raise SumNotIdentity(
                f"effects sum to I only within {residual:.6e} (Frobenius)",
                residual=residual)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.effects)

    def __len__(self) -> int:
        return len(self.effects)

    def to_json_dict(self) -> dict:
        return {"dim": self.dim,
                "effects": [e.to_json_dict() for e in self.effects]}

    @classmethod
    def from_json_dict(cls, obj) -> "Povm":
        dim, effects = effects_from_json_dict(obj)
        return cls(tuple(effects), dim)


@dataclass(frozen=True)
class BlochVector:
    """Real 3-vector a parameterizing A = (I + a.sigma)/2 on a qubit."""

    a: tuple[float, float, float]

    def __post_init__(self):
        ax, ay, az = (float(v) for v in self.a)
        if not all(np.isfinite(v) for v in (ax, ay, az)):
            raise ValueError("Bloch components must be finite")
        object.__setattr__(self, "a", (ax, ay, az))

    @property
    def norm(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.a)))

    def to_json_dict(self) -> dict:
        return {"a": list(self.a)}

    @classmethod
    def from_json_dict(cls, obj) -> "BlochVector":
        obj = jsonio.expect_dict(obj, "bloch vector")
        comps = jsonio.expect_list(jsonio.expect_key(obj, "a", "bloch vector"),
                                   "bloch.a")
        if len(comps) != 3:
            raise SchemaError("bloch.a must have exactly 3 components")
        return cls(tuple(jsonio.expect_number(c, "bloch.a[i]") for c in comps))


def validate_effect(op: HermitianOperator, label: str = "E",
                    tol: float = EFFECT_TOL) -> Effect:
    """Return a labeled Effect, or raise NotPositive / ExceedsIdentity."""
    return Effect(op, label, tol)


def validate_povm(effects, dim: int | None = None) -> Povm:
    """Assemble a Povm from effects, or raise SumNotIdentity / DimMismatch."""
    effects = tuple(effects)
    if not effects:
        raise SumNotIdentity("a POVM needs at least one effect")
    d = dim if dim is not None else effects[0].dim
    return Povm(effects, d)


def is_projection(e: Effect, tol: float = PROJECTION_TOL) -> bool:
    """True iff ||E^2 - E||_F <= tol (idempotent effect)."""
    arr = e.op.array
    return bool(np.linalg.norm(arr @ arr - arr) <= tol)


def complement(e: Effect, label: str | None = None) -> Effect:
    """The complementary effect I - E (an involution on effects)."""
    comp = HermitianOperator.identity(e.dim) - e.op
    return Effect(comp, label if label is not None else f"not({e.label})")


def bloch_to_operator(a: BlochVector) -> HermitianOperator:
    """Assemble (I + a.sigma)/2; the trace is exactly 1 by construction.

    Any 3-vector is accepted; whether the result is an effect or a state is
    judged by the downstream validators (|a| <= 1 gives a positive operator,
    |a| = 1 a rank-1 projection).
    """
    ax, ay, az = a.a
    m = np.empty((2, 2), dtype=np.complex128)
    m[0, 0] = 0.5 + 0.5 * az
    m[1, 1] = 1.0 - (0.5 + 0.5 * az)
    m[0, 1] = 0.5 * ax - 0.5j * ay
    m[1, 0] = 0.5 * ax + 0.5j * ay
    return HermitianOperator(ComplexMatrix(m))


def operator_to_bloch(h: HermitianOperator, trace_tol: float = 1e-9) -> BlochVector:
    """Extract a_k = tr[h sigma_k] from a trace-1 qubit operator.

    Round-trips with :func:`bloch_to_operator` to 1e-12.
    """
    if h.dim != 2:
        raise NotDimTwo(f"Bloch extraction needs a 2x2 operator, got dim {h.dim}")
    tr = np.trace(h.array)
    if abs(tr - 1.0) > trace_tol:
        raise TraceNotOne(f"trace {tr:.12g} is not 1 within {trace_tol:g}")
    arr = h.array
    ax = float(np.einsum("ij,ji->", arr, SIGMA_X).real)
    ay = float(np.einsum("ij,ji->", arr, SIGMA_Y).real)
    az = float(np.einsum("ij,ji->", arr, SIGMA_Z).real)
    return BlochVector((ax, ay, az))


def spectral_split(e: Effect, gap_tol: float = SPECTRAL_GAP_TOL
                   ) -> list[tuple[float, Effect]]:
    """Decompose an effect as sum_i lambda_i P_i over its distinct eigenvalues.

    Eigenvalues closer than ``gap_tol`` are merged into one group (chained),
    and each group's spectral projector is returned as an Effect labeled
    ``"<label>:proj<i>"``. Groups come back in ascending eigenvalue order.

    Postconditions enforced here: the projectors are idempotent to 1e-8,
    mutually orthogonal, complete (sum to I), and reassemble the input to
    1e-9; violations raise ConvergenceFailure via the eigensolver checks.
    """
    decomp = eig_hermitian(e.op)
    vals, vecs = decomp.eigenvalues, decomp.eigenvectors
    groups: list[list[int]] = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[groups[-1][-1]] <= gap_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out: list[tuple[float, Effect]] = []
    for gi, idxs in enumerate(groups):
        v = vecs[:, idxs]
        proj = HermitianOperator.from_array(v @ v.conj().T)
        value = float(np.mean(vals[idxs]))
        out.append((value, Effect(proj, f"{e.label}:proj{gi}", tol=1e-8)))
    return out


def effects_from_json_dict(obj) -> tuple[int, list[Effect]]:
    """Parse ``{"dim": d, "effects": [...]}`` (shared by POVM and frame files)."""
    obj = jsonio.expect_dict(obj, "effects file")
    dim = jsonio.expect_int(jsonio.expect_key(obj, "dim", "effects file"),
                            "effects.dim")
    items = jsonio.expect_list(jsonio.expect_key(obj, "effects", "effects file"),
                               "effects.effects")
    effects = [Effect.from_json_dict(item) for item in items]
    for e in effects:
        if e.dim != dim:
            raise DimMismatch(
                f"effect {e.label!r} has dim {e.dim}, file declares dim {dim}")
    return dim, effects


def warn_duplicate_operators(effects, tol: float = DUPLICATE_OP_TOL) -> None:
    """Warn when two distinct labels carry numerically identical operators."""
    items = list(effects)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            a, b = items[i], items[j]
            if a.label == b.label or a.dim != b.dim:
                continue
            if frobenius_distance(a.op, b.op) < tol:
                warnings.warn(
                    f"labels {a.label!r} and {b.label!r} carry the same "
                    f"operator (Frobenius distance < {tol:g})",
                    DuplicateOperatorWarning,
                    stacklevel=2)
