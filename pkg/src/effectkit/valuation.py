"""Valuations on effects: axiom checks, linear extension, reconstruction.

A valuation assigns each effect a number in [0, 1]; the axioms are

  (P1) 0 <= v(E) <= 1,
  (P2) v(I) = 1,
  (P3) v(E + F + ...) = v(E) + v(F) + ...  whenever E + F + ... <= I.

Equivalently, v(E) >= 0 with values summing to 1 over every POVM. Any such
valuation is the Born functional E -> tr[rho E] of a unique density operator
rho; this module makes that correspondence executable in both directions:
checking the axioms on finite tables, extending a valuation from effects to
positive and then to all Hermitian operators through homogeneity and Jordan
splitting, recovering rho by linear inversion over an informationally
complete frame, and simulating outcome frequencies that estimate v.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import jsonio
from .effects import Effect, Povm, warn_duplicate_operators
from .errors import (
    DimMismatch,
    FrameDeficient,
    NotPositive,
    ProbabilityDeficit,
    RecordMismatch,
    SchemaError,
    TraceNotOne,
    UnknownLabel,
    ValuesInconsistent,
)
from .operators import (
    HermitianOperator,
    eig_hermitian,
    eigenvalues_of,
    frobenius_inner,
    is_psd,
    operator_norm,
)

P1_SLACK = 1e-12
CHECK_TOL = 1e-8
JORDAN_ZERO_TOL = 1e-12
SV_CUTOFF = 1e-10
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive, trace-1 operator; pass validate=False only for diagnostics
    of reconstructions that are allowed to be slightly infeasible."""

    op: HermitianOperator
    validate: bool = True

    def __post_init__(self):
        if self.validate:
            vals = eigenvalues_of(self.op)
            if vals[0] < -1e-9:
                raise NotPositive(
                    f"state has negative eigenvalue {vals[0]:.6e}",
                    min_eig=float(vals[0]))
            tr = float(np.trace(self.op.array).real)
            if abs(tr - 1.0) > 1e-9:
                raise TraceNotOne(f"state trace {tr:.12g} is not 1")

    @property
    def dim(self) -> int:
        return self.op.dim

    def to_json_dict(self) -> dict:
        return self.op.to_json_dict()

    @classmethod
    def from_json_dict(cls, obj) -> "DensityOperator":
        return cls(HermitianOperator.from_json_dict(obj))


@dataclass(frozen=True)
class TableEntry:
    effect: Effect
    value: float
    stderr: float | None = None


class ValuationTable:
    """Ordered map label -> (effect, value).

    Construction does not reject out-of-range values: a table may encode a
    *candidate* valuation, and the axiom checkers below are the judges. A
    valid table has every value in [-1e-12, 1 + 1e-12].
    """

    def __init__(self, dim: int, entries: Iterable[TableEntry]):
        self.dim = int(dim)
        self._entries: dict[str, TableEntry] = {}
        for entry in entries:
            if entry.effect.dim != self.dim:
                raise DimMismatch(
                    f"effect {entry.effect.label!r} has dim {entry.effect.dim}, "
                    f"table has dim {self.dim}")
            if entry.effect.label in self._entries:
                raise ValueError(f"duplicate label {entry.effect.label!r}")
            if not np.isfinite(entry.value):
                raise ValueError(f"value for {entry.effect.label!r} is not finite")
            self._entries[entry.effect.label] = entry
        warn_duplicate_operators(e.effect for e in self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, label: str) -> bool:
        return label in self._entries

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def entry(self, label: str) -> TableEntry:
        try:
            return self._entries[label]
        except KeyError:
            raise UnknownLabel(f"label {label!r} not in valuation table") from None

    def value(self, label: str) -> float:
        return self.entry(label).value

    def effect(self, label: str) -> Effect:
        return self.entry(label).effect

    def items(self) -> Iterable[tuple[str, TableEntry]]:
        return self._entries.items()

    def values(self) -> list[float]:
        return [e.value for e in self._entries.values()]

    @classmethod
    def from_born(cls, rho: DensityOperator, effects: Iterable[Effect]
                  ) -> "ValuationTable":
        effects = list(effects)
        dim = effects[0].dim if effects else rho.dim
        return cls(dim, (TableEntry(e, born(rho, e)) for e in effects))

    @classmethod
    def from_values(cls, effects: Iterable[Effect], values: Iterable[float]
                    ) -> "ValuationTable":
        effects = list(effects)
        values = list(values)
        if len(effects) != len(values):
            raise ValueError("effects and values differ in length")
        if not effects:
            raise ValueError("empty valuation table")
        return cls(effects[0].dim,
                   (TableEntry(e, float(v)) for e, v in zip(effects, values)))

    def to_json_dict(self) -> dict:
        entries = []
        for label, entry in self._entries.items():
            item: dict = {"label": label, "value": entry.value}
            if entry.stderr is not None:
                item["stderr"] = entry.stderr
            entries.append(item)
        return {"dim": self.dim, "entries": entries}

    @classmethod
    def from_json_dict(cls, obj, effects_by_label: Mapping[str, Effect]
                       ) -> "ValuationTable":
        obj = jsonio.expect_dict(obj, "valuation table")
        dim = jsonio.expect_int(jsonio.expect_key(obj, "dim", "valuation table"),
                                "valuation.dim")
        items = jsonio.expect_list(
            jsonio.expect_key(obj, "entries", "valuation table"),
            "valuation.entries")
        entries = []
        for k, item in enumerate(items):
            item = jsonio.expect_dict(item, f"valuation.entries[{k}]")
            label = jsonio.expect_str(
                jsonio.expect_key(item, "label", f"valuation.entries[{k}]"),
                "entry.label")
            value = jsonio.expect_number(
                jsonio.expect_key(item, "value", f"valuation.entries[{k}]"),
                "entry.value")
            if label not in effects_by_label:
                raise UnknownLabel(f"label {label!r} not in the effects file")
            entries.append(TableEntry(effects_by_label[label], value))
        return cls(dim, entries)


@dataclass(frozen=True)
class Violation:
    relation: str
    lhs: float
    rhs: float
    deviation: float

    def to_json_dict(self) -> dict:
        return {"relation": self.relation, "lhs": self.lhs, "rhs": self.rhs,
                "deviation": self.deviation}


@dataclass
class AxiomReport:
    """Outcome of checking (P1)-(P3) or the POVM normalization conditions.

    ``violations`` is empty iff all three flags are true; ``ill_posed``
    lists relations that were skipped because their operator sum exceeds the
    identity (they assert nothing about the valuation).
    """

    p1_ok: bool = True
    p2_ok: bool = True
    p3_ok: bool = True
    violations: list[Violation] = field(default_factory=list)
    ill_posed: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.p1_ok and self.p2_ok and self.p3_ok

    def to_json_dict(self) -> dict:
        return {
            "p1_ok": self.p1_ok,
            "p2_ok": self.p2_ok,
            "p3_ok": self.p3_ok,
            "violations": [v.to_json_dict() for v in self.violations],
            "ill_posed": list(self.ill_posed),
        }


@dataclass(frozen=True)
class AdditivityRelation:
    """Claim that v(target) = sum of v over the addend labels.

    ``target`` may be an effect label or the symbol ``"I"`` for the
    identity. Repeated addends are allowed and count with multiplicity.
    """

    addends: tuple[str, ...]
    target: str

    def describe(self) -> str:
        return " + ".join(self.addends) + " = " + self.target


@dataclass(frozen=True)
class SampleRecord:
    """Outcome counts of repeated measurements of one POVM."""

    povm_labels: tuple[str, ...]
    counts: tuple[int, ...]
    n: int
    seed: int

    def __post_init__(self):
        if len(self.povm_labels) != len(self.counts):
            raise RecordMismatch("counts and POVM label list differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if sum(self.counts) != self.n:
            raise ValueError("counts must sum to the number of shots")

    def to_json_dict(self) -> dict:
        return {"povm": list(self.povm_labels), "counts": list(self.counts),
                "n": self.n, "seed": self.seed}

    @classmethod
    def from_json_dict(cls, obj) -> "SampleRecord":
        obj = jsonio.expect_dict(obj, "sample record")
        labels = [jsonio.expect_str(x, "record.povm[i]") for x in
                  jsonio.expect_list(jsonio.expect_key(obj, "povm", "record"),
                                     "record.povm")]
        counts = [jsonio.expect_int(x, "record.counts[i]") for x in
                  jsonio.expect_list(jsonio.expect_key(obj, "counts", "record"),
                                     "record.counts")]
        n = jsonio.expect_int(jsonio.expect_key(obj, "n", "record"), "record.n")
        seed = jsonio.expect_int(jsonio.expect_key(obj, "seed", "record"),
                                 "record.seed")
        return cls(tuple(labels), tuple(counts), n, seed)


def born(rho: DensityOperator, e: Effect) -> float:
    """tr[rho E], clamped to [0, 1] against float drift."""
    if rho.dim != e.dim:
        raise DimMismatch(f"state dim {rho.dim} vs effect dim {e.dim}")
    return min(1.0, max(0.0, frobenius_inner(rho.op, e.op)))


def born_functional(rho: DensityOperator) -> Callable[[HermitianOperator], float]:
    """The Born valuation of ``rho`` as a callable on effect operators."""

    def v(op: HermitianOperator) -> float:
        if op.dim != rho.dim:
            raise DimMismatch(f"state dim {rho.dim} vs operator dim {op.dim}")
        return min(1.0, max(0.0, frobenius_inner(rho.op, op)))

    return v


def _identity_value(v: ValuationTable, tol: float) -> tuple[str, float] | None:
    eye = np.eye(v.dim)
    for label, entry in v.items():
        if np.linalg.norm(entry.effect.op.array - eye) <= tol * v.dim:
            return label, entry.value
    return None


def check_gpm(v: ValuationTable,
              relations: Sequence[AdditivityRelation],
              tol: float = CHECK_TOL) -> AxiomReport:
    """Check axioms (P1)-(P3) of a candidate valuation table.

    P1 is the range check on every stored value; P2 is checked when some
    label carries the identity operator; P3 checks each supplied additivity
    relation. A relation whose operator sum exceeds I (within 1e-8) asserts
    nothing and is recorded under ``ill_posed`` instead of being evaluated.
    The relations themselves are caller-asserted claims: resolve labels
    carefully, since an unknown label raises UnknownLabel.
    """
    report = AxiomReport()
    for label, entry in v.items():
        if not (-P1_SLACK <= entry.value <= 1.0 + P1_SLACK):
            report.p1_ok = False
            bound = min(max(entry.value, 0.0), 1.0)
            report.violations.append(Violation(
                f"P1 range: v({label})", entry.value, bound,
                abs(entry.value - bound)))

    ident = _identity_value(v, tol)
    if ident is not None:
        label, value = ident
        if abs(value - 1.0) > tol:
            report.p2_ok = False
            report.violations.append(Violation(
                f"P2: v({label}) = 1", value, 1.0, abs(value - 1.0)))

    eye = HermitianOperator.identity(v.dim)
    for rel in relations:
        ops = [v.effect(label).op for label in rel.addends]
        total = ops[0]
        for op in ops[1:]:
            total = total + op
        if not is_psd(eye - total, tol=tol):
            report.ill_posed.append(
                f"{rel.describe()}: operator sum exceeds identity")
            continue
        lhs = float(sum(v.value(label) for label in rel.addends))
        if rel.target == "I":
            rhs = ident[1] if ident is not None else 1.0
        else:
            rhs = v.value(rel.target)
        dev = abs(lhs - rhs)
        if dev > tol:
            report.p3_ok = False
            report.violations.append(Violation(rel.describe(), lhs, rhs, dev))
    return report


def check_effect_valuation(v: ValuationTable, povms: Sequence[Povm],
                           tol: float = CHECK_TOL) -> AxiomReport:
    """Check the POVM form of the axioms: v >= 0 and sum v(E_i) = 1.

    Nonnegativity failures land on the p1 flag, normalization failures on
    the p3 flag (they are the additivity axiom applied to a full POVM);
    p2 is implied by normalization and stays true here.
    """
    report = AxiomReport()
    for label, entry in v.items():
        if entry.value < -P1_SLACK:
            report.p1_ok = False
            report.violations.append(Violation(
                f"nonnegativity: v({label})", entry.value, 0.0, -entry.value))
    for k, povm in enumerate(povms):
        total = float(sum(v.value(label) for label in povm.labels))
        dev = abs(total - 1.0)
        if dev > tol:
            report.p3_ok = False
            desc = " + ".join(f"v({lb})" for lb in povm.labels)
            report.violations.append(
                Violation(f"POVM #{k}: {desc} = 1", total, 1.0, dev))
    return report


def extend_to_positive(v_effect: Callable[[HermitianOperator], float],
                       a: HermitianOperator,
                       psd_tol: float = 1e-9) -> float:
    """Extend a valuation from effects to a positive operator by scaling.

    Writes A = alpha E with alpha = max(||A||, 1), so E = A/alpha is an
    effect, and returns alpha * v(E). Homogeneity of valuations makes the
    result independent of which admissible alpha is chosen; that
    independence is a tested property, not an assumption.
    """
    vals = eigenvalues_of(a)
    if vals[0] < -psd_tol:
        raise NotPositive(
            f"operator has negative eigenvalue {vals[0]:.6e}",
            min_eig=float(vals[0]))
    alpha = max(operator_norm(a), 1.0)
    scaled = HermitianOperator.from_array(a.array / alpha)
    return alpha * v_effect(scaled)


def jordan_split(c: HermitianOperator, zero_tol: float = JORDAN_ZERO_TOL
                 ) -> tuple[HermitianOperator, HermitianOperator]:
    """Split C = C+ - C- along its spectrum; both parts are positive.

    Eigenvalues within ``zero_tol`` of zero are assigned to neither part,
    which keeps numerically-zero modes from flapping between signs.
    """
    decomp = eig_hermitian(c)
    vals, vecs = decomp.eigenvalues, decomp.eigenvectors
    pos = np.where(vals > zero_tol, vals, 0.0)
    neg = np.where(vals < -zero_tol, -vals, 0.0)
    c_pos = (vecs * pos) @ vecs.conj().T
    c_neg = (vecs * neg) @ vecs.conj().T
    return (HermitianOperator.from_array(c_pos),
            HermitianOperator.from_array(c_neg))


def extend_to_selfadjoint(v_effect: Callable[[HermitianOperator], float],
                          c: HermitianOperator) -> float:
    """Extend a valuation to an arbitrary Hermitian operator.

    Uses the Jordan split C = C+ - C- and returns v(C+) - v(C-); the value
    does not depend on which decomposition into positive parts is used
    (tested against random alternative splits).
    """
    c_pos, c_neg = jordan_split(c)
    return (extend_to_positive(v_effect, c_pos)
            - extend_to_positive(v_effect, c_neg))


def hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal basis of the real space of d x d Hermitian matrices.

    Returns an array of shape (d*d, d, d): unit diagonal matrices first,
    then symmetric and antisymmetric off-diagonal pairs, orthonormal under
    the trace inner product.
    """
    basis = np.zeros((dim * dim, dim, dim), dtype=np.complex128)
    k = 0
    for i in range(dim):
        basis[k, i, i] = 1.0
        k += 1
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            basis[k, i, j] = inv_sqrt2
            basis[k, j, i] = inv_sqrt2
            k += 1
            basis[k, i, j] = -1j * inv_sqrt2
            basis[k, j, i] = 1j * inv_sqrt2
            k += 1
    return basis


@dataclass
class ReconstructionDiagnostics:
    """Numerical health of a reconstructed state.

    ``residual`` is ||tr[rho E_k] - v_k||_2 for the returned state,
    ``rank`` the numerical rank of the frame (full rank is dim^2). When
    ``projected`` is true the pre-projection figures and the unprojected
    Hermitian solution are kept alongside.
    """

    residual: float
    trace_dev: float
    min_eig: float
    projected: bool
    rank: int
    frame_size: int
    pre_residual: float | None = None
    pre_trace_dev: float | None = None
    pre_min_eig: float | None = None
    unprojected: HermitianOperator | None = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "residual": self.residual,
            "trace_dev": self.trace_dev,
            "min_eig": self.min_eig,
            "projected": self.projected,
            "rank": self.rank,
            "frame_size": self.frame_size,
        }
        if self.projected:
            out["pre"] = {
                "residual": self.pre_residual,
                "trace_dev": self.pre_trace_dev,
                "min_eig": self.pre_min_eig,
            }
        return out


def _design_matrix(frame: Sequence[Effect], basis: np.ndarray) -> np.ndarray:
    rows = []
    for e in frame:
        rows.append(np.einsum("bij,ji->b", basis, e.op.array).real)
    return np.array(rows)


def project_to_density(h: HermitianOperator) -> DensityOperator:
    """Nearest-in-spirit density operator: clip negative eigenvalues to
    zero, then renormalize the trace to 1. Idempotent."""
    decomp = eig_hermitian(h)
    clipped = np.clip(decomp.eigenvalues, 0.0, None)
    total = float(np.sum(clipped))
    if total <= 0.0:
        raise NotPositive("operator has no positive spectral weight to keep")
    clipped /= total
    arr = (decomp.eigenvectors * clipped) @ decomp.eigenvectors.conj().T
    return DensityOperator(HermitianOperator.from_array(arr))


def reconstruct_density(frame: Sequence[Effect], values: Sequence[float],
                        min_norm: bool = False, project_psd: bool = False,
                        sv_cutoff: float = SV_CUTOFF,
                        residual_tol: float = RESIDUAL_TOL
                        ) -> tuple[DensityOperator, ReconstructionDiagnostics]:
    """Solve tr[rho E_k] = v_k for a Hermitian rho.

    The system is solved by SVD over an orthonormal Hermitian basis, with
    singular values below ``sv_cutoff * sigma_max`` treated as zero. A frame
    whose numerical rank is below dim^2 raises FrameDeficient unless
    ``min_norm`` is set, in which case the minimum-Frobenius-norm solution
    is returned and the rank deficit shows up in the diagnostics. A residual
    above ``residual_tol`` means the values are not the restriction of any
    linear functional and raises ValuesInconsistent.

    With ``project_psd`` the solution is projected to the nearest positive
    trace-1 operator (eigenvalue clipping, then trace renormalization);
    otherwise the returned state may violate positivity or unit trace by
    whatever amount the diagnostics report, and is built unvalidated.
    """
    frame = list(frame)
    if not frame:
        raise ValueError("reconstruction needs a nonempty frame")
    if len(frame) != len(values):
        raise ValueError("frame and values differ in length")
    dim = frame[0].dim
    for e in frame:
        if e.dim != dim:
            raise DimMismatch(f"effect {e.label!r} has dim {e.dim}, frame dim {dim}")
    vals = np.asarray([float(x) for x in values], dtype=np.float64)
    if np.any(vals < -P1_SLACK) or np.any(vals > 1.0 + P1_SLACK):
        raise ValueError("reconstruction values must lie in [0, 1]")

    basis = hermitian_basis(dim)
    design = _design_matrix(frame, basis)
    u, sigma, vt = np.linalg.svd(design, full_matrices=False)
    rank = int(np.sum(sigma > sv_cutoff * sigma[0])) if sigma.size else 0
    if rank < dim * dim and not min_norm:
        raise FrameDeficient(
            f"frame spans only {rank} of {dim * dim} dimensions",
            rank=rank, required=dim * dim)
    inv_sigma = np.where(sigma > sv_cutoff * sigma[0], 1.0 / sigma, 0.0)
    coords = vt.T @ (inv_sigma * (u.T @ vals))
    residual = float(np.linalg.norm(design @ coords - vals))
    if residual > residual_tol:
        raise ValuesInconsistent(
            f"values violate linearity: residual {residual:.3e} > "
            f"{residual_tol:g}", residual=residual)

    solution = HermitianOperator.from_array(
        np.einsum("b,bij->ij", coords, basis))
    sol_eigs = eigenvalues_of(solution)
    diag = ReconstructionDiagnostics(
        residual=residual,
        trace_dev=abs(float(np.trace(solution.array).real) - 1.0),
        min_eig=float(sol_eigs[0]),
        projected=False,
        rank=rank,
        frame_size=len(frame),
    )
    if not project_psd:
        return DensityOperator(solution, validate=False), diag

    projected = project_to_density(solution)
    proj_coords = np.einsum("bij,ji->b", basis, projected.op.array).real
    proj_eigs = eigenvalues_of(projected.op)
    diag_out = ReconstructionDiagnostics(
        residual=float(np.linalg.norm(design @ proj_coords - vals)),
        trace_dev=abs(float(np.trace(projected.op.array).real) - 1.0),
        min_eig=float(proj_eigs[0]),
        projected=True,
        rank=rank,
        frame_size=len(frame),
        pre_residual=diag.residual,
        pre_trace_dev=diag.trace_dev,
        pre_min_eig=diag.min_eig,
        unprojected=solution,
    )
    return projected, diag_out


def sample_outcomes(rho: DensityOperator, povm: Povm, n: int,
                    seed: int) -> SampleRecord:
    """Draw n i.i.d. outcomes from the Born distribution of (rho, povm).

    Sampling is inverse-CDF on the cumulative probability vector with ties
    broken toward the lower index, driven by PCG64(seed); a fixed seed gives
    a bit-identical record on every run.
    """
    if rho.dim != povm.dim:
        raise DimMismatch(f"state dim {rho.dim} vs POVM dim {povm.dim}")
    if n < 1:
        raise ValueError("shot count must be at least 1")
    probs = np.array([born(rho, e) for e in povm.effects])
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-8:
        raise ProbabilityDeficit(
            f"outcome probabilities sum to {total:.12g}, not 1")
    probs = probs / total
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random(n)
    idx = np.searchsorted(cum, draws, side="left")
    idx = np.minimum(idx, len(probs) - 1)
    counts = np.bincount(idx, minlength=len(probs))
    return SampleRecord(povm.labels, tuple(int(c) for c in counts), n, seed)


def estimate_valuation(record: SampleRecord, povm: Povm) -> ValuationTable:
    """Empirical valuation v(E_i) = counts_i / n with standard errors.

    The final entry is completed to make the table sum to exactly 1.0 in
    float arithmetic (it differs from counts/n by at most a few ulp), and
    each entry carries the binomial standard error sqrt(v(1-v)/n).
    """
    if record.povm_labels != povm.labels:
        raise RecordMismatch("record labels do not match the POVM")
    if len(record.counts) != len(povm.effects):
        raise RecordMismatch("record size does not match the POVM")
    n = record.n
    values = [c / n for c in record.counts]
    if values:
        head = 0.0
        for v in values[:-1]:
            head += v
        values[-1] = 1.0 - head
    entries = []
    for e, v in zip(povm.effects, values):
        stderr = float(np.sqrt(max(v * (1.0 - v), 0.0) / n))
        entries.append(TableEntry(e, v, stderr))
    return ValuationTable(povm.dim, entries)


def relations_from_json(obj) -> list[AdditivityRelation]:
    """Parse ``[{"addends": [...], "target": label|"I"}, ...]``."""
    items = jsonio.expect_list(obj, "relations")
    out = []
    for k, item in enumerate(items):
        item = jsonio.expect_dict(item, f"relations[{k}]")
        addends = tuple(
            jsonio.expect_str(x, f"relations[{k}].addends[i]")
            for x in jsonio.expect_list(
                jsonio.expect_key(item, "addends", f"relations[{k}]"),
                f"relations[{k}].addends"))
        if not addends:
            raise SchemaError(f"relations[{k}]: addends must be nonempty")
        target = jsonio.expect_str(
            jsonio.expect_key(item, "target", f"relations[{k}]"),
            f"relations[{k}].target")
        out.append(AdditivityRelation(addends, target))
    return out
