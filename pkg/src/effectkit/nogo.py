"""Constructive no-go machinery for dispersion-free valuations.

Two complementary routes produce machine-checkable evidence that {0,1}-valued
valuations cannot cover all effects:

* :func:`witness_2d` builds the closed-form qubit counterexample. Two
  distinct Bloch directions define projections P and Q; any convex mixture
  E = l*P + (1-l)*Q has spectral weights strictly inside (0, 1), so a
  valuation that is linear and assigns 0 to both P and Q must give v(E) = 0
  while spectrality forces v(E) into {mu, 1-mu} with 0 < mu < 1.

* :func:`search_dispersion_free` runs an exhaustive backtracking search for
  {0,1} assignments satisfying per-context normalization and integer sum
  relations, returning either satisfying assignments or a minimal
  unsatisfiable core. Real-coefficient mixtures are deliberately outside
  this discrete model; they belong to the witness route.

Certificates from the search are re-checked by :func:`verify_certificate`
in pure integer arithmetic, independent of the solver code path.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import jsonio
from .effects import (
    BlochVector,
    Effect,
    Povm,
    bloch_to_operator,
    warn_duplicate_operators,
)
from .errors import (
    BadContext,
    BadRelation,
    ConvergenceFailure,
    DegenerateLambda,
    DimMismatch,
    NotUnitVectors,
    ParallelVectors,
    SchemaError,
    SumNotIdentity,
    UnknownLabel,
)
from .operators import HermitianOperator, eigenvalues_of
from .valuation import AdditivityRelation

UNIT_TOL = 1e-9
MIN_ANGLE = 1e-6
RELATION_TOL = 1e-10

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

DEFAULT_MAX_SOLUTIONS = 64
DEFAULT_NODE_BUDGET = 1_000_000


@dataclass(frozen=True, eq=False)
class Witness2D:
    """Closed-form qubit contradiction for a dispersion-free valuation."""

    n: BlochVector
    m: BlochVector
    lam: float
    c: BlochVector
    mu: float
    E: Effect
    R: Effect
    Rprime: Effect
    P: Effect
    Q: Effect
    violated_relation: str

    def to_json_dict(self) -> dict:
        return {
            "n": self.n.to_json_dict(),
            "m": self.m.to_json_dict(),
            "lambda": self.lam,
            "c": self.c.to_json_dict(),
            "mu": self.mu,
            "P": self.P.to_json_dict(),
            "Q": self.Q.to_json_dict(),
            "E": self.E.to_json_dict(),
            "R": self.R.to_json_dict(),
            "Rprime": self.Rprime.to_json_dict(),
            "violated_relation": self.violated_relation,
        }


def witness_2d(n: BlochVector, m: BlochVector, lam: float) -> Witness2D:
    """Build the mixture witness E = lam*P + (1-lam)*Q on a qubit.

    Requires unit Bloch vectors separated by more than 1e-6 rad and a mixing
    weight strictly inside (0, 1); additionally the mixture vector c must
    satisfy |c| < 1 - 1e-9, else the larger spectral weight degenerates to 1
    and there is no contradiction to certify.
    """
    for name, vec in (("n", n), ("m", m)):
        if abs(vec.norm - 1.0) > UNIT_TOL:
            raise NotUnitVectors(
                f"{name} has norm {vec.norm:.12g}, expected a unit vector")
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DegenerateLambda(f"mixing weight {lam:g} must lie strictly in (0, 1)")
    dot = sum(a * b for a, b in zip(n.a, m.a))
    angle = math.acos(min(1.0, max(-1.0, dot)))
    if angle <= MIN_ANGLE:
        raise ParallelVectors(
            f"directions subtend only {angle:.3e} rad; the mixture is "
            "(numerically) a projection and carries no contradiction")
    c = BlochVector(tuple(lam * a + (1.0 - lam) * b for a, b in zip(n.a, m.a)))
    if c.norm >= 1.0 - 1e-9:
        raise ParallelVectors(
            f"|c| = {c.norm:.12g} is too close to 1; the spectral weights "
            "degenerate and no contradiction arises")

    p = Effect(bloch_to_operator(n), "P")
    q = Effect(bloch_to_operator(m), "Q")
    e = Effect(lam * p.op + (1.0 - lam) * q.op, "E")
    mu = (1.0 + c.norm) / 2.0
    top = float(eigenvalues_of(e.op)[-1])
    if abs(mu - top) > 1e-9:
        raise ConvergenceFailure(
            f"closed-form weight {mu:.15g} disagrees with eigensolver {top:.15g}")

    if c.norm <= 1e-12:
        # E is maximally degenerate (E = I/2); any complementary projection
        # pair is a spectral pair, fix the z axis by convention.
        chat = (0.0, 0.0, 1.0)
    else:
        chat = tuple(v / c.norm for v in c.a)
    r = Effect(bloch_to_operator(BlochVector(chat)), "R")
    rprime = Effect(bloch_to_operator(BlochVector(tuple(-v for v in chat))),
                    "Rprime")
    relation = (
        f"v(E) = {lam:g}*v(P) + {1.0 - lam:g}*v(Q) = 0 by linearity, but the "
        f"spectral decomposition E = mu*R + (1-mu)*R' forces v(E) in "
        f"{{{mu:.12g}, {1.0 - mu:.12g}}}")
    return Witness2D(n=n, m=m, lam=lam, c=c, mu=mu, E=e, R=r, Rprime=rprime,
                     P=p, Q=q, violated_relation=relation)


@dataclass(frozen=True)
class ConstraintDesc:
    """One search constraint: a context normalization or a sum relation."""

    kind: str                      # "context" | "relation"
    labels: tuple[str, ...]        # context members or relation addends
    target: str | None = None      # relation target (label or "I")

    def describe(self) -> str:
        if self.kind == "context":
            return "context: " + " + ".join(f"v({lb})" for lb in self.labels) + " = 1"
        tgt = "1" if self.target == "I" else f"v({self.target})"
        return "relation: " + " + ".join(f"v({lb})" for lb in self.labels) + f" = {tgt}"

    def to_json_dict(self) -> dict:
        if self.kind == "context":
            return {"kind": "context", "labels": list(self.labels)}
        return {"kind": "relation", "addends": list(self.labels),
                "target": self.target}


@dataclass(frozen=True, eq=False)
class ContextSet:
    """Validated collection of effects, measurement contexts, and relations.

    Every context is a POVM over the shared effect pool (labels may repeat
    within a context) and every sum relation's operator identity holds to
    1e-10 in Frobenius norm.
    """

    effects: dict[str, Effect]
    contexts: tuple[tuple[str, ...], ...]
    sum_relations: tuple[AdditivityRelation, ...]

    @property
    def dim(self) -> int | None:
        for e in self.effects.values():
            return e.dim
        return None

    def constraints(self) -> list[ConstraintDesc]:
        out = [ConstraintDesc("context", ctx) for ctx in self.contexts]
        out.extend(ConstraintDesc("relation", rel.addends, rel.target)
                   for rel in self.sum_relations)
        return out


def build_context_set(effects: Iterable[Effect],
                      contexts: Sequence[Sequence[str]],
                      relations: Sequence[AdditivityRelation] = (),
                      discover: bool = False) -> ContextSet:
    """Validate a context set, optionally auto-discovering sum relations.

    Raises BadContext when a declared context is not a POVM and BadRelation
    when a claimed operator identity fails at 1e-10. With ``discover``,
    pairs of effects are scanned against every effect target and the
    identity, and triples against the identity only (O(k^3) checks); deeper
    scans are intentionally not attempted.
    """
    pool: dict[str, Effect] = {}
    for e in effects:
        if e.label in pool:
            raise ValueError(f"duplicate effect label {e.label!r}")
        pool[e.label] = e
    warn_duplicate_operators(pool.values())

    def resolve(label: str) -> Effect:
        if label not in pool:
            raise UnknownLabel(f"label {label!r} not among the loaded effects")
        return pool[label]

    checked_contexts = []
    for i, ctx in enumerate(contexts):
        members = tuple(str(lb) for lb in ctx)
        try:
            Povm(tuple(resolve(lb) for lb in members),
                 resolve(members[0]).dim if members else 0)
        except (SumNotIdentity, DimMismatch) as exc:
            raise BadContext(f"context #{i} {list(members)}: {exc}") from exc
        except IndexError:
            raise BadContext(f"context #{i} is empty") from None
        checked_contexts.append(members)

    checked_relations = list(relations)
    for rel in checked_relations:
        _check_relation_identity(rel, resolve)

    if discover:
        known = {(tuple(sorted(r.addends)), r.target) for r in checked_relations}
        for rel in discover_sum_relations(pool):
            key = (tuple(sorted(rel.addends)), rel.target)
            if key not in known:
                known.add(key)
                checked_relations.append(rel)

    return ContextSet(pool, tuple(checked_contexts), tuple(checked_relations))


def _check_relation_identity(rel: AdditivityRelation, resolve) -> None:
    ops = [resolve(lb).op for lb in rel.addends]
    total = ops[0]
    for op in ops[1:]:
        total = total + op
    if rel.target == "I":
        target_op = HermitianOperator.identity(total.dim)
    else:
        target_op = resolve(rel.target).op
    dev = float(np.linalg.norm(total.array - target_op.array))
    if dev > RELATION_TOL:
        raise BadRelation(
            f"claimed identity {rel.describe()} fails: Frobenius deviation "
            f"{dev:.3e} > {RELATION_TOL:g}")


def discover_sum_relations(pool: Mapping[str, Effect],
                           tol: float = RELATION_TOL) -> list[AdditivityRelation]:
    """Scan pairs (against every target and I) and triples (against I)."""
    labels = list(pool)
    arrays = {lb: pool[lb].op.array for lb in labels}
    dim = next(iter(pool.values())).dim if pool else 0
    eye = np.eye(dim)
    found: list[AdditivityRelation] = []
    for a, b in itertools.combinations_with_replacement(labels, 2):
        total = arrays[a] + arrays[b]
        if np.linalg.norm(total - eye) <= tol:
            found.append(AdditivityRelation((a, b), "I"))
        for t in labels:
            if t in (a, b):
                continue
            if np.linalg.norm(total - arrays[t]) <= tol:
                found.append(AdditivityRelation((a, b), t))
    for a, b, c in itertools.combinations_with_replacement(labels, 3):
        total = arrays[a] + arrays[b] + arrays[c]
        if np.linalg.norm(total - eye) <= tol:
            found.append(AdditivityRelation((a, b, c), "I"))
    return found


@dataclass
class SearchResult:
    """Outcome of the dispersion-free search.

    ``status`` is "sat", "unsat", or "unknown" (node budget exhausted before
    the search tree was closed — never mislabeled as unsat). Assignments are
    capped; ``total_solutions`` is the exact model count when the search ran
    to completion, else None.
    """

    status: str
    assignments: list[dict[str, int]]
    total_solutions: int | None
    unsat_core: list[ConstraintDesc]
    nodes_explored: int

    def to_json_dict(self, toolkit_version: str) -> dict:
        return {
            "status": self.status,
            "assignments": self.assignments,
            "core": [c.to_json_dict() for c in self.unsat_core],
            "nodes": self.nodes_explored,
            "total_solutions": self.total_solutions,
            "toolkit_version": toolkit_version,
        }


@dataclass(frozen=True)
class _Linear:
    terms: tuple[tuple[int, int], ...]   # (variable index, integer coefficient)
    rhs: int


def _to_linear(desc: ConstraintDesc, var_index: Mapping[str, int]) -> _Linear:
    coeffs: Counter[int] = Counter()
    if desc.kind == "context":
        for lb in desc.labels:
            coeffs[var_index[lb]] += 1
        rhs = 1
    else:
        for lb in desc.labels:
            coeffs[var_index[lb]] += 1
        if desc.target == "I":
            rhs = 1
        else:
            coeffs[var_index[desc.target]] -= 1
            rhs = 0
    terms = tuple((vi, c) for vi, c in coeffs.items() if c != 0)
    return _Linear(terms, rhs)


def _variables_of(constraints: Sequence[ConstraintDesc]) -> list[str]:
    seen: dict[str, None] = {}
    for desc in constraints:
        for lb in desc.labels:
            seen.setdefault(lb)
        if desc.kind == "relation" and desc.target != "I":
            seen.setdefault(desc.target)
    return list(seen)


class _Budget(Exception):
    pass


def _solve(constraints: Sequence[ConstraintDesc], node_budget: int,
           max_store: int, stop_after: int | None = None
           ) -> tuple[str, list[dict[str, int]], int | None, int]:
    """Exhaustive DFS with unit propagation over {0,1} variables.

    Returns (status, stored assignments, total count or None, nodes).
    """
    variables = _variables_of(constraints)
    var_index = {lb: i for i, lb in enumerate(variables)}
    linear = [_to_linear(desc, var_index) for desc in constraints]
    nv = len(variables)
    assign = [-1] * nv
    solutions: list[dict[str, int]] = []
    state = {"nodes": 0, "total": 0}

    def bounds(con: _Linear) -> tuple[int, int]:
        lo = hi = 0
        for vi, c in con.terms:
            x = assign[vi]
            if x == -1:
                if c > 0:
                    hi += c
                else:
                    lo += c
            else:
                lo += c * x
                hi += c * x
        return lo, hi

    def propagate(trail: list[int]) -> bool:
        changed = True
        while changed:
            changed = False
            for con in linear:
                lo, hi = bounds(con)
                if not lo <= con.rhs <= hi:
                    return False
                for vi, c in con.terms:
                    if assign[vi] != -1:
                        continue
                    if c > 0:
                        ok0 = lo <= con.rhs <= hi - c
                        ok1 = lo + c <= con.rhs <= hi
                    else:
                        ok0 = lo - c <= con.rhs <= hi
                        ok1 = lo <= con.rhs <= hi + c
                    if not ok0 and not ok1:
                        return False
                    if ok0 != ok1:
                        assign[vi] = 0 if ok0 else 1
                        trail.append(vi)
                        changed = True
                        lo, hi = bounds(con)
        return True

    def record_solution() -> None:
        state["total"] += 1
        if len(solutions) < max_store:
            solutions.append({variables[i]: assign[i] for i in range(nv)})

    def dfs() -> None:
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            raise _Budget
        if stop_after is not None and state["total"] >= stop_after:
            return
        vi = next((i for i in range(nv) if assign[i] == -1), None)
        if vi is None:
            record_solution()
            return
        for val in (0, 1):
            assign[vi] = val
            trail: list[int] = []
            if propagate(trail):
                dfs()
            for t in trail:
                assign[t] = -1
            assign[vi] = -1
            if stop_after is not None and state["total"] >= stop_after:
                return

    try:
        trail0: list[int] = []
        if propagate(trail0):
            dfs()
        complete = True
    except _Budget:
        complete = False

    if state["total"] > 0:
        total = state["total"] if complete and stop_after is None else None
        return SAT, solutions, total, state["nodes"]
    if complete:
        return UNSAT, [], 0, state["nodes"]
    return UNKNOWN, [], None, state["nodes"]


def _minimize_core(constraints: list[ConstraintDesc], node_budget: int
                   ) -> tuple[list[ConstraintDesc], int]:
    """Deletion-based shrinking in deterministic input order."""
    core = list(constraints)
    nodes = 0
    for desc in list(core):
        trial = [d for d in core if d is not desc]
        status, _, _, used = _solve(trial, node_budget, max_store=1,
                                    stop_after=1)
        nodes += used
        if status == UNSAT:
            core = trial
    return core, nodes


def search_dispersion_free(cs: ContextSet,
                           max_solutions: int = DEFAULT_MAX_SOLUTIONS,
                           node_budget: int = DEFAULT_NODE_BUDGET
                           ) -> SearchResult:
    """Search for {0,1} valuations satisfying every context and relation.

    The search is an exhaustive backtracking enumeration with unit
    propagation over the labels that occur in at least one constraint;
    effects mentioned in no constraint are unconstrained and excluded from
    the reported assignments. All arithmetic is exact (integers). On
    unsatisfiable inputs the result carries a minimal core found by
    deletion-based shrinking; if the node budget is exhausted first, the
    status is "unknown".
    """
    constraints = cs.constraints()
    status, solutions, total, nodes = _solve(
        constraints, node_budget, max_store=max_solutions)
    if status == UNSAT:
        core, extra = _minimize_core(constraints, node_budget)
        return SearchResult(UNSAT, [], 0, core, nodes + extra)
    return SearchResult(status, solutions, total, [], nodes)


def _eval_constraint(desc: ConstraintDesc, values: Mapping[str, int]) -> bool:
    total = sum(values[lb] for lb in desc.labels)
    if desc.kind == "context" or desc.target == "I":
        return total == 1
    return total == values[desc.target]


def verify_certificate(result: SearchResult, cs: ContextSet) -> bool:
    """Independently re-check a search result in pure integer arithmetic.

    SAT: every returned assignment must satisfy every constraint of the
    context set with values in {0,1}. UNSAT: the reported core must be made
    of the set's constraints and must be unsatisfiable under brute-force
    enumeration (no solver code involved). UNKNOWN asserts nothing and
    verifies vacuously. Any discrepancy returns False.
    """
    try:
        constraints = cs.constraints()
        if result.status == SAT:
            if not result.assignments:
                return False
            for assignment in result.assignments:
                if any(v not in (0, 1) for v in assignment.values()):
                    return False
                for desc in constraints:
                    if not _eval_constraint(desc, assignment):
                        return False
            return True
        if result.status == UNSAT:
            available = {(d.kind, d.labels, d.target) for d in constraints}
            for desc in result.unsat_core:
                if (desc.kind, desc.labels, desc.target) not in available:
                    return False
            variables = _variables_of(result.unsat_core)
            for bits in itertools.product((0, 1), repeat=len(variables)):
                values = dict(zip(variables, bits))
                if all(_eval_constraint(d, values) for d in result.unsat_core):
                    return False
            return True
        if result.status == UNKNOWN:
            return True
        return False
    except Exception:
        return False


def context_set_from_json(obj, effects: Iterable[Effect],
                          discover: bool = False) -> ContextSet:
    """Build a ContextSet from the contexts-file JSON payload.

    The ``effects_file`` key is resolved by the caller (the CLI reads it
    relative to the contexts file); this function takes the loaded effects.
    """
    from .valuation import relations_from_json

    obj = jsonio.expect_dict(obj, "context set")
    raw_contexts = jsonio.expect_list(
        jsonio.expect_key(obj, "contexts", "context set"), "contexts")
    contexts = []
    for i, ctx in enumerate(raw_contexts):
        ctx = jsonio.expect_list(ctx, f"contexts[{i}]")
        contexts.append([jsonio.expect_str(lb, f"contexts[{i}][j]") for lb in ctx])
    relations = relations_from_json(obj.get("relations", []))
    return build_context_set(effects, contexts, relations, discover=discover)
