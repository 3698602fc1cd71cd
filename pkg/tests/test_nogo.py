"""No-go machinery: witness construction, context sets, and the search."""

import itertools

import numpy as np
import pytest

from effectkit import (
    AdditivityRelation,
    BadContext,
    BadRelation,
    BlochVector,
    ConstraintDesc,
    DegenerateLambda,
    Effect,
    HermitianOperator,
    NotUnitVectors,
    ParallelVectors,
    SearchResult,
    UnknownLabel,
    born,
    born_functional,
    build_context_set,
    complement,
    discover_sum_relations,
    random_density,
    rng_from_seed,
    search_dispersion_free,
    verify_certificate,
    witness_2d,
)

from conftest import char_poly_eigs_2x2, pauli_op, random_context_set


def zhat():
    return BlochVector((0.0, 0.0, 1.0))


def xhat():
    return BlochVector((1.0, 0.0, 0.0))


def brute_force_solutions(cs):
    """All satisfying {0,1} assignments, enumerated directly."""
    variables: dict[str, None] = {}
    for ctx in cs.contexts:
        for lb in ctx:
            variables.setdefault(lb)
    for rel in cs.sum_relations:
        for lb in rel.addends:
            variables.setdefault(lb)
        if rel.target != "I":
            variables.setdefault(rel.target)
    names = list(variables)
    solutions = []
    for bits in itertools.product((0, 1), repeat=len(names)):
        values = dict(zip(names, bits))
        ok = all(sum(values[lb] for lb in ctx) == 1 for ctx in cs.contexts)
        for rel in cs.sum_relations:
            if not ok:
                break
            lhs = sum(values[lb] for lb in rel.addends)
            rhs = 1 if rel.target == "I" else values[rel.target]
            ok = lhs == rhs
        if ok:
            solutions.append(values)
    return solutions


def half_identity_context_set():
    half = Effect(0.5 * HermitianOperator.identity(2), "H")
    eye = Effect(HermitianOperator.identity(2), "I")
    return build_context_set([eye, half], [["H", "H"]])


def projective_pair_context_set():
    p = Effect(pauli_op(0, 0, 1), "P")
    q = Effect(pauli_op(1, 0, 0), "Q")
    return build_context_set(
        [p, complement(p, "Pp"), q, complement(q, "Qp")],
        [["P", "Pp"], ["Q", "Qp"]])


class TestWitness2D:
    def test_z_x_half(self):
        w = witness_2d(zhat(), xhat(), 0.5)
        assert w.c.a == pytest.approx((0.5, 0.0, 0.5))
        assert w.c.norm == pytest.approx(np.sqrt(2) / 2, abs=1e-15)
        assert w.mu == pytest.approx((1 + np.sqrt(2) / 2) / 2, abs=1e-15)
        _, hi = char_poly_eigs_2x2(w.E.op.array)
        assert w.mu == pytest.approx(hi, abs=1e-12)
        assert 0.0 < w.mu < 1.0

    def test_orthogonal_pair_maximal_indeterminacy(self):
        w = witness_2d(zhat(), BlochVector((0.0, 0.0, -1.0)), 0.5)
        assert w.c.norm == 0.0
        assert w.mu == 0.5
        assert np.allclose(w.E.op.array, 0.5 * np.eye(2), atol=1e-15)

    def test_parallel_vectors_rejected(self):
        with pytest.raises(ParallelVectors):
            witness_2d(zhat(), zhat(), 0.5)

    def test_nearly_parallel_rejected(self):
        tilt = BlochVector((1e-8, 0.0, np.sqrt(1 - 1e-16)))
        with pytest.raises(ParallelVectors):
            witness_2d(zhat(), tilt, 0.5)

    @pytest.mark.parametrize("lam", [0.0, 1.0, -0.2, 1.7])
    def test_degenerate_lambda(self, lam):
        with pytest.raises(DegenerateLambda):
            witness_2d(zhat(), xhat(), lam)

    def test_non_unit_vectors(self):
        with pytest.raises(NotUnitVectors):
            witness_2d(BlochVector((0.0, 0.0, 2.0)), xhat(), 0.5)

    def test_composition_identity(self):
        rng = rng_from_seed(77)
        for _ in range(100):
            n = rng.standard_normal(3)
            n /= np.linalg.norm(n)
            m = rng.standard_normal(3)
            m /= np.linalg.norm(m)
            lam = float(rng.uniform(0.05, 0.95))
            try:
                w = witness_2d(BlochVector(tuple(n)), BlochVector(tuple(m)), lam)
            except ParallelVectors:
                continue
            mixture = lam * w.P.op + (1 - lam) * w.Q.op
            assert np.linalg.norm(w.E.op.array - mixture.array) <= 1e-12
            # closed form against the eigensolver route
            top = float(np.linalg.eigvalsh(w.E.op.array)[-1])
            assert abs(w.mu - top) <= 1e-10
            # spectral pair reassembles E
            spectral = w.mu * w.R.op + (1 - w.mu) * w.Rprime.op
            assert np.linalg.norm(w.E.op.array - spectral.array) <= 1e-12

    def test_mu_range(self):
        rng = rng_from_seed(78)
        for _ in range(200):
            n = rng.standard_normal(3)
            n /= np.linalg.norm(n)
            m = rng.standard_normal(3)
            m /= np.linalg.norm(m)
            if abs(abs(float(n @ m)) - 1.0) < 1e-6:
                continue
            lam = float(rng.uniform(0.05, 0.95))
            try:
                w = witness_2d(BlochVector(tuple(n)), BlochVector(tuple(m)), lam)
            except ParallelVectors:
                continue
            if w.c.norm == 0.0:
                assert w.mu == 0.5
            else:
                assert 0.5 < w.mu < 1.0

    def test_born_valuations_are_linear_on_witness(self):
        # sanity: actual states satisfy the linearity that dispersion-free
        # valuations cannot
        rng = rng_from_seed(79)
        w = witness_2d(zhat(), xhat(), 0.25)
        for _ in range(20):
            rho = random_density(2, rng)
            lhs = born(rho, w.E)
            rhs = 0.25 * born(rho, w.P) + 0.75 * born(rho, w.Q)
            assert abs(lhs - rhs) <= 1e-12


class TestBuildContextSet:
    def test_half_identity_relation(self):
        half = Effect(0.5 * HermitianOperator.identity(2), "H")
        eye = Effect(HermitianOperator.identity(2), "I")
        cs = build_context_set([eye, half], [["H", "H"]],
                               [AdditivityRelation(("H", "H"), "I")])
        assert cs.contexts == (("H", "H"),)
        assert len(cs.sum_relations) == 1

    def test_projective_contexts(self):
        cs = projective_pair_context_set()
        assert len(cs.contexts) == 2
        assert cs.sum_relations == ()

    def test_bad_relation(self):
        p = Effect(pauli_op(0, 0, 1), "P")
        q = Effect(pauli_op(1, 0, 0), "Q")
        with pytest.raises(BadRelation):
            build_context_set([p, q, complement(p, "Pp")], [["P", "Pp"]],
                              [AdditivityRelation(("P", "Q"), "I")])

    def test_bad_context(self):
        p = Effect(pauli_op(0, 0, 1), "P")
        q = Effect(pauli_op(1, 0, 0), "Q")
        with pytest.raises(BadContext):
            build_context_set([p, q], [["P", "Q"]])

    def test_unknown_label(self):
        p = Effect(pauli_op(0, 0, 1), "P")
        with pytest.raises(UnknownLabel):
            build_context_set([p], [["P", "missing"]])

    def test_fractional_mixture_is_not_expressible(self):
        # the discrete model only carries integer label sums; the relation
        # underlying the mixture witness (coefficients 1/2) fails the
        # operator identity check and belongs to witness_2d instead
        w = witness_2d(zhat(), xhat(), 0.5)
        effects = [w.P, w.Q, w.E, w.R, w.Rprime, complement(w.E, "Ec")]
        cs = build_context_set(effects, [["E", "Ec"]])
        assert cs.contexts == (("E", "Ec"),)
        with pytest.raises(BadRelation):
            build_context_set(effects, [["E", "Ec"]],
                              [AdditivityRelation(("P", "Q"), "E")])

    def test_discovery_finds_pair_and_triple_identities(self):
        p = Effect(pauli_op(0, 0, 1), "P")
        pp = complement(p, "Pp")
        third = Effect(HermitianOperator.identity(2) * (1 / 3), "t")
        pool = {"P": p, "Pp": pp, "t": third}
        found = discover_sum_relations(pool)
        keys = {(tuple(sorted(r.addends)), r.target) for r in found}
        assert (("P", "Pp"), "I") in keys
        assert (("t", "t", "t"), "I") in keys

    def test_discovery_finds_effect_targets(self):
        a = Effect(0.3 * pauli_op(0, 0, 0.5), "a")
        b = Effect(0.2 * pauli_op(0.4, 0, 0), "b")
        c = Effect(a.op + b.op, "c")
        found = discover_sum_relations({"a": a, "b": b, "c": c})
        keys = {(tuple(sorted(r.addends)), r.target) for r in found}
        assert (("a", "b"), "c") in keys


class TestSearch:
    def test_half_identity_is_unsat(self):
        cs = half_identity_context_set()
        result = search_dispersion_free(cs)
        assert result.status == "unsat"
        assert len(result.unsat_core) == 1
        assert result.unsat_core[0].kind == "context"
        assert verify_certificate(result, cs)

    def test_projective_pairs_have_four_models(self):
        cs = projective_pair_context_set()
        result = search_dispersion_free(cs)
        assert result.status == "sat"
        assert result.total_solutions == 4
        assert len(result.assignments) == 4
        assert verify_certificate(result, cs)
        # independence: each context contributes exactly one 1
        for assignment in result.assignments:
            assert assignment["P"] + assignment["Pp"] == 1
            assert assignment["Q"] + assignment["Qp"] == 1

    def test_budget_exhaustion_is_unknown(self):
        cs = projective_pair_context_set()
        result = search_dispersion_free(cs, node_budget=1)
        assert result.status == "unknown"
        assert result.total_solutions is None
        assert verify_certificate(result, cs)

    def test_max_solutions_caps_storage_not_count(self):
        cs = projective_pair_context_set()
        result = search_dispersion_free(cs, max_solutions=2)
        assert result.status == "sat"
        assert len(result.assignments) == 2
        assert result.total_solutions == 4

    def test_empty_context_set_is_vacuously_sat(self):
        cs = build_context_set([], [])
        result = search_dispersion_free(cs)
        assert result.status == "sat"
        assert result.assignments == [{}]
        assert verify_certificate(result, cs)

    def test_exhaustive_against_brute_force(self):
        rng = rng_from_seed(500)
        for trial in range(30):
            cs = random_context_set(rng, max_effects=10)
            expected = brute_force_solutions(cs)
            result = search_dispersion_free(cs, max_solutions=4096)
            if expected:
                assert result.status == "sat", f"trial {trial}"
                got = {frozenset(a.items()) for a in result.assignments}
                want = {frozenset(s.items()) for s in expected}
                assert got == want, f"trial {trial}"
                assert result.total_solutions == len(expected)
            else:
                assert result.status == "unsat", f"trial {trial}"
            assert verify_certificate(result, cs)

    def test_unsat_cores_are_minimal(self):
        rng = rng_from_seed(501)
        seen_unsat = 0
        for _ in range(60):
            cs = random_context_set(rng, max_effects=10)
            result = search_dispersion_free(cs, max_solutions=4096)
            if result.status != "unsat":
                continue
            seen_unsat += 1
            core = result.unsat_core
            # dropping any single member of the core makes it satisfiable
            for k in range(len(core)):
                rest = [c for i, c in enumerate(core) if i != k]
                sub = _constraint_subset_as_context_set(cs, rest)
                assert brute_force_solutions(sub), "core not minimal"
        assert seen_unsat >= 3

    def test_monotone_adding_relations_never_creates_sat(self):
        rng = rng_from_seed(502)
        checked = 0
        for _ in range(40):
            cs = random_context_set(rng, max_effects=9)
            base = search_dispersion_free(cs, max_solutions=4096)
            if base.status != "unsat":
                continue
            labels = list(cs.effects)
            extra_label = labels[int(rng.integers(len(labels)))]
            harder = build_context_set(
                cs.effects.values(), cs.contexts,
                list(cs.sum_relations)
                + [AdditivityRelation((extra_label,), extra_label)])
            result = search_dispersion_free(harder, max_solutions=4096)
            assert result.status == "unsat"
            checked += 1
        assert checked >= 2

    def test_born_values_satisfy_all_constraints_in_reals(self):
        rng = rng_from_seed(503)
        for _ in range(20):
            cs = random_context_set(rng, max_effects=10)
            dim = cs.dim
            rho = random_density(dim, rng)
            v = born_functional(rho)
            for ctx in cs.contexts:
                total = sum(v(cs.effects[lb].op) for lb in ctx)
                assert abs(total - 1.0) <= 1e-8
            for rel in cs.sum_relations:
                lhs = sum(v(cs.effects[lb].op) for lb in rel.addends)
                rhs = 1.0 if rel.target == "I" else v(cs.effects[rel.target].op)
                assert abs(lhs - rhs) <= 1e-8


def _constraint_subset_as_context_set(cs, descs):
    """Rebuild a context set exposing only the given constraints."""
    contexts = [d.labels for d in descs if d.kind == "context"]
    relations = [AdditivityRelation(d.labels, d.target)
                 for d in descs if d.kind == "relation"]
    return build_context_set(cs.effects.values(), contexts, relations)


class TestVerifyCertificate:
    def test_flipped_assignment_fails(self):
        cs = projective_pair_context_set()
        result = search_dispersion_free(cs)
        tampered = [dict(a) for a in result.assignments]
        tampered[0]["P"] = 1 - tampered[0]["P"]
        bad = SearchResult(status="sat", assignments=tampered,
                           total_solutions=result.total_solutions,
                           unsat_core=[], nodes_explored=result.nodes_explored)
        assert not verify_certificate(bad, cs)

    def test_foreign_core_fails(self):
        cs = half_identity_context_set()
        result = search_dispersion_free(cs)
        bad = SearchResult(status="unsat", assignments=[], total_solutions=0,
                           unsat_core=[ConstraintDesc("context", ("I",))],
                           nodes_explored=1)
        assert not verify_certificate(bad, cs)

    def test_satisfiable_core_fails(self):
        cs = projective_pair_context_set()
        bad = SearchResult(status="unsat", assignments=[], total_solutions=0,
                           unsat_core=[ConstraintDesc("context", ("P", "Pp"))],
                           nodes_explored=1)
        assert not verify_certificate(bad, cs)

    def test_unknown_verifies_vacuously(self):
        cs = half_identity_context_set()
        result = SearchResult(status="unknown", assignments=[],
                              total_solutions=None, unsat_core=[],
                              nodes_explored=0)
        assert verify_certificate(result, cs)

    def test_non_binary_value_fails(self):
        cs = projective_pair_context_set()
        bad = SearchResult(
            status="sat",
            assignments=[{"P": 2, "Pp": -1, "Q": 1, "Qp": 0}],
            total_solutions=1, unsat_core=[], nodes_explored=1)
        assert not verify_certificate(bad, cs)
