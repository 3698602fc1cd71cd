"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from effectkit import (
    ContextSet,
    Effect,
    HermitianOperator,
    build_context_set,
    random_povm,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli_op(ax: float, ay: float, az: float) -> HermitianOperator:
    """(I + a.sigma)/2 assembled entry by entry, independent of the package."""
    arr = 0.5 * (np.eye(2, dtype=complex) + ax * SX + ay * SY + az * SZ)
    return HermitianOperator.from_array(arr)


def char_poly_eigs_2x2(arr: np.ndarray) -> tuple[float, float]:
    """Eigenvalues of a Hermitian 2x2 from its characteristic polynomial."""
    tr = (arr[0, 0] + arr[1, 1]).real
    det = (arr[0, 0] * arr[1, 1] - arr[0, 1] * arr[1, 0]).real
    disc = np.sqrt(tr * tr - 4.0 * det)
    return (tr - disc) / 2.0, (tr + disc) / 2.0


def random_context_set(rng: np.random.Generator, max_effects: int = 12
                       ) -> ContextSet:
    """Random operator-backed context set, mixing SAT and UNSAT shapes."""
    dim = int(rng.integers(2, 4))
    effects: dict[str, Effect] = {}
    contexts: list[list[str]] = []
    relations = []

    n_ctx = int(rng.integers(1, 4))
    for ci in range(n_ctx):
        outcomes = int(rng.integers(2, 5))
        if len(effects) + outcomes > max_effects:
            break
        povm = random_povm(dim, outcomes, rng, label_prefix=f"c{ci}_E")
        contexts.append(list(povm.labels))
        for e in povm.effects:
            effects[e.label] = e

    # uniform split of the identity referenced k times: forces k * v = 1,
    # unsatisfiable over {0,1} for k >= 2
    if rng.random() < 0.4 and len(effects) + 1 <= max_effects:
        k = int(rng.integers(2, 4))
        u = Effect(HermitianOperator.identity(dim) * (1.0 / k), "u")
        effects[u.label] = u
        contexts.append([u.label] * k)

    # a genuine pair-sum relation inside some context with >= 3 outcomes
    if len(effects) + 1 <= max_effects:
        for ctx in contexts:
            distinct = sorted(set(ctx))
            if len(distinct) >= 3:
                a, b = distinct[0], distinct[1]
                combined = Effect(effects[a].op + effects[b].op, "g")
                effects[combined.label] = combined
                from effectkit import AdditivityRelation
                relations.append(AdditivityRelation((a, b), "g"))
                break

    if not contexts:
        povm = random_povm(dim, 2, rng, label_prefix="c0_E")
        contexts.append(list(povm.labels))
        for e in povm.effects:
            effects[e.label] = e

    return build_context_set(effects.values(), contexts, relations)
