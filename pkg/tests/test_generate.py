"""Seeded generators: distribution sanity and bit reproducibility."""

import numpy as np

from effectkit import (
    haar_unitary,
    is_psd,
    random_density,
    random_effect,
    random_povm,
    random_pure_density,
    rng_from_seed,
    validate_effect,
    validate_povm,
)


def test_haar_unitaries_are_unitary():
    rng = rng_from_seed(0)
    for dim in (2, 3, 5):
        u = haar_unitary(dim, rng)
        assert np.allclose(u @ u.conj().T, np.eye(dim), atol=1e-12)


def test_random_effects_validate():
    rng = rng_from_seed(1)
    for _ in range(100):
        e = random_effect(4, rng)
        validate_effect(e.op, e.label)


def test_random_povms_validate():
    rng = rng_from_seed(2)
    for _ in range(50):
        povm = random_povm(3, 4, rng)
        validate_povm(povm.effects)


def test_random_densities_are_states():
    rng = rng_from_seed(3)
    for _ in range(50):
        rho = random_density(3, rng)
        assert is_psd(rho.op, 1e-12)
        assert abs(np.trace(rho.op.array).real - 1.0) <= 1e-12


def test_pure_states_have_unit_purity():
    rng = rng_from_seed(4)
    rho = random_pure_density(4, rng)
    arr = rho.op.array
    assert abs(np.trace(arr @ arr).real - 1.0) <= 1e-12


def test_same_seed_same_artifacts():
    a = random_povm(3, 4, rng_from_seed(7))
    b = random_povm(3, 4, rng_from_seed(7))
    for ea, eb in zip(a.effects, b.effects):
        assert np.array_equal(ea.op.array, eb.op.array)
    c = random_povm(3, 4, rng_from_seed(8))
    assert not np.array_equal(a.effects[0].op.array, c.effects[0].op.array)
