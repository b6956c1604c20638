"""Field containers: transforms, symmetry, arithmetic, and guards."""

import numpy as np
import pytest

from conftest import rel_err
from sympeuler.fields import ScalarField, SkewMatrixField, VectorField, skew_part
from sympeuler.initial_conditions import random_potential, random_skew, random_vector


def test_scalar_round_trip(grid64):
    f = random_potential(grid64, seed=0)
    back = ScalarField.from_spectral(grid64, f.hat)
    assert rel_err(back.values, f.values) < 1e-12


def test_scalar_hermitian_symmetry(grid32):
    f = random_potential(grid32, seed=1)
    hat = f.hat
    flipped = hat[np.ix_(*[(-np.arange(n)) % n for n in hat.shape])]
    assert np.max(np.abs(hat - np.conj(flipped))) < 1e-9 * np.max(np.abs(hat))


def test_scalar_shape_guard(grid32):
    with pytest.raises(ValueError):
        ScalarField(grid32, np.zeros((8, 8)))


def test_vector_components_share_grid(grid32):
    u = random_vector(grid32, seed=2)
    assert all(u.component(i).grid is grid32 for i in range(grid32.dim))
    rebuilt = VectorField.from_components([u.component(0), u.component(1)])
    assert np.array_equal(rebuilt.values, u.values)


def test_vector_arithmetic(grid32):
    u = random_vector(grid32, seed=3)
    v = random_vector(grid32, seed=4)
    w = (u + v) - v
    assert rel_err(w.values, u.values) < 1e-14
    assert np.array_equal((-u).values, (u * -1.0).values)


def test_skew_materialized_matrix(grid32):
    Y = random_skew(grid32, seed=5)
    transposed = np.swapaxes(Y.values, 0, 1)
    assert np.max(np.abs(Y.values + transposed)) == 0.0
    assert Y.symmetry_defect == 0.0
    assert np.max(np.abs(Y.entry(0, 0).values)) == 0.0
    assert np.array_equal(Y.entry(1, 0).values, -Y.entry(0, 1).values)


def test_skew_from_upper_entries(grid32):
    f = random_potential(grid32, seed=6)
    Y = SkewMatrixField.from_upper_entries(grid32, {(0, 1): f.values})
    assert np.array_equal(Y.entry(0, 1).values, f.values)
    assert np.array_equal(Y.entry(1, 0).values, -f.values)
    with pytest.raises(ValueError):
        SkewMatrixField.from_upper_entries(grid32, {(1, 0): f.values})


def test_skew_part_antisymmetrizes(grid32):
    rng = np.random.default_rng(7)
    A = rng.standard_normal((2, 2) + grid32.shape)
    Y = skew_part(grid32, A)
    expected = A - np.swapaxes(A, 0, 1)
    assert np.array_equal(Y.values, expected)
    assert Y.symmetry_defect == 0.0


def test_four_dimensional_round_trip(grid4d):
    u = random_vector(grid4d, seed=8)
    back = VectorField.from_spectral(grid4d, u.hat)
    assert rel_err(back.values, u.values) < 1e-12
