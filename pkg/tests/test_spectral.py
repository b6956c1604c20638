"""Multiplier operators, norms, dealiasing, and dyadic blocks."""

import numpy as np
import pytest

from conftest import rel_err
from sympeuler.fields import ScalarField, VectorField
from sympeuler.grids import GridSpec
from sympeuler.initial_conditions import random_potential
from sympeuler.spectral import (
    ball_cutoff_mask,
    bessel_potential,
    dealias_band,
    dealias_mask,
    inverse_laplacian,
    l2_inner,
    lebesgue_norms,
    littlewood_paley_blocks,
    partial_derivative,
    riesz_transform,
    sobolev_norm,
    spectral_ball_cutoff,
    spectral_upsample,
    two_thirds_truncate,
)


def sin_mode(grid, axis=0, mult=1):
    x = grid.coordinate_arrays()[axis]
    vals = np.sin(mult * x) * np.ones(grid.shape)
    return ScalarField(grid, vals)


# ---------------------------------------------------------------------------
# grids


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(n=0, points_per_axis=16)
    with pytest.raises(ValueError):
        GridSpec(n=1, points_per_axis=15)   # odd
    with pytest.raises(ValueError):
        GridSpec(n=1, points_per_axis=16, box_length=0.0)


def test_frequency_lattice_symmetry(grid32):
    xi = grid32.axis_frequencies
    assert xi[0] == 0.0
    # representable k have -k at index N-k
    N = grid32.points_per_axis
    for k in range(1, N // 2):
        assert xi[N - k] == -xi[k]


# ---------------------------------------------------------------------------
# sobolev_norm


def test_sobolev_norm_zero(grid32):
    z = ScalarField(grid32, np.zeros(grid32.shape))
    assert sobolev_norm(z, 2.0) == 0.0


def test_sobolev_norm_sine_closed_form(grid64):
    # single mode |xi|^2 = 1, integral of sin^2 = 2 pi^2 on the 2d box
    f = sin_mode(grid64)
    expected = 2.0 * np.pi * np.sqrt(2.0)
    assert abs(sobolev_norm(f, 2.0) - expected) < 1e-10


def test_sobolev_norm_s0_matches_quadrature(grid64):
    f = random_potential(grid64, seed=0)
    quad = np.sqrt(np.sum(f.values ** 2) * grid64.cell_volume)
    assert abs(sobolev_norm(f, 0.0) - quad) / quad < 1e-10


def test_sobolev_norm_rejects_negative_s(grid32):
    f = sin_mode(grid32)
    with pytest.raises(ValueError):
        sobolev_norm(f, -1.0)


def test_sobolev_norm_vector_root_sum_squares(grid32):
    f = sin_mode(grid32)
    u = VectorField.from_components([f, f])
    assert np.isclose(sobolev_norm(u, 1.5),
                      np.sqrt(2.0) * sobolev_norm(f, 1.5))


# ---------------------------------------------------------------------------
# partial_derivative


def test_derivative_single_mode(grid64):
    x1 = grid64.coordinate_arrays()[0]
    df = partial_derivative(sin_mode(grid64), 0)
    assert np.max(np.abs(df.values - np.cos(x1) * np.ones(grid64.shape))) < 1e-12
    d2 = partial_derivative(sin_mode(grid64), 1)
    assert np.max(np.abs(d2.values)) < 1e-12


def test_derivative_axis_range(grid32):
    with pytest.raises(ValueError):
        partial_derivative(sin_mode(grid32), 2)


def test_product_rule_after_dealiasing(grid64):
    f = random_potential(grid64, seed=1)
    g = random_potential(grid64, seed=2)
    prod = ScalarField(grid64, f.values * g.values)
    lhs = two_thirds_truncate(partial_derivative(prod, 0))
    rhs_vals = (f.values * partial_derivative(g, 0).values
                + g.values * partial_derivative(f, 0).values)
    rhs = two_thirds_truncate(ScalarField(grid64, rhs_vals))
    assert rel_err(lhs.values, rhs.values) < 1e-10


def test_derivative_antisymmetry(grid64):
    f = random_potential(grid64, seed=3)
    g = random_potential(grid64, seed=4)
    a = l2_inner(partial_derivative(f, 1), g)
    b = l2_inner(f, partial_derivative(g, 1))
    assert abs(a + b) / max(abs(a), abs(b)) < 1e-10


# ---------------------------------------------------------------------------
# inverse_laplacian, riesz, bessel


def test_inverse_laplacian_eigenfunction(grid64):
    f = sin_mode(grid64)
    out = inverse_laplacian(f)
    assert np.max(np.abs(out.values + f.values)) < 1e-12


def test_inverse_laplacian_zero_mode(grid32):
    one = ScalarField(grid32, np.ones(grid32.shape))
    assert np.max(np.abs(inverse_laplacian(one).values)) == 0.0


def test_laplacian_of_inverse_recovers_mean_free_part(grid64):
    f = random_potential(grid64, seed=5)
    g = inverse_laplacian(f)
    lap = partial_derivative(partial_derivative(g, 0), 0).values \
        + partial_derivative(partial_derivative(g, 1), 1).values
    assert rel_err(lap, f.values - f.values.mean()) < 1e-11


def test_riesz_single_mode(grid64):
    x1 = grid64.coordinate_arrays()[0]
    out = riesz_transform(sin_mode(grid64), 0)
    assert np.max(np.abs(out.values - np.cos(x1) * np.ones(grid64.shape))) < 1e-12


def test_riesz_squares_sum_to_negative_identity(grid64):
    f = random_potential(grid64, seed=6)
    acc = np.zeros(grid64.shape)
    for j in range(grid64.dim):
        acc += riesz_transform(riesz_transform(f, j), j).values
    assert rel_err(acc, -(f.values - f.values.mean())) < 1e-11


def test_riesz_kills_constants(grid32):
    one = ScalarField(grid32, np.ones(grid32.shape))
    assert np.max(np.abs(riesz_transform(one, 0).values)) == 0.0


def test_bessel_identity_and_mode(grid64):
    f = random_potential(grid64, seed=7)
    assert rel_err(bessel_potential(f, 0.0).values, f.values) < 1e-14
    two = bessel_potential(sin_mode(grid64), 2.0)
    assert np.max(np.abs(two.values - 2.0 * sin_mode(grid64).values)) < 1e-12


def test_bessel_inverse_pair(grid64):
    f = random_potential(grid64, seed=8)
    back = bessel_potential(bessel_potential(f, -3.0), 3.0)
    assert rel_err(back.values, f.values) < 1e-12


def test_bessel_commutes_with_inverse_laplacian(grid64):
    f = random_potential(grid64, seed=9)
    a = bessel_potential(inverse_laplacian(f), 2.0)
    b = inverse_laplacian(bessel_potential(f, 2.0))
    assert rel_err(a.values, b.values) < 1e-14


# ---------------------------------------------------------------------------
# ball cutoff


def test_ball_cutoff_excludes_and_retains(grid64):
    low = sin_mode(grid64, mult=1)
    high = sin_mode(grid64, mult=2)
    assert np.max(np.abs(spectral_ball_cutoff(high, 1.0).values)) < 1e-14
    kept = spectral_ball_cutoff(low, 1.0)
    assert np.max(np.abs(kept.values - low.values)) < 1e-13


def test_ball_cutoff_projection_and_recovery(grid64):
    f = random_potential(grid64, seed=10)
    once = spectral_ball_cutoff(f, 5.0)
    twice = spectral_ball_cutoff(once, 5.0)
    assert np.array_equal(once.values, twice.values)
    # exact recovery once the radius clears the field's bandwidth
    band = dealias_band(grid64.points_per_axis)
    radius = np.sqrt(2.0) * band + 1.0
    assert rel_err(spectral_ball_cutoff(f, radius).values, f.values) < 1e-13


def test_ball_cutoff_rejects_bad_radius(grid32):
    with pytest.raises(ValueError):
        ball_cutoff_mask(grid32, 0.0)


# ---------------------------------------------------------------------------
# dyadic blocks


def test_dyadic_blocks_partition(grid64):
    f = random_potential(grid64, seed=11)
    blocks = littlewood_paley_blocks(f)
    total = np.sum([b.values for b in blocks], axis=0)
    assert rel_err(total, f.values) < 1e-10


def test_dyadic_blocks_single_mode_support(grid64):
    f = sin_mode(grid64)  # |xi| = 1: only theta (<= 4/3) and j=0 ([3/4, 8/3])
    blocks = littlewood_paley_blocks(f)
    for j, b in enumerate(blocks[2:], start=1):
        assert np.max(np.abs(b.values)) < 1e-13, f"leak into block j={j}"


def test_dyadic_blocks_spectral_support(grid64):
    f = random_potential(grid64, seed=12)
    xi = np.sqrt(grid64.frequency_squared)
    blocks = littlewood_paley_blocks(f)
    scale = np.max(np.abs(f.hat))
    outside = xi > 4.0 / 3.0
    assert np.max(np.abs(blocks[0].hat[outside])) < 1e-12 * scale
    for j, b in enumerate(blocks[1:]):
        keep = (0.75 * 2.0 ** j <= xi) & (xi <= 8.0 / 3.0 * 2.0 ** j)
        assert np.max(np.abs(b.hat[~keep])) < 1e-12 * scale


def test_dyadic_blocks_zero(grid32):
    z = ScalarField(grid32, np.zeros(grid32.shape))
    assert all(np.max(np.abs(b.values)) == 0.0
               for b in littlewood_paley_blocks(z))


# ---------------------------------------------------------------------------
# lebesgue norms, dealiasing, upsampling


def test_lebesgue_norms_cases(grid64):
    one = ScalarField(grid64, np.ones(grid64.shape))
    l2, linf = lebesgue_norms(one)
    assert np.isclose(l2, 2.0 * np.pi) and linf == 1.0
    l2s, linfs = lebesgue_norms(sin_mode(grid64))
    assert abs(linfs - 1.0) < 1e-12     # N divisible by 4 samples the peak
    zero = ScalarField(grid64, np.zeros(grid64.shape))
    assert lebesgue_norms(zero) == (0.0, 0.0)


def test_dealias_mask_band(grid64):
    band = dealias_band(grid64.points_per_axis)
    assert band == (grid64.points_per_axis - 1) // 3
    mask = dealias_mask(grid64)
    k = np.rint(grid64.axis_frequencies / (2.0 * np.pi / grid64.box_length))
    keep1d = np.abs(k) <= band
    assert np.array_equal(mask, np.minimum.outer(keep1d, keep1d) > 0)


def test_truncate_idempotent(grid64):
    f = random_potential(grid64, seed=13)
    once = two_thirds_truncate(f)
    assert np.array_equal(once.values, two_thirds_truncate(once).values)


def test_spectral_upsample_exact_for_sine(grid32):
    f = sin_mode(grid32)
    fine_vals = spectral_upsample(f.values, grid32, factor=2)
    fine = GridSpec(n=1, points_per_axis=64, box_length=grid32.box_length)
    x1 = fine.coordinate_arrays()[0]
    assert np.max(np.abs(fine_vals - np.sin(x1) * np.ones(fine.shape))) < 1e-12


def test_parseval_property(grid64):
    f = two_thirds_truncate(random_potential(grid64, seed=14))
    quad = np.sum(f.values ** 2) * grid64.cell_volume
    assert abs(sobolev_norm(f, 0.0) ** 2 - quad) / quad < 1e-10
