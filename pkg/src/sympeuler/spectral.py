"""Fourier multiplier calculus, Sobolev norms and dealiasing.

All operators act on full-lattice coefficients under the e^{-i x.xi}
forward convention, so d/dx_j is multiplication by i*xi_j. For even N
the unpaired Nyquist row is zeroed inside odd (derivative-type)
multipliers; this keeps differentiation real and exactly antisymmetric
and is invisible on the 2/3-dealiased band where products live.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .fields import ScalarField, SkewMatrixField, VectorField
from .grids import GridSpec

__all__ = [
    "dealias_band",
    "dealias_mask",
    "two_thirds_truncate",
    "partial_derivative",
    "inverse_laplacian",
    "riesz_transform",
    "bessel_potential",
    "spectral_ball_cutoff",
    "ball_cutoff_mask",
    "littlewood_paley_blocks",
    "littlewood_paley_profiles",
    "sobolev_norm",
    "lebesgue_norms",
    "l2_inner",
    "spectral_upsample",
]


# ---------------------------------------------------------------------------
# multiplier building blocks


@functools.lru_cache(maxsize=64)
def _derivative_symbols(grid: GridSpec) -> tuple[np.ndarray, ...]:
    """i*xi_j multiplier per axis, with the Nyquist row zeroed (even N)."""
    nyquist = -(grid.points_per_axis // 2) * (2.0 * np.pi / grid.box_length)
    return tuple(
        1j * np.where(xi == nyquist, 0.0, xi) for xi in grid.frequency_arrays()
    )


def derivative_symbol(grid: GridSpec, axis: int) -> np.ndarray:
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis must be in [0, {grid.dim})")
    return _derivative_symbols(grid)[axis]


def dealias_band(points_per_axis: int) -> int:
    """Largest retained |k| per axis under the 2/3 rule.

    K = (N - 1) // 3 guarantees N - 2K > K, so pointwise products of two
    retained fields are alias-free on the retained band.
    """
    return (points_per_axis - 1) // 3


@functools.lru_cache(maxsize=64)
def dealias_mask(grid: GridSpec) -> np.ndarray:
    K = dealias_band(grid.points_per_axis)
    N = grid.points_per_axis
    k_axis = np.fft.fftfreq(N, d=1.0 / N)
    keep = np.abs(k_axis) <= K
    mask = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = N
        mask &= keep.reshape(shape)
    return mask


def _apply_symbol(f: ScalarField, symbol: np.ndarray) -> ScalarField:
    return ScalarField.from_spectral(f.grid, f.hat * symbol)


def _map_components(u, fn):
    """Apply a per-scalar spectral map across VectorField/SkewMatrixField."""
    if isinstance(u, ScalarField):
        return fn(u)
    if isinstance(u, VectorField):
        return VectorField.from_components([fn(u.component(i)) for i in range(u.grid.dim)])
    if isinstance(u, SkewMatrixField):
        d = u.grid.dim
        out = np.zeros_like(u.values)
        for i in range(d):
            for j in range(i + 1, d):
                vals = fn(u.entry(i, j)).values
                out[i, j] = vals
                out[j, i] = -vals
        return SkewMatrixField(u.grid, out)
    raise TypeError(f"unsupported field type {type(u)!r}")


def two_thirds_truncate(u):
    """Zero every coefficient with any |k_j| above the 2/3-rule band."""
    mask = dealias_mask(u.grid)
    return _map_components(u, lambda f: ScalarField.from_spectral(f.grid, f.hat * mask))


def partial_derivative(u, axis: int):
    """Spectral partial derivative along the given axis (0-based)."""
    sym = derivative_symbol(u.grid, axis)
    return _map_components(u, lambda f: _apply_symbol(f, sym))


def inverse_laplacian(u):
    """Multiplier -1/|xi|^2 with the zero mode mapped to zero."""
    grid = u.grid
    xi2 = grid.frequency_squared
    with np.errstate(divide="ignore"):
        sym = np.where(xi2 > 0.0, -1.0 / np.where(xi2 > 0.0, xi2, 1.0), 0.0)
    return _map_components(u, lambda f: _apply_symbol(f, sym))


def riesz_transform(u, axis: int):
    """R_j = d_j (-Laplace)^{-1/2}; zero mode mapped to zero."""
    grid = u.grid
    xi2 = grid.frequency_squared
    inv_norm = np.where(xi2 > 0.0, 1.0 / np.sqrt(np.where(xi2 > 0.0, xi2, 1.0)), 0.0)
    sym = derivative_symbol(grid, axis) * inv_norm
    return _map_components(u, lambda f: _apply_symbol(f, sym))


def bessel_potential(u, s: float):
    """J^s: multiplication by (1 + |xi|^2)^{s/2}."""
    sym = (1.0 + u.grid.frequency_squared) ** (0.5 * s)
    return _map_components(u, lambda f: _apply_symbol(f, sym))


@functools.lru_cache(maxsize=64)
def _xi_magnitude(grid: GridSpec) -> np.ndarray:
    return np.sqrt(grid.frequency_squared)


def ball_cutoff_mask(grid: GridSpec, radius: float) -> np.ndarray:
    """Indicator of the closed frequency ball |xi| <= radius."""
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    return (_xi_magnitude(grid) <= radius).astype(float)


def spectral_ball_cutoff(u, radius: float):
    """Sharp low-pass: zero all coefficients with |xi| > radius."""
    mask = ball_cutoff_mask(u.grid, radius)
    return _map_components(u, lambda f: _apply_symbol(f, mask))


# ---------------------------------------------------------------------------
# Littlewood-Paley blocks


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C^inf transition, 1 for t <= 0 and 0 for t >= 1 (exp(-1/t) cutoff)."""
    t = np.asarray(t, dtype=float)
    a = np.zeros_like(t)
    b = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    a[inside] = np.exp(-1.0 / t[inside])
    b[inside] = np.exp(-1.0 / (1.0 - t[inside]))
    out = np.where(t <= 0.0, 1.0, 0.0)
    out[inside] = b[inside] / (a[inside] + b[inside])
    return out


def _theta_profile(r: np.ndarray) -> np.ndarray:
    """Radial bump: 1 on |xi| <= 3/4, 0 outside |xi| >= 4/3, smooth between."""
    return _smooth_step((np.asarray(r) - 0.75) / (4.0 / 3.0 - 0.75))


def littlewood_paley_profiles(grid: GridSpec) -> tuple[np.ndarray, list[np.ndarray]]:
    """Lattice values of the low-pass profile and the dyadic annulus profiles.

    The annulus profiles eta_j(xi) = theta(xi/2^{j+1}) - theta(xi/2^j) are
    supported in {3/4 * 2^j <= |xi| <= 8/3 * 2^j}; together with theta they
    telescope to 1 on the whole grid lattice.
    """
    r = _xi_magnitude(grid)
    r_max = float(r.max())
    if r_max <= 0.75:
        levels = 0
    else:
        levels = max(0, math.ceil(math.log2(r_max / 0.75)) - 1)
    thetas = [_theta_profile(r / 2.0**j) for j in range(levels + 2)]
    low = thetas[0]
    annuli = [thetas[j + 1] - thetas[j] for j in range(levels + 1)]
    return low, annuli


def littlewood_paley_blocks(f: ScalarField) -> list[ScalarField]:
    """Dyadic decomposition [low-pass block, annulus blocks...]; sums to f."""
    low, annuli = littlewood_paley_profiles(f.grid)
    blocks = [ScalarField.from_spectral(f.grid, f.hat * low)]
    blocks.extend(ScalarField.from_spectral(f.grid, f.hat * a) for a in annuli)
    return blocks


# ---------------------------------------------------------------------------
# norms and inner products


def _component_hats(u) -> list[np.ndarray]:
    if isinstance(u, ScalarField):
        return [u.hat]
    if isinstance(u, VectorField):
        return [u.hat[i] for i in range(u.grid.dim)]
    if isinstance(u, SkewMatrixField):
        d = u.grid.dim
        hats = []
        for i in range(d):
            for j in range(i + 1, d):
                hats.append(u.entry(i, j).hat)
        # the full Frobenius sum counts both triangles
        return hats + hats
    raise TypeError(f"unsupported field type {type(u)!r}")


def _component_values(u) -> np.ndarray:
    if isinstance(u, ScalarField):
        return u.values[np.newaxis]
    if isinstance(u, VectorField):
        return u.values
    if isinstance(u, SkewMatrixField):
        d = u.grid.dim
        return u.values.reshape((d * d,) + u.grid.shape)
    raise TypeError(f"unsupported field type {type(u)!r}")


def _parseval_weight(grid: GridSpec) -> float:
    # chosen so that sobolev_norm(f, 0) equals the literal L^2 box integral
    return grid.box_volume / grid.num_points**2


def sobolev_norm(u, s: float) -> float:
    """H^s norm via the lattice Parseval sum with weights (1 + |xi|^2)^s.

    At s = 0 this is the plain L^2 norm over the box. Vector fields sum
    over components; skew-matrix fields use the full Frobenius sum.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    grid = u.grid
    weights = (1.0 + grid.frequency_squared) ** s
    total = 0.0
    for hat in _component_hats(u):
        total += float(np.sum(weights * np.abs(hat) ** 2))
    return math.sqrt(_parseval_weight(grid) * total)


def lebesgue_norms(u) -> tuple[float, float]:
    """(L^2, L^inf): grid-quadrature integral norm and grid max-abs."""
    vals = _component_values(u)
    l2 = math.sqrt(float(np.sum(vals**2)) * u.grid.cell_volume)
    linf = float(np.abs(vals).max())
    return l2, linf


def l2_inner(u, v) -> float:
    """L^2 box inner product; matrix fields use the full Frobenius sum."""
    if type(u) is not type(v):
        raise TypeError("mismatched field types")
    a = _component_values(u)
    b = _component_values(v)
    return float(np.sum(a * b)) * u.grid.cell_volume


# ---------------------------------------------------------------------------
# spectral refinement (zero padding)


def spectral_upsample(values: np.ndarray, grid: GridSpec, factor: int = 2) -> np.ndarray:
    """Resample on a factor-times-finer grid by Fourier zero padding.

    Accepts stacked arrays with leading component axes. The unpaired
    Nyquist coefficient is split across +-N/2 on the fine lattice, which
    keeps the refined samples real and the interpolation exact for
    band-limited data.
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError("factor must be a positive integer")
    values = np.asarray(values)
    lead = values.shape[: values.ndim - grid.dim]
    if values.shape[len(lead):] != grid.shape:
        raise ValueError("values do not match grid shape")
    if factor == 1:
        return values.astype(float, copy=True)

    N = grid.points_per_axis
    M = factor * N
    axes = tuple(range(len(lead), len(lead) + grid.dim))
    hat = np.fft.fftn(values, axes=axes)
    half = N // 2
    for ax in axes:
        shape = list(hat.shape)
        shape[ax] = M
        big = np.zeros(shape, dtype=complex)
        src_pos = [slice(None)] * hat.ndim
        src_pos[ax] = slice(0, half)
        dst_pos = list(src_pos)
        big[tuple(dst_pos)] = hat[tuple(src_pos)]
        src_neg = [slice(None)] * hat.ndim
        src_neg[ax] = slice(half + 1, N)
        dst_neg = [slice(None)] * hat.ndim
        dst_neg[ax] = slice(M - half + 1, M)
        big[tuple(dst_neg)] = hat[tuple(src_neg)]
        src_nyq = [slice(None)] * hat.ndim
        src_nyq[ax] = half
        for dst_idx in (half, M - half):
            dst_nyq = [slice(None)] * hat.ndim
            dst_nyq[ax] = dst_idx
            big[tuple(dst_nyq)] = 0.5 * hat[tuple(src_nyq)]
        hat = big
    out = np.real(np.fft.ifftn(hat, axes=axes)) * float(factor**grid.dim)
    return out
