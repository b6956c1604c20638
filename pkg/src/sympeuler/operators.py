"""Symplectic vector calculus on periodic boxes.

The central object is the deformation operator taking a vector field X
to the skew-matrix field describing how the flow of X deforms the
standard symplectic form (the Lie derivative of the form along X),
together with its formal L^2 adjoint. Quadratic forms of a velocity
field expressing the deformation of the advection term, the constraint
force that keeps a flow symplectic, and the symplectic gradient /
divergence calculus are built on top.

All quadratic forms apply the 2/3-rule truncation to their inputs and
outputs, so the algebraic identities between them hold to rounding on
the retained band.
"""

from __future__ import annotations

import functools

import numpy as np

from .fields import ScalarField, SkewMatrixField, VectorField, skew_part
from .grids import GridSpec
from .spectral import (
    dealias_mask,
    derivative_symbol,
    inverse_laplacian,
    ball_cutoff_mask,
    sobolev_norm,
    lebesgue_norms,
    two_thirds_truncate,
)

__all__ = [
    "symplectic_matrix",
    "jacobian",
    "divergence",
    "skew_divergence",
    "omega_deformation",
    "omega_deformation_adjoint",
    "divergence_curl",
    "advective_deformation_strain",
    "advective_deformation_flux",
    "compressibility_defect",
    "constraint_force",
    "advection_term",
    "symplectic_gradient",
    "symplectic_divergence",
    "velocity_from_symplectic_divergence",
    "project_symplectic",
    "riesz_commutator_ratio",
]


@functools.lru_cache(maxsize=16)
def symplectic_matrix(n: int) -> np.ndarray:
    """Block-diagonal 2n x 2n matrix with [[0, 1], [-1, 0]] blocks."""
    omega = np.zeros((2 * n, 2 * n))
    for a in range(n):
        omega[2 * a, 2 * a + 1] = 1.0
        omega[2 * a + 1, 2 * a] = -1.0
    return omega


def jacobian(u: VectorField) -> np.ndarray:
    """All partial derivatives as an array J[i, j] = d_j u_i (physical)."""
    grid = u.grid
    d = grid.dim
    hats = u.hat
    J = np.empty((d, d) + grid.shape)
    for j in range(d):
        sym = derivative_symbol(grid, j)
        axes = tuple(range(1, 1 + d))
        J[:, j] = np.real(np.fft.ifftn(hats * sym, axes=axes))
    return J


def divergence(u: VectorField) -> ScalarField:
    grid = u.grid
    hat = np.zeros(grid.shape, dtype=complex)
    for j in range(grid.dim):
        hat += derivative_symbol(grid, j) * u.hat[j]
    return ScalarField.from_spectral(grid, hat)


def _skew_divergence(Y: SkewMatrixField) -> np.ndarray:
    """div(Y)_k = sum_i d_i Y_{ik}, returned as stacked spectral array."""
    grid = Y.grid
    d = grid.dim
    axes = tuple(range(2, 2 + d))
    hat = np.fft.fftn(Y.values, axes=axes)
    out = np.zeros((d,) + grid.shape, dtype=complex)
    for k in range(d):
        for i in range(d):
            out[k] += derivative_symbol(grid, i) * hat[i, k]
    return out


def skew_divergence(Y: SkewMatrixField) -> VectorField:
    """Column-wise divergence of a skew matrix field, div(Y)_k = sum_i d_i Y_{ik}."""
    return VectorField.from_spectral(Y.grid, _skew_divergence(Y))


def omega_deformation(X: VectorField) -> SkewMatrixField:
    """Skew field describing the deformation of the symplectic form by X.

    With J the Jacobian of X this is omega^T J - J^T omega; it vanishes
    exactly when the flow of X preserves the form.
    """
    omega = symplectic_matrix(X.grid.n)
    J = jacobian(X)
    A = np.einsum("ki,kj...->ij...", omega, J)
    return skew_part(X.grid, A)


def omega_deformation_adjoint(Y: SkewMatrixField) -> VectorField:
    """Formal L^2 adjoint: -2 div(Y) . omega as a vector field."""
    grid = Y.grid
    omega = symplectic_matrix(grid.n)
    div_hat = _skew_divergence(Y)
    out_hat = np.einsum("kj,k...->j...", omega, div_hat) * (-2.0)
    return VectorField.from_spectral(grid, out_hat)


def divergence_curl(Y: SkewMatrixField) -> SkewMatrixField:
    """Antisymmetrized gradient of the skew field's divergence vector."""
    grid = Y.grid
    d = grid.dim
    div_hat = _skew_divergence(Y)
    A = np.empty((d, d) + grid.shape)
    axes = tuple(range(1, 1 + d))
    for l in range(d):
        sym = derivative_symbol(grid, l)
        A[:, l] = np.real(np.fft.ifftn(div_hat * sym, axes=axes))
    return skew_part(grid, A)


# ---------------------------------------------------------------------------
# quadratic forms of a velocity field


def _spatial_fft(grid: GridSpec, values: np.ndarray, lead: int) -> np.ndarray:
    axes = tuple(range(lead, lead + grid.dim))
    return np.fft.fftn(values, axes=axes)


def _dealias_and_skew(grid: GridSpec, matrix_values: np.ndarray) -> SkewMatrixField:
    mask = dealias_mask(grid)
    hat = _spatial_fft(grid, matrix_values, 2) * mask
    axes = tuple(range(2, 2 + grid.dim))
    vals = np.real(np.fft.ifftn(hat, axes=axes))
    return skew_part(grid, vals)


def advective_deformation_strain(u: VectorField) -> SkewMatrixField:
    """Strain form: built from M_{ij} = sum_k d_j u_k d_k u_i.

    This is the first-derivative-products part of the deformation of the
    advection term; it carries the high-frequency content.
    """
    u = two_thirds_truncate(u)
    grid = u.grid
    omega = symplectic_matrix(grid.n)
    J = jacobian(u)
    M = np.einsum("kj...,ik...->ij...", J, J)
    A = np.einsum("ki,kj...->ij...", omega, M)
    return _dealias_and_skew(grid, A)


def advective_deformation_flux(u: VectorField) -> SkewMatrixField:
    """Flux (conservative) form: built from sum_k d_k(d_j u_k * u_i).

    Algebraically equals the strain form plus the compressibility defect;
    written in divergence form it stays bounded on low frequencies.
    """
    u = two_thirds_truncate(u)
    grid = u.grid
    d = grid.dim
    omega = symplectic_matrix(grid.n)
    J = jacobian(u)
    # w[i, j, k] = u_i * d_j u_k, then M~_{ij} = sum_k d_k w[i, j, k]
    w = np.einsum("i...,kj...->ijk...", u.values, J)
    w_hat = _spatial_fft(grid, w, 3)
    M_hat = np.zeros((d, d) + grid.shape, dtype=complex)
    for k in range(d):
        M_hat += derivative_symbol(grid, k) * w_hat[:, :, k]
    axes = tuple(range(2, 2 + d))
    M = np.real(np.fft.ifftn(M_hat, axes=axes))
    A = np.einsum("ki,kj...->ij...", omega, M)
    return _dealias_and_skew(grid, A)


def compressibility_defect(u: VectorField) -> SkewMatrixField:
    """Defect between flux and strain forms: entries u_i d_j(div u).

    Vanishes identically on divergence-free (symplectic) fields.
    """
    u = two_thirds_truncate(u)
    grid = u.grid
    d = grid.dim
    omega = symplectic_matrix(grid.n)
    div_hat = divergence(u).hat
    grad_div = np.empty((d,) + grid.shape)
    for j in range(d):
        grad_div[j] = np.real(np.fft.ifftn(div_hat * derivative_symbol(grid, j)))
    G = np.einsum("i...,j...->ij...", u.values, grad_div)
    A = np.einsum("ki,kj...->ij...", omega, G)
    return _dealias_and_skew(grid, A)


def constraint_force(u: VectorField, cutoff_radius: float = 1.0) -> VectorField:
    """Bounded quadratic force keeping symplectic data symplectic.

    High frequencies (outside the ball |xi| <= cutoff_radius) use the
    strain form, low frequencies the flux form; on symplectic fields the
    two agree and the split is invisible. The result is L^2-orthogonal
    to every symplectic field and has zero symplectic divergence.
    """
    grid = u.grid
    chi = ball_cutoff_mask(grid, cutoff_radius)
    strain = advective_deformation_strain(u)
    flux = advective_deformation_flux(u)
    omega = symplectic_matrix(grid.n)
    div_strain = _skew_divergence(strain)
    div_flux = _skew_divergence(flux)
    div_mix = (1.0 - chi) * div_strain + chi * div_flux
    adj_hat = np.einsum("kj,k...->j...", omega, div_mix) * (-2.0)
    # -1/2 inverse Laplacian of the mixed adjoint; the symbol of the
    # inverse Laplacian is -1/|xi|^2 with the zero mode discarded.
    xi2 = grid.frequency_squared
    sym = np.where(xi2 > 0.0, 0.5 / np.where(xi2 > 0.0, xi2, 1.0), 0.0)
    return VectorField.from_spectral(grid, sym * adj_hat)


def advection_term(u: VectorField) -> VectorField:
    """(u . grad) u with 2/3-rule dealiasing."""
    u = two_thirds_truncate(u)
    grid = u.grid
    J = jacobian(u)
    adv = np.einsum("j...,ij...->i...", u.values, J)
    hat = _spatial_fft(grid, adv, 1) * dealias_mask(grid)
    return VectorField.from_spectral(grid, hat)


# ---------------------------------------------------------------------------
# symplectic gradient / divergence calculus


def symplectic_gradient(H: ScalarField) -> VectorField:
    """(d_2 H, -d_1 H, ..., d_{2n} H, -d_{2n-1} H)."""
    grid = H.grid
    hat = H.hat
    comps = np.empty((grid.dim,) + grid.shape, dtype=complex)
    for a in range(grid.n):
        comps[2 * a] = hat * derivative_symbol(grid, 2 * a + 1)
        comps[2 * a + 1] = -hat * derivative_symbol(grid, 2 * a)
    return VectorField.from_spectral(grid, comps)


def symplectic_divergence(u: VectorField) -> ScalarField:
    """d_2 u_1 - d_1 u_2 + ... + d_{2n} u_{2n-1} - d_{2n-1} u_{2n}."""
    grid = u.grid
    hat = np.zeros(grid.shape, dtype=complex)
    for a in range(grid.n):
        hat += derivative_symbol(grid, 2 * a + 1) * u.hat[2 * a]
        hat -= derivative_symbol(grid, 2 * a) * u.hat[2 * a + 1]
    return ScalarField.from_spectral(grid, hat)


def velocity_from_symplectic_divergence(zeta: ScalarField) -> VectorField:
    """Unique mean-free symplectic field with the given symplectic divergence.

    The symplectic divergence of a symplectic gradient is the Laplacian,
    so the inverse is the symplectic gradient of the inverse Laplacian.
    The zero mode of zeta is discarded.
    """
    return symplectic_gradient(inverse_laplacian(zeta))


def project_symplectic(u: VectorField) -> VectorField:
    """L^2-orthogonal projection onto fields preserving the symplectic form.

    Computed as u + (1/2) Delta^{-1} (adjoint o deformation)(u); the zero
    mode passes through unchanged.
    """
    correction = inverse_laplacian(
        omega_deformation_adjoint(omega_deformation(u))
    )
    return VectorField(u.grid, u.values + 0.5 * correction.values)


# ---------------------------------------------------------------------------
# probes


def riesz_commutator_ratio(u: VectorField, f: ScalarField, axis: int, s: float) -> float:
    """|| [u.grad, R_axis] f ||_{L^2} / (||u||_{H^s} ||f||_{L^2})."""
    u = two_thirds_truncate(u)
    f = two_thirds_truncate(f)
    grid = u.grid
    from .spectral import riesz_transform, dealias_mask as _dm

    def advect(g: ScalarField) -> ScalarField:
        total = np.zeros(grid.shape)
        for j in range(grid.dim):
            dg = np.real(np.fft.ifftn(g.hat * derivative_symbol(grid, j)))
            total += u.values[j] * dg
        out_hat = np.fft.fftn(total) * _dm(grid)
        return ScalarField.from_spectral(grid, out_hat)

    rf = riesz_transform(f, axis)
    commutator = advect(rf) - riesz_transform(advect(f), axis)
    l2_comm, _ = lebesgue_norms(commutator)
    l2_f, _ = lebesgue_norms(f)
    denom = sobolev_norm(u, s) * l2_f
    if denom == 0.0:
        return 0.0
    return l2_comm / denom
