"""Scalar, vector and skew-matrix fields sampled on a periodic grid.

Fields store real physical samples as the canonical representation and
cache the full-lattice Fourier coefficients on first use. Instances are
treated as immutable: operations return new fields and never mutate the
underlying arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import GridSpec

__all__ = ["ScalarField", "VectorField", "SkewMatrixField", "skew_part"]


def _check_grid(grid: GridSpec, values: np.ndarray, extra_dims: int) -> None:
    expected = grid.shape
    if values.shape[extra_dims:] != expected:
        raise ValueError(
            f"values shape {values.shape} does not match grid shape {expected}"
        )


@dataclass(eq=False)
class ScalarField:
    """Real scalar field on a periodic grid."""

    grid: GridSpec
    values: np.ndarray
    _hat: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        _check_grid(self.grid, self.values, 0)

    @property
    def hat(self) -> np.ndarray:
        """Fourier coefficients on the full lattice (unnormalized fftn)."""
        if self._hat is None:
            self._hat = np.fft.fftn(self.values)
        return self._hat

    @classmethod
    def from_spectral(cls, grid: GridSpec, coeffs: np.ndarray) -> "ScalarField":
        """Build a field from full-lattice coefficients.

        The coefficients must be Hermitian-symmetric (they describe a real
        field); the imaginary part of the inverse transform is discarded.
        """
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != grid.shape:
            raise ValueError("coefficient array does not match grid shape")
        out = cls(grid, np.real(np.fft.ifftn(coeffs)))
        out._hat = coeffs
        return out

    def mean(self) -> float:
        return float(self.values.mean())

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values)


@dataclass(eq=False)
class VectorField:
    """Vector field with 2n components on a shared periodic grid.

    ``values`` is stacked with the component axis first:
    shape ``(2n, N, ..., N)``.
    """

    grid: GridSpec
    values: np.ndarray
    _hat: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.grid.dim:
            raise ValueError(
                f"expected {self.grid.dim} components, got {self.values.shape[0]}"
            )
        _check_grid(self.grid, self.values, 1)

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            axes = tuple(range(1, 1 + self.grid.dim))
            self._hat = np.fft.fftn(self.values, axes=axes)
        return self._hat

    @classmethod
    def from_spectral(cls, grid: GridSpec, coeffs: np.ndarray) -> "VectorField":
        coeffs = np.asarray(coeffs, dtype=complex)
        axes = tuple(range(1, 1 + grid.dim))
        out = cls(grid, np.real(np.fft.ifftn(coeffs, axes=axes)))
        out._hat = coeffs
        return out

    @classmethod
    def from_components(cls, components: list[ScalarField]) -> "VectorField":
        grid = components[0].grid
        if len(components) != grid.dim:
            raise ValueError(f"expected {grid.dim} components")
        for c in components[1:]:
            if not grid.compatible(c.grid):
                raise ValueError("components live on incompatible grids")
        return cls(grid, np.stack([c.values for c in components]))

    def component(self, i: int) -> ScalarField:
        out = ScalarField(self.grid, self.values[i])
        if self._hat is not None:
            out._hat = self._hat[i]
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, self.values + other.values)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "VectorField":
        return VectorField(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return VectorField(self.grid, -self.values)


@dataclass(eq=False)
class SkewMatrixField:
    """Field of skew-symmetric (2n x 2n) matrices on a periodic grid.

    ``values`` has shape ``(2n, 2n, N, ..., N)`` and is expected to be
    exactly skew-symmetric at every grid point; constructors in this
    package build it as A - A^T, which is exact in floating point.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        d = self.grid.dim
        if self.values.shape[:2] != (d, d):
            raise ValueError(f"expected leading matrix axes ({d}, {d})")
        _check_grid(self.grid, self.values, 2)

    def entry(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[i, j])

    @property
    def symmetry_defect(self) -> float:
        """Grid max of |Y + Y^T|; zero for an exactly skew field."""
        return float(np.abs(self.values + np.swapaxes(self.values, 0, 1)).max())

    @classmethod
    def from_upper_entries(cls, grid: GridSpec, entries: dict) -> "SkewMatrixField":
        """Build from entries {(i, j): array} with i < j; the rest by skewness."""
        d = grid.dim
        values = np.zeros((d, d) + grid.shape)
        for (i, j), arr in entries.items():
            if not i < j:
                raise ValueError("entries must be strictly upper triangular")
            arr = np.asarray(arr, dtype=float)
            values[i, j] = arr
            values[j, i] = -arr
        return cls(grid, values)

    def __add__(self, other: "SkewMatrixField") -> "SkewMatrixField":
        return SkewMatrixField(self.grid, self.values + other.values)

    def __sub__(self, other: "SkewMatrixField") -> "SkewMatrixField":
        return SkewMatrixField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "SkewMatrixField":
        return SkewMatrixField(self.grid, self.values * float(c))

    __rmul__ = __mul__


def skew_part(grid: GridSpec, matrix_values: np.ndarray) -> SkewMatrixField:
    """A - A^T on the leading matrix axes (exactly skew in floating point)."""
    return SkewMatrixField(grid, matrix_values - np.swapaxes(matrix_values, 0, 1))
