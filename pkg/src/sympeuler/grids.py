"""Uniform periodic grids for pseudo-spectral work on [0, L)^{2n}."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on the box [0, box_length)^{2n}.

    The physical dimension is ``2 * n`` (coordinates come in symplectic
    pairs), sampled at ``points_per_axis`` points along every axis.
    Spectral data lives on the integer lattice k in [-N/2, N/2)^{2n} in
    FFT order, with angular frequencies xi = 2*pi*k/box_length. The
    forward transform uses the e^{-i x.xi} convention, so differentiation
    along axis j is multiplication by i*xi_j.
    """

    n: int
    points_per_axis: int
    box_length: float = 2.0 * np.pi

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.points_per_axis < 4 or self.points_per_axis % 2 != 0:
            raise ValueError("points_per_axis must be an even integer >= 4")
        if not self.box_length > 0.0:
            raise ValueError("box_length must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def num_points(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def box_volume(self) -> float:
        return self.box_length ** self.dim

    @functools.cached_property
    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.points_per_axis) * self.spacing

    def coordinate_arrays(self) -> list[np.ndarray]:
        """Physical coordinates as broadcastable (sparse) meshgrid arrays."""
        return list(
            np.meshgrid(*([self.axis_coordinates] * self.dim), indexing="ij", sparse=True)
        )

    @functools.cached_property
    def axis_frequencies(self) -> np.ndarray:
        """Angular frequencies along a single axis, in FFT order."""
        N = self.points_per_axis
        return np.fft.fftfreq(N, d=1.0 / N) * (2.0 * np.pi / self.box_length)

    def frequency_arrays(self) -> list[np.ndarray]:
        """Angular frequency lattices, one broadcastable array per axis."""
        return list(
            np.meshgrid(*([self.axis_frequencies] * self.dim), indexing="ij", sparse=True)
        )

    @functools.cached_property
    def frequency_squared(self) -> np.ndarray:
        """|xi|^2 on the full lattice (FFT order)."""
        out = np.zeros(self.shape)
        for xi in self.frequency_arrays():
            out = out + xi**2
        return out

    def frequency(self, k) -> np.ndarray:
        """Frequency vector xi = 2*pi*k/L for an integer multi-index k."""
        k = np.asarray(k, dtype=float)
        if k.shape != (self.dim,):
            raise ValueError(f"expected a multi-index of length {self.dim}")
        half = self.points_per_axis // 2
        if np.any(k < -half) or np.any(k >= half):
            raise ValueError("multi-index outside [-N/2, N/2)")
        return 2.0 * np.pi * k / self.box_length

    def compatible(self, other: "GridSpec") -> bool:
        return (
            self.n == other.n
            and self.points_per_axis == other.points_per_axis
            and np.isclose(self.box_length, other.box_length, rtol=1e-13, atol=0.0)
        )
