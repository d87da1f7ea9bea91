# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the periodic grid on the boundary torus and the derivative backends.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from pc_boundary_lab.utils_common.errors import ConfigError


class Backend(str, Enum):
    FD = "FD"
    SPECTRAL = "SPECTRAL"

    @classmethod
    def parse(cls, value) -> "Backend":
        if isinstance(value, Backend):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError("Unknown backend", {"backend": value})


@dataclass(frozen=True)
class Grid:
    """Periodic grid on T^{n}; lengths default to the unit torus"""

    dims: Tuple[int, ...]
    lengths: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not self.lengths:
            object.__setattr__(self, "lengths", tuple(1.0 for _ in dims))
        if len(self.lengths) != len(dims):
            raise ConfigError("Grid lengths and dims disagree", {"dims": dims})
        if any(d < 3 for d in dims):
            raise ConfigError("Every grid axis needs at least 3 nodes", {"dims": dims})

    @classmethod
    def cube(cls, n: int, points: int) -> "Grid":
        return cls(tuple([points] * n))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(l / d for l, d in zip(self.lengths, self.dims))

    @property
    def nodes(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axes = [np.arange(d) * h for d, h in zip(self.dims, self.spacing)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        d = self.dims[axis]
        k = 2.0 * np.pi * np.fft.fftfreq(d, d=self.spacing[axis])
        if d % 2 == 0:
            # Nyquist mode has no odd derivative
            k[d // 2] = 0.0
        return k

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(tuple(d * factor for d in self.dims), self.lengths)


def derivative(values: np.ndarray, grid: Grid, axis: int, backend: Backend) -> np.ndarray:
    """
    ∂_axis of nodal data; 0-d (constant) data has zero derivative.

    FD is the periodic second order central difference. SPECTRAL differentiates the
    trigonometric interpolant, which is exact for modes |k| < dims/2 only; data
    holding higher modes (typically a product of resolved fields) alias, see Field.
    """
    if values.ndim == 0:
        return np.zeros(())
    if backend == Backend.FD:
        h = grid.spacing[axis]
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    shape = [1] * values.ndim
    shape[axis] = grid.dims[axis]
    k = grid.wavenumbers(axis).reshape(shape)
    return np.real(np.fft.ifft(1j * k * np.fft.fft(values, axis=axis), axis=axis))
