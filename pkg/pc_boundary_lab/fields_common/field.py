# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains Field and VectorField: fibre values batched over a periodic grid.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from pc_boundary_lab.algebra_common.fibre import FibreElement, VectorFibre
from pc_boundary_lab.algebra_common.grassmann import Layout
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.utils_common.errors import DegreeError


class Field(FibreElement):
    """
    A FibreElement per grid node. Coefficients that are spatially constant are kept
    as 0-d arrays. On the SPECTRAL backend nodal data are samples of a trigonometric
    polynomial, and calculus acts on it exactly only while that polynomial is
    resolved: products multiply nodal values, so a product of fields of bands b1..bp
    carries modes up to b1+..+bp, and a derivative of it is exact only when every
    axis has more than 2(b1+..+bp) nodes. Past that the product aliases onto lower
    modes (the Nyquist mode is dropped) and identities such as the Leibniz rule
    fail at O(1). Band-1 fields on 8 nodes per axis resolve derivatives of
    triple products.
    """

    _priority = 1

    def __init__(
        self,
        layout: Layout,
        terms: Optional[Dict[int, np.ndarray]] = None,
        shape=None,
        grid: Grid = None,
        backend: Backend = Backend.SPECTRAL,
    ):
        if grid is None:
            raise DegreeError("A Field needs a grid")
        self.grid = grid
        self.backend = Backend.parse(backend)
        super().__init__(layout, terms, grid.dims)

    def _meta(self) -> dict:
        return {"grid": self.grid, "backend": self.backend}

    def _check(self, other):
        super()._check(other)
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise DegreeError("Fields live on different grids")
            if other.backend != self.backend:
                raise DegreeError(
                    "Fields use different backends",
                    {"left": self.backend.value, "right": other.backend.value},
                )

    @classmethod
    def from_fibre(cls, fibre: FibreElement, grid: Grid, backend: Backend = Backend.SPECTRAL) -> "Field":
        return cls(fibre.layout, dict(fibre.terms), grid=grid, backend=backend)

    @property
    def ghost_number(self) -> Optional[int]:
        numbers = {self.layout.ghost_number(m) for m in self.terms}
        if not numbers:
            return 0
        return numbers.pop() if len(numbers) == 1 else None

    def is_constant(self) -> bool:
        return all(v.ndim == 0 for v in self.terms.values())

    def nodal(self) -> "Field":
        """Expand constant coefficients onto every node"""
        return self._new({m: np.broadcast_to(v, self.grid.dims).copy() for m, v in self.terms.items()})

    def describe(self) -> Dict:
        return {
            "degrees": sorted(self.degrees()),
            "parity": self.parity(),
            "ghost_number": self.ghost_number,
            "backend": self.backend.value,
            "grid": list(self.grid.dims),
        }


class VectorField(VectorFibre):
    """Possibly odd vector field on the boundary torus"""

    _priority = 1

    def __init__(
        self,
        layout: Layout,
        terms: Optional[Dict[Tuple[int, int], np.ndarray]] = None,
        shape=None,
        grid: Grid = None,
        backend: Backend = Backend.SPECTRAL,
    ):
        if grid is None:
            raise DegreeError("A VectorField needs a grid")
        self.grid = grid
        self.backend = Backend.parse(backend)
        super().__init__(layout, terms, grid.dims)

    def _meta(self) -> dict:
        return {"grid": self.grid, "backend": self.backend}

    def _scalar(self, terms, shape=None) -> Field:
        return Field(self.layout, terms, grid=self.grid, backend=self.backend)

    @classmethod
    def from_fields(cls, components) -> "VectorField":
        first = components[0]
        return cls.from_components(list(components), grid=first.grid, backend=first.backend)


def zero_field(layout: Layout, grid: Grid, backend: Backend = Backend.SPECTRAL) -> Field:
    return Field(layout, {}, grid=grid, backend=backend)


def unit_field(layout: Layout, grid: Grid, backend: Backend = Backend.SPECTRAL) -> Field:
    """The constant function 1"""
    return Field(layout, {0: 1.0}, grid=grid, backend=backend)
