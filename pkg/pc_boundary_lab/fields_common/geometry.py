# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the background Geometry: coframe e, transversal section e_n,
internal metric η, reference connection ω0 and cosmological constant Λ.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional

import numpy as np

from pc_boundary_lab.algebra_common.fibre import check_frame, wedge
from pc_boundary_lab.algebra_common.grassmann import Layout
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.fields_common.field import Field
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.utils_common.errors import DegeneracyError, DegreeError

logger = logging.getLogger(__name__)


class Geometry:
    """
    Class to perform nondegeneracy checks and cache coframe powers for one
    boundary configuration.
    """

    def __init__(
        self,
        e: Field,
        e_n: Field,
        eta: InternalMetric,
        omega0: Optional[Field] = None,
        cosmological: float = 0.0,
    ):
        if e.degrees() - {(1, 1)}:
            raise DegreeError("Coframe must lie in Ω^{1,1}", {"degrees": sorted(e.degrees())})
        if e_n.degrees() - {(0, 1)}:
            raise DegreeError("e_n must lie in Ω^{0,1}", {"degrees": sorted(e_n.degrees())})
        self.e = e
        self.e_n = e_n
        self.eta = eta
        self.omega0 = omega0 if omega0 is not None else e._new({})
        self.cosmological = float(cosmological)
        self._powers: Dict[int, Field] = {}

    @property
    def layout(self) -> Layout:
        return self.e.layout

    @property
    def grid(self) -> Grid:
        return self.e.grid

    @property
    def backend(self) -> Backend:
        return self.e.backend

    @property
    def N(self) -> int:
        return self.layout.internal_dim

    @property
    def n(self) -> int:
        return self.layout.base_dim

    def with_layout(self, layout: Layout) -> "Geometry":
        """Same geometry re-homed on a layout with another ghost budget"""
        shift = layout.n_ghost - self.layout.n_ghost

        def move(f: Field) -> Field:
            return Field(layout, {m << shift: v for m, v in f.terms.items()}, grid=f.grid, backend=f.backend)

        return Geometry(move(self.e), move(self.e_n), self.eta, move(self.omega0), self.cosmological)

    def coframe_array(self) -> np.ndarray:
        """E[..., a, c]: coefficient of dx^a e_c in e; batch dims lead"""
        shapes = [v.shape for v in self.e.terms.values()] + [()]
        batch = np.broadcast_shapes(*shapes)
        out = np.zeros(batch + (self.n, self.N))
        for mask, value in self.e.terms.items():
            a = self.layout.base_entries(mask)[0]
            c = self.layout.internal_entries(mask)[0]
            out[..., a, c] += value
        return out

    def normal_array(self) -> np.ndarray:
        shapes = [v.shape for v in self.e_n.terms.values()] + [()]
        batch = np.broadcast_shapes(*shapes)
        out = np.zeros(batch + (self.N,))
        for mask, value in self.e_n.terms.items():
            out[..., self.layout.internal_entries(mask)[0]] += value
        return out

    def frame_matrix(self) -> np.ndarray:
        """M[..., c, k]: internal components of e_k (k < n) and e_n (k = n)"""
        coframe = self.coframe_array()
        normal = self.normal_array()
        batch = np.broadcast_shapes(coframe.shape[:-2], normal.shape[:-1])
        frame = np.zeros(batch + (self.N, self.N))
        frame[..., :, : self.n] = np.swapaxes(coframe, -1, -2)
        frame[..., :, self.n] = normal
        return frame

    def boundary_metric(self) -> np.ndarray:
        """g∂_ab = η(e_a, e_b)"""
        coframe = self.coframe_array()
        eta = np.array(self.eta.components, dtype=float)
        return np.einsum("...ac,c,...bc->...ab", coframe, eta, coframe)

    def degenerate_nodes(self, tol: float = 1e-10) -> Dict[str, List]:
        report = {}
        g = self.boundary_metric()
        sv = np.linalg.svd(g, compute_uv=False)
        bad = sv[..., -1] <= tol * np.maximum(sv[..., 0], 1.0)
        report["boundary_metric"] = [tuple(b) for b in np.argwhere(bad)] if bad.ndim else ([()] if bad else [])
        frame_bad = check_frame(self.frame_matrix(), tol)
        report["frame"] = [tuple(b) for b in frame_bad]
        return report

    def check_nondegenerate(self, tol: float = 1e-10):
        """Raise DegeneracyError naming every node where g∂ or (e_a, e_n) is singular"""
        report = self.degenerate_nodes(tol)
        if report["boundary_metric"]:
            raise DegeneracyError("Boundary metric g∂ is degenerate", nodes=report["boundary_metric"])
        if report["frame"]:
            raise DegeneracyError("Frame (e_a, e_n) is not a basis", nodes=report["frame"])
        return self

    def unit(self) -> Field:
        return Field(self.layout, {0: 1.0}, grid=self.grid, backend=self.backend)

    def power(self, k: int) -> Field:
        """e^k, cached; e^0 is the constant 1"""
        if k < 0:
            raise DegreeError("Negative coframe power", {"k": k})
        if k not in self._powers:
            self._powers[k] = self.unit() if k == 0 else wedge(self.power(k - 1), self.e)
        return self._powers[k]

    def frame_vector(self, k: int) -> Field:
        """e_k as an internal vector field (k = n gives e_n)"""
        if k == self.n:
            return self.e_n
        frame = self.frame_matrix()
        terms = {self.layout.internal_bit(c): frame[..., c, k] for c in range(self.N)}
        return Field(self.layout, terms, grid=self.grid, backend=self.backend)

    def is_constant(self) -> bool:
        return self.e.is_constant() and self.e_n.is_constant()
