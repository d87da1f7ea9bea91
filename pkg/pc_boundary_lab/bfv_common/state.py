# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the BFV phase space: the generator layout for ghosts and
antighosts, BFVState and its random sampler.

Ghosts c ∈ Ω^{0,2}, ξ ∈ 𝔛(Σ), λ ∈ Ω^{0,0} carry ghost number +1. Antighosts
c† ∈ Ω^{n,N-2}, λ† ∈ Ω^{n,N} and ξ† = Σ_a dx^a ⊗ ξ†_a with ξ†_a ∈ Ω^{n,N}
carry ghost number -1. Each field is polarized over the generators of its label.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from pc_boundary_lab.algebra_common.fibre import contract_coordinate, wedge
from pc_boundary_lab.algebra_common.grassmann import Layout, build_layout, popcount
from pc_boundary_lab.canonical_common.constraints import MULTIPLIER_LABELS, Multipliers, random_multipliers
from pc_boundary_lab.fields_common.field import Field
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.fields_common.random_fields import random_form
from pc_boundary_lab.slice_common.slice import ACCEPT_TOL, SliceSolver, sigma_of, structural_residual
from pc_boundary_lab.utils_common.errors import DegreeError, OffSliceError

logger = logging.getLogger(__name__)

ANTIGHOST_LABELS = ("cdag", "lamdag", "xidag")


def bfv_layout(base_dim: int, internal_dim: int, ghosts: int = 3, antighosts: int = 2, max_generators: int = 40) -> Layout:
    """Generators for c, ξ, λ (ghost number +1) then c†, λ†, ξ† (ghost number -1)"""
    allotment = {label: (ghosts, 1) for label in MULTIPLIER_LABELS}
    allotment.update({label: (antighosts, -1) for label in ANTIGHOST_LABELS})
    return build_layout(base_dim, internal_dim, allotment, max_generators)


def _check_antighost(f: Field, name: str, degrees: Tuple[int, int]):
    if f.terms and f.degrees() != {degrees}:
        raise DegreeError(f"{name} has the wrong form degree", {"expected": degrees, "degrees": sorted(f.degrees())})
    layout = f.layout
    for mask in f.terms:
        ghost = mask & layout.ghost_all
        if not popcount(ghost) & 1 or layout.ghost_number(ghost) != -1:
            raise DegreeError(f"{name} must be odd with ghost number -1", {"field": name})


@dataclass
class BFVState:
    geometry: Geometry
    omega: Field
    ghosts: Multipliers
    cdag: Field
    lamdag: Field
    xidag: Tuple[Field, ...]
    _sigma: Optional[Field] = field(default=None, repr=False)

    def __post_init__(self):
        n, N = self.geometry.n, self.geometry.N
        self.xidag = tuple(self.xidag)
        if len(self.xidag) != n:
            raise DegreeError("ξ† needs one component per boundary direction", {"components": len(self.xidag), "n": n})
        _check_antighost(self.cdag, "c†", (n, N - 2))
        _check_antighost(self.lamdag, "λ†", (n, N))
        for a, comp in enumerate(self.xidag):
            _check_antighost(comp, f"ξ†_{a}", (n, N))

    @property
    def N(self) -> int:
        return self.geometry.N

    @property
    def n(self) -> int:
        return self.geometry.n

    @property
    def layout(self) -> Layout:
        return self.geometry.layout

    @property
    def c(self) -> Field:
        return self.ghosts.c

    @property
    def xi(self):
        return self.ghosts.xi

    @property
    def lam(self) -> Field:
        return self.ghosts.lam

    @property
    def sigma(self) -> Field:
        """σ of the structural constraint, computed once"""
        if self._sigma is None:
            self._sigma = sigma_of(self.omega, self.geometry)
        return self._sigma

    @property
    def shifted_omega(self) -> Field:
        return self.omega - self.geometry.omega0

    def shifted_xidag(self, a: int) -> Field:
        """ξ′†_a = ξ†_a - (ω - ω0)_a c†"""
        return self.xidag[a] - wedge(contract_coordinate(self.shifted_omega, a), self.cdag)

    def antighost_targets(self) -> List[Field]:
        """(ξ′†_0, ..., ξ′†_{n-1}, λ†), the partners of the frame components (a) and (n)"""
        return [self.shifted_xidag(a) for a in range(self.n)] + [self.lamdag]

    def ghost_free(self) -> "BFVState":
        """Same state with every antighost set to zero"""
        zero = self.cdag._new({})
        return BFVState(self.geometry, self.omega, self.ghosts, zero, self.lamdag._new({}), tuple(zero._new({}) for _ in self.xidag), self._sigma)

    def relabel(self, perm) -> "BFVState":
        """Same state with the ghost generators renamed θ_k ↦ θ_{perm[k]}"""
        ghosts = Multipliers(self.c.relabel(perm), self.xi.relabel(perm), self.lam.relabel(perm))
        xidag = tuple(x.relabel(perm) for x in self.xidag)
        return BFVState(self.geometry, self.omega, ghosts, self.cdag.relabel(perm), self.lamdag.relabel(perm), xidag, self._sigma)

    def check(self, tol: float = ACCEPT_TOL) -> "BFVState":
        residual = structural_residual(self.omega, self.geometry)
        if residual > tol:
            raise OffSliceError("Connection is off the structural slice", {"residual": f"{residual:.3e}", "tol": tol})
        return self


def on_slice_connection(geometry: Geometry, rng: np.random.Generator, constant: bool = False, bandwidth: int = 1, amplitude: float = 1.0) -> Field:
    """Random ω̃ projected onto the structural slice"""
    omega_tilde = random_form(geometry.layout, geometry.grid, geometry.backend, 1, 2, rng, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    return SliceSolver(geometry).decompose(omega_tilde).omega


def random_bfv_state(
    geometry: Geometry,
    rng: np.random.Generator,
    constant: bool = False,
    bandwidth: int = 1,
    amplitude: float = 1.0,
    omega: Optional[Field] = None,
) -> BFVState:
    """Random on-slice ω with ghosts and antighosts polarized over their generators"""
    layout, grid, backend = geometry.layout, geometry.grid, geometry.backend
    for label in MULTIPLIER_LABELS + ANTIGHOST_LABELS:
        if not layout.generators(label):
            raise DegreeError("Layout has no generators for a BFV field", {"label": label})
    if omega is None:
        omega = on_slice_connection(geometry, rng, constant, bandwidth, amplitude)
    ghosts = random_multipliers(layout, grid, backend, rng, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    n, N = geometry.n, geometry.N

    def antighost(j: int, label: str) -> Field:
        return random_form(layout, grid, backend, n, j, rng, ghost=label, constant=constant, bandwidth=bandwidth, amplitude=amplitude)

    cdag = antighost(N - 2, "cdag")
    lamdag = antighost(N, "lamdag")
    xidag = tuple(antighost(N, "xidag") for _ in range(n))
    return BFVState(geometry, omega, ghosts, cdag, lamdag, xidag)


def random_relabelling(layout: Layout, rng: np.random.Generator) -> List[int]:
    """A permutation of the ghost generators that maps every label onto itself"""
    perm = list(range(layout.n_ghost))
    for label in dict.fromkeys(layout.ghost_labels):
        slots = layout.generators(label)
        for k, image in zip(slots, rng.permutation(slots)):
            perm[k] = int(image)
    return perm
