# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the constraint functionals

    L_c = ∫ c e^{N-3} d_ω e
    P_ξ = ∫ ι_ξ e e^{N-3} F_ω + ι_ξ(ω - ω0) e^{N-3} d_ω e
    H_λ = ∫ λ e_n (e^{N-3} F_ω + Λ/(N-1)! e^{N-1})

and the odd Lagrange multipliers they are smeared with.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pc_boundary_lab.algebra_common.fibre import wedge
from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber, Layout, build_layout, popcount
from pc_boundary_lab.fields_common.calculus import curvature, d_omega, iota, integrate
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.fields_common.random_fields import random_form, random_vector
from pc_boundary_lab.slice_common.slice import ACCEPT_TOL, structural_residual
from pc_boundary_lab.utils_common.errors import DegreeError, OffSliceError

logger = logging.getLogger(__name__)

MULTIPLIER_LABELS = ("c", "xi", "lam")


def multiplier_layout(base_dim: int, internal_dim: int, generators: int = 3, max_generators: int = 40) -> Layout:
    """`generators` odd generators of ghost number 1 for each of c, ξ, λ"""
    return build_layout(base_dim, internal_dim, {label: (generators, 1) for label in MULTIPLIER_LABELS}, max_generators)


def _odd_ghosts(f) -> bool:
    layout = f.layout
    if isinstance(f, VectorField):
        masks = [g for (g, _mu) in f.terms]
    else:
        masks = [m & layout.ghost_all for m in f.terms]
    return all(popcount(g) & 1 for g in masks)


@dataclass
class Multipliers:
    """Odd multipliers c ∈ Ω^{0,2}_∂[1], ξ ∈ 𝔛[1](Σ), λ ∈ Ω^{0,0}_∂[1]"""

    c: Field
    xi: VectorField
    lam: Field

    def __post_init__(self):
        if self.c.terms and self.c.degrees() != {(0, 2)}:
            raise DegreeError("c must lie in Ω^{0,2}", {"degrees": sorted(self.c.degrees())})
        if self.lam.terms and self.lam.degrees() != {(0, 0)}:
            raise DegreeError("λ must lie in Ω^{0,0}", {"degrees": sorted(self.lam.degrees())})
        for name in ("c", "xi", "lam"):
            if not _odd_ghosts(getattr(self, name)):
                raise DegreeError("Multipliers must be odd in the ghost generators", {"field": name})

    @classmethod
    def zero(cls, layout: Layout, grid: Grid, backend: Backend) -> "Multipliers":
        c = Field(layout, {}, grid=grid, backend=backend)
        return cls(c, VectorField(layout, {}, grid=grid, backend=backend), c)

    def scaled(self, c: float = 1.0, xi: float = 1.0, lam: float = 1.0) -> "Multipliers":
        return Multipliers(self.c.scale(c), self.xi.scale(xi), self.lam.scale(lam))


def random_multipliers(
    layout: Layout,
    grid: Grid,
    backend: Backend,
    rng: np.random.Generator,
    constant: bool = False,
    bandwidth: int = 1,
    labels=MULTIPLIER_LABELS,
    amplitude: float = 1.0,
) -> Multipliers:
    """Each multiplier polarized over the ghost generators of its label"""
    c_label, xi_label, lam_label = labels
    c = random_form(layout, grid, backend, 0, 2, rng, ghost=c_label, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    xi = random_vector(layout, grid, backend, rng, ghost=xi_label, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    lam = random_form(layout, grid, backend, 0, 0, rng, ghost=lam_label, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    return Multipliers(c, xi, lam)


def L_density(geometry: Geometry, omega: Field, c: Field) -> Field:
    N = geometry.N
    torsion = d_omega(omega, geometry.e, geometry.eta)
    return wedge(wedge(c, geometry.power(N - 3)), torsion)


def P_density(geometry: Geometry, omega: Field, xi: VectorField, bare: bool = False) -> Field:
    N = geometry.N
    en3 = geometry.power(N - 3)
    density = wedge(wedge(iota(xi, geometry.e), en3), curvature(omega, geometry.eta))
    if not bare:
        torsion = d_omega(omega, geometry.e, geometry.eta)
        density = density + wedge(wedge(iota(xi, omega - geometry.omega0), en3), torsion)
    return density


def H_density(geometry: Geometry, omega: Field, lam: Field) -> Field:
    N = geometry.N
    inner = wedge(geometry.power(N - 3), curvature(omega, geometry.eta))
    if geometry.cosmological:
        inner = inner + geometry.power(N - 1).scale(geometry.cosmological / math.factorial(N - 1))
    return wedge(wedge(lam, geometry.e_n), inner)


def L_of(geometry: Geometry, omega: Field, c: Field) -> GrassmannNumber:
    """∫ c e^{N-3} d_ω e for any (even or odd) c ∈ Ω^{0,2}"""
    return integrate(L_density(geometry, omega, c))


def P_of(geometry: Geometry, omega: Field, xi: VectorField, bare: bool = False) -> GrassmannNumber:
    """∫ ι_ξ e e^{N-3} F_ω (+ ι_ξ(ω - ω0) e^{N-3} d_ω e unless bare)"""
    return integrate(P_density(geometry, omega, xi, bare))


def H_of(geometry: Geometry, omega: Field, lam: Field) -> GrassmannNumber:
    """∫ λ e_n (e^{N-3} F_ω + Λ/(N-1)! e^{N-1})"""
    return integrate(H_density(geometry, omega, lam))


@dataclass
class ConstraintValues:
    L: GrassmannNumber
    P: GrassmannNumber
    H: GrassmannNumber

    def total(self) -> GrassmannNumber:
        return self.L + self.P + self.H

    def norm(self) -> float:
        return max(self.L.norm(), self.P.norm(), self.H.norm())


def require_on_slice(omega: Field, geometry: Geometry, tol: float = ACCEPT_TOL):
    residual = structural_residual(omega, geometry)
    if residual > tol:
        raise OffSliceError("Connection is off the structural slice", {"residual": f"{residual:.3e}", "tol": tol})


def eval_constraints(
    geometry: Geometry,
    omega: Field,
    m: Multipliers,
    check_slice: bool = True,
    tol: float = ACCEPT_TOL,
) -> ConstraintValues:
    """(L_c, P_ξ, H_λ) on an on-slice connection"""
    if check_slice:
        require_on_slice(omega, geometry, tol)
    return ConstraintValues(L_of(geometry, omega, m.c), P_of(geometry, omega, m.xi), H_of(geometry, omega, m.lam))


def eval_constraints_bare(
    geometry: Geometry,
    omega: Field,
    m: Multipliers,
    check_slice: bool = True,
    tol: float = ACCEPT_TOL,
) -> ConstraintValues:
    """
    Same as eval_constraints with P_ξ = ∫ ι_ξ e e^{N-3} F_ω. Defines the same
    constraint set but does not close on the simplified bracket table.
    """
    if check_slice:
        require_on_slice(omega, geometry, tol)
    return ConstraintValues(
        L_of(geometry, omega, m.c), P_of(geometry, omega, m.xi, bare=True), H_of(geometry, omega, m.lam)
    )
