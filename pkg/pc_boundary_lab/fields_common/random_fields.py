# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the random configuration generators used by the verification
suites and the tests: coframes near the identity, bandlimited forms and
Grassmann-polarized ghost fields.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Optional

import numpy as np

from pc_boundary_lab.algebra_common.grassmann import Layout
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.utils_common.errors import DegeneracyError


def random_coefficient(
    rng: np.random.Generator,
    grid: Grid,
    constant: bool = True,
    bandwidth: int = 1,
    amplitude: float = 1.0,
):
    """Uniform [-1, 1] constant, or a trigonometric polynomial with modes |k| <= bandwidth per axis"""
    value = rng.uniform(-1.0, 1.0)
    if constant or bandwidth <= 0:
        return amplitude * value
    coords = grid.coordinates()
    arr = np.full(grid.dims, value)
    for axis, x in enumerate(coords):
        for k in range(1, bandwidth + 1):
            phase = 2.0 * np.pi * k * x / grid.lengths[axis]
            arr = arr + rng.uniform(-1.0, 1.0) * np.cos(phase) + rng.uniform(-1.0, 1.0) * np.sin(phase)
    return amplitude * arr / (1.0 + 2.0 * bandwidth * grid.ndim)


def ghost_monomials(layout: Layout, label: Optional[str], degree: int = 1) -> List[int]:
    """Ghost monomials of a given degree in the generators of one label (degree 0 gives [0])"""
    if label is None or degree == 0:
        return [0]
    gens = layout.generators(label)
    out = []
    for combo in combinations(gens, degree):
        mask = 0
        for k in combo:
            mask |= 1 << k
        out.append(mask)
    return out


def random_form(
    layout: Layout,
    grid: Grid,
    backend: Backend,
    i: int,
    j: int,
    rng: np.random.Generator,
    ghost: Optional[str] = None,
    constant: bool = True,
    bandwidth: int = 1,
    amplitude: float = 1.0,
) -> Field:
    """Random element of Ω^{i,j}; with `ghost`, polarized as Σ_k θ_k X_k over that label"""
    terms: Dict[int, object] = {}
    for gm in ghost_monomials(layout, ghost):
        for base in combinations(range(layout.base_dim), i):
            for internal in combinations(range(layout.internal_dim), j):
                mask = gm | layout.base_mask(base) | layout.internal_mask(internal)
                terms[mask] = random_coefficient(rng, grid, constant, bandwidth, amplitude)
    return Field(layout, terms, grid=grid, backend=backend)


def random_vector(
    layout: Layout,
    grid: Grid,
    backend: Backend,
    rng: np.random.Generator,
    ghost: Optional[str] = None,
    constant: bool = True,
    bandwidth: int = 1,
    amplitude: float = 1.0,
) -> VectorField:
    terms = {}
    for gm in ghost_monomials(layout, ghost):
        for mu in range(layout.base_dim):
            terms[(gm, mu)] = random_coefficient(rng, grid, constant, bandwidth, amplitude)
    return VectorField(layout, terms, grid=grid, backend=backend)


def coframe_field(layout: Layout, grid: Grid, backend: Backend, coframe) -> Field:
    """Field from E[..., a, c] (coefficient of dx^a e_c)"""
    coframe = np.asarray(coframe, dtype=float)
    terms = {}
    for a in range(layout.base_dim):
        for c in range(layout.internal_dim):
            value = coframe[..., a, c]
            if np.any(value):
                terms[layout.base_bit(a) | layout.internal_bit(c)] = value
    return Field(layout, terms, grid=grid, backend=backend)


def vector_field_internal(layout: Layout, grid: Grid, backend: Backend, vec) -> Field:
    vec = np.asarray(vec, dtype=float)
    terms = {}
    for c in range(layout.internal_dim):
        value = vec[..., c]
        if np.any(value):
            terms[layout.internal_bit(c)] = value
    return Field(layout, terms, grid=grid, backend=backend)


def default_normal(coframe: np.ndarray, eta: InternalMetric) -> np.ndarray:
    """Internal vector η-orthogonal to span(e), normalized, last component positive"""
    weights = np.array(eta.components, dtype=float)
    _, _, vh = np.linalg.svd(coframe * weights)
    normal = vh[..., -1, :]
    norm2 = np.abs(np.sum(weights * normal * normal, axis=-1))
    if np.any(norm2 < 1e-12):
        raise DegeneracyError("Normal to the coframe is lightlike")
    normal = normal / np.sqrt(norm2)[..., None]
    flip = np.where(normal[..., -1] < 0, -1.0, 1.0)
    return normal * flip[..., None]


def identity_geometry(
    layout: Layout,
    grid: Grid,
    backend: Backend = Backend.SPECTRAL,
    eta: Optional[InternalMetric] = None,
    cosmological: float = 0.0,
    omega0: Optional[Field] = None,
) -> Geometry:
    """e = Σ_a dx^a e_a and e_n the last internal axis"""
    eta = eta or InternalMetric.lorentzian(layout.internal_dim)
    coframe = np.eye(layout.base_dim, layout.internal_dim)
    normal = np.zeros(layout.internal_dim)
    normal[-1] = 1.0
    e = coframe_field(layout, grid, backend, coframe)
    e_n = vector_field_internal(layout, grid, backend, normal)
    return Geometry(e, e_n, eta, omega0, cosmological)


def random_geometry(
    layout: Layout,
    grid: Grid,
    backend: Backend,
    rng: np.random.Generator,
    eps: float = 0.2,
    constant: bool = True,
    bandwidth: int = 1,
    eta: Optional[InternalMetric] = None,
    cosmological: float = 0.0,
    omega0_scale: float = 0.0,
    max_tries: int = 20,
) -> Geometry:
    """
    Coframe identity + eps·perturbation with a default e_n; resampled until g∂ and
    the frame are nondegenerate at every node.
    """
    eta = eta or InternalMetric.lorentzian(layout.internal_dim)
    n, big_n = layout.base_dim, layout.internal_dim
    for _ in range(max_tries):
        shape = () if constant else grid.dims
        coframe = np.zeros(shape + (n, big_n))
        for a in range(n):
            for c in range(big_n):
                coframe[..., a, c] = (1.0 if a == c else 0.0) + eps * np.asarray(
                    random_coefficient(rng, grid, constant, bandwidth)
                )
        try:
            normal = default_normal(coframe, eta)
        except DegeneracyError:
            continue
        e = coframe_field(layout, grid, backend, coframe)
        e_n = vector_field_internal(layout, grid, backend, normal)
        omega0 = None
        if omega0_scale:
            omega0 = random_form(layout, grid, backend, 1, 2, rng, constant=True, amplitude=omega0_scale)
        geometry = Geometry(e, e_n, eta, omega0, cosmological)
        try:
            return geometry.check_nondegenerate()
        except DegeneracyError:
            continue
    raise DegeneracyError("Could not sample a nondegenerate coframe", details={"tries": max_tries})
