# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the differential calculus on fields: d, d_ω, F_ω, interior and
covariant Lie derivatives, the vector field bracket and integration of top densities.

d = Σ_μ dx^μ ∂_μ with dx^μ acting from the left, so it anticommutes with every odd
generator (ghosts included). ι_ξ is even for odd ξ and odd for even ξ.
"""

from __future__ import annotations

import logging
from typing import Dict

import numpy as np

from pc_boundary_lab.algebra_common.fibre import (
    FibreElement,
    VectorFibre,
    contract_coordinate,
    interior_product,
    internal_bracket,
    top_coefficient,
    wedge,
)
from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber, merge_sign
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.fields_common.grid import derivative
from pc_boundary_lab.utils_common.errors import DegreeError

logger = logging.getLogger(__name__)


def partial(f: Field, mu: int) -> Field:
    """Coordinate derivative ∂_mu of every coefficient"""
    out = {}
    for mask, value in f.terms.items():
        if value.ndim == 0:
            continue
        out[mask] = derivative(value, f.grid, mu, f.backend)
    return f._new(out)


def partial_vector(xi: VectorField, mu: int) -> VectorField:
    out = {}
    for key, value in xi.terms.items():
        if value.ndim == 0:
            continue
        out[key] = derivative(value, xi.grid, mu, xi.backend)
    return xi._new(out)


def d(f: Field, strict: bool = True) -> Field:
    """Exterior derivative; top base degree input is an error unless strict is off"""
    layout = f.layout
    if strict and f.terms and max(f.base_degrees()) >= layout.base_dim:
        raise DegreeError("d of a top-degree form", {"degree": layout.base_dim})
    out: Dict[int, np.ndarray] = {}
    for mu in range(layout.base_dim):
        bit = layout.base_bit(mu)
        for mask, value in f.terms.items():
            if mask & bit or value.ndim == 0:
                continue
            sign = merge_sign(bit, mask)
            dv = derivative(value, f.grid, mu, f.backend)
            key = mask | bit
            dv = dv if sign > 0 else -dv
            out[key] = out[key] + dv if key in out else dv
    return f._new(out)


def _below_top(f: FibreElement) -> FibreElement:
    top = f.layout.base_dim
    return f.select(lambda m: f.layout.base_degree(m) < top)


def d_omega(omega: Field, f: Field, eta: InternalMetric, strict: bool = True) -> Field:
    """d_ω f = d f + [ω, f]"""
    if not strict:
        f = _below_top(f)
    return d(f) + internal_bracket(omega, f, eta)


def curvature(omega: Field, eta: InternalMetric) -> Field:
    """F_ω = dω + ½[ω, ω]"""
    return d(omega) + internal_bracket(omega, omega, eta).scale(0.5)


def bracket(x: FibreElement, a: FibreElement, eta: InternalMetric) -> FibreElement:
    return internal_bracket(x, a, eta)


def iota(xi: VectorFibre, a: FibreElement) -> FibreElement:
    """ι_ξ a, zero on base 0-forms"""
    if not a.terms or max(a.base_degrees()) == 0:
        if isinstance(xi, VectorField):
            return xi._scalar({})
        return a._new({})
    return interior_product(xi, a)


def iota_parity(xi: VectorFibre) -> int:
    parity = xi.parity()
    if parity is None:
        raise DegreeError("Vector field is not homogeneous")
    return (parity + 1) % 2


def covariant_lie(xi: VectorFibre, omega: Field, a: Field, eta: InternalMetric) -> Field:
    """L_ξ^ω a = ι_ξ d_ω a − (−1)^{|ι_ξ|} d_ω ι_ξ a"""
    if not xi.terms:
        return a._new({})
    sign = 1.0 if iota_parity(xi) == 0 else -1.0
    first = iota(xi, d_omega(omega, a, eta, strict=False))
    second = d_omega(omega, iota(xi, a), eta, strict=False)
    return first + second.scale(-sign)


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """[X, Y]^μ = X^ν ∂_ν Y^μ − (−1)^{|X||Y|} Y^ν ∂_ν X^μ"""
    p, q = x.parity(), y.parity()
    if p is None or q is None:
        raise DegreeError("Vector fields must be homogeneous")
    sign = -1.0 if (p * q) % 2 == 0 else 1.0
    n = x.layout.base_dim
    xs, ys = x.components(), y.components()
    comps = []
    for mu in range(n):
        total = x._scalar({})
        for nu in range(n):
            total = total + wedge(xs[nu], partial(ys[mu], nu))
            total = total + wedge(ys[nu], partial(xs[mu], nu)).scale(sign)
        comps.append(total)
    return VectorField.from_components(comps, grid=x.grid, backend=x.backend)


def integrate(f: Field) -> GrassmannNumber:
    """
    ∫ of a top density: coefficient of dx^0..dx^{n-1} e_0..e_{N-1} (orientation +1,
    density factor 1) summed over nodes times the cell volume.
    """
    layout = f.layout
    top = layout.base_all | layout.internal_all
    for mask in f.terms:
        if mask & ~layout.ghost_all != top:
            raise DegreeError(
                "integrate needs base degree n and internal degree N",
                {"degrees": sorted(f.degrees())},
            )
    out = {}
    for ghost, value in top_coefficient(f).items():
        if value.ndim == 0:
            out[ghost] = float(value) * f.grid.volume
        else:
            out[ghost] = float(np.sum(value)) * f.grid.cell_volume
    return GrassmannNumber(out, layout.n_ghost)


def integrate_density(f: Field) -> GrassmannNumber:
    """integrate() after discarding anything below top degree"""
    layout = f.layout
    top = layout.base_all | layout.internal_all
    return integrate(f.select(lambda m: m & ~layout.ghost_all == top))


def coordinate_component(a: Field, mu: int) -> Field:
    """(a)_mu = ι_{∂_mu} a"""
    return contract_coordinate(a, mu)
