# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the BFV action S = S0 + S1, the ghost-number audit and the
cohomological vector field Q.

S0 = L_c + P_ξ + H_λ is the constraint part. S1 is linear in the antighosts:

    S1 = ∫ ½[c,c]c† - L_ξ^{ω0}c c† + ½ι_ξι_ξF_{ω0} c†
           + Σ_a X′^{(a)} ξ′†_a + X′^{(n)} λ† - ½ι_{[ξ,ξ]} ξ†

with X = [c, λe_n], Y = L_ξ^{ω0}(λe_n), X′ = X - Y and ξ′†_a = ξ†_a - (ω - ω0)_a c†.
The components (a), (n) are taken in the frame (e_a, e_n).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from pc_boundary_lab.algebra_common.fibre import contract_coordinate, frame_components, top_coefficient, wedge
from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber, Layout, ghost_number_profile, merge_sign
from pc_boundary_lab.bfv_common.state import BFVState
from pc_boundary_lab.canonical_common.brackets import (
    TangentPair,
    directional_derivative,
    frame_split,
    hamiltonian_fields,
    pairing_scale,
    poisson_bracket,
    random_direction,
    shifted_connection_multiplier,
)
from pc_boundary_lab.canonical_common.constraints import H_density, L_density, P_density
from pc_boundary_lab.fields_common.calculus import bracket, covariant_lie, curvature, integrate, iota, lie_bracket
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.slice_common.slice import wedge_preimage
from pc_boundary_lab.utils_common.errors import DegreeError
from pc_boundary_lab.utils_common.reports import GradientRow
from pc_boundary_lab.wedge_common.wedge_maps import fibre_basis

logger = logging.getLogger(__name__)

S0_TERMS = ("L", "P", "H")
S1_TERMS = (
    "cc_cdag",
    "lie_c_cdag",
    "iiF_cdag",
    "X_xidag",
    "X_lamdag",
    "Y_xidag",
    "Y_lamdag",
    "xixi_xidag",
)


class AntighostFrame:
    """
    Frame components of internal vectors paired with the antighosts:
    tangential(v) = Σ_a v^{(a)} ξ′†_a and normal(v) = v^{(n)} λ†.
    """

    def __init__(self, state: BFVState):
        self.state = state
        self.frame = state.geometry.frame_matrix()
        self.targets = state.antighost_targets()
        self.zero = state.cdag._new({})

    def components(self, v: Field) -> List[Field]:
        return frame_components(v, self.frame)

    def tangential(self, v: Field, comps: Optional[List[Field]] = None) -> Field:
        comps = self.components(v) if comps is None else comps
        total = self.zero
        for comp, target in zip(comps[:-1], self.targets[:-1]):
            if comp.terms:
                total = total + wedge(comp, target)
        return total

    def normal(self, v: Field, comps: Optional[List[Field]] = None) -> Field:
        comps = self.components(v) if comps is None else comps
        return wedge(comps[-1], self.targets[-1])

    def pair(self, v: Field) -> Field:
        comps = self.components(v)
        return self.tangential(v, comps) + self.normal(v, comps)


def composite_vectors(state: BFVState) -> Tuple[Field, Field]:
    """X = [c, λe_n] and Y = L_ξ^{ω0}(λe_n)"""
    geometry = state.geometry
    lam_en = wedge(state.lam, geometry.e_n)
    x = bracket(state.c, lam_en, geometry.eta)
    y = covariant_lie(state.xi, geometry.omega0, lam_en, geometry.eta)
    return x, y


def iota_vector(v: VectorField, forms: Iterable[Field]) -> Field:
    """Σ_a v^a f_a for one-form valued f = Σ_a dx^a ⊗ f_a"""
    total = None
    for comp, f in zip(v.components(), forms):
        term = wedge(comp, f)
        total = term if total is None else total + term
    return total


# action


def s0_densities(state: BFVState) -> Dict[str, Field]:
    geometry, omega = state.geometry, state.omega
    return {
        "L": L_density(geometry, omega, state.c),
        "P": P_density(geometry, omega, state.xi),
        "H": H_density(geometry, omega, state.lam),
    }


def s1_densities(
    state: BFVState, frame: Optional[AntighostFrame] = None, names: Optional[Iterable[str]] = None
) -> Dict[str, Field]:
    """The S1 integrands, all of them or only `names`"""
    geometry = state.geometry
    eta, omega0 = geometry.eta, geometry.omega0
    frame = frame or AntighostFrame(state)
    c, xi, cdag = state.c, state.xi, state.cdag
    cache = {}

    def composite(which: str) -> Tuple[Field, List[Field]]:
        if not cache:
            x, y = composite_vectors(state)
            cache["X"] = (x, frame.components(x))
            cache["Y"] = (y, frame.components(y))
        return cache[which]

    builders: Dict[str, Callable[[], Field]] = {
        "cc_cdag": lambda: wedge(bracket(c, c, eta), cdag).scale(0.5),
        "lie_c_cdag": lambda: -wedge(covariant_lie(xi, omega0, c, eta), cdag),
        "iiF_cdag": lambda: wedge(iota(xi, iota(xi, curvature(omega0, eta))), cdag).scale(0.5),
        "X_xidag": lambda: frame.tangential(*composite("X")),
        "X_lamdag": lambda: frame.normal(*composite("X")),
        "Y_xidag": lambda: -frame.tangential(*composite("Y")),
        "Y_lamdag": lambda: -frame.normal(*composite("Y")),
        "xixi_xidag": lambda: iota_vector(lie_bracket(xi, xi), state.xidag).scale(-0.5),
    }
    return {name: builders[name]() for name in (S1_TERMS if names is None else names)}


def ghost_number_audit(masks: Iterable[int], layout: Layout, expected: int, name: str = "S", strict: bool = True) -> bool:
    """Every monomial must carry ghost number `expected`"""
    profile = ghost_number_profile(masks, layout)
    stray = sorted(k for k in profile if k != expected)
    if stray:
        logger.warning(f"ghost number audit of {name}: profile {profile}, expected {expected}")
        if strict:
            raise DegreeError(
                "Ghost number audit failed",
                {"functional": name, "expected": expected, "found": stray},
            )
        return False
    return True


@dataclass
class BFVAction:
    S0: GrassmannNumber
    S1: GrassmannNumber
    terms: Dict[str, GrassmannNumber]
    density_total: GrassmannNumber

    @property
    def total(self) -> GrassmannNumber:
        return self.S0 + self.S1

    def scale(self) -> float:
        return max((t.norm() for t in self.terms.values()), default=0.0)

    def quadrature_mismatch(self) -> float:
        """|Σ term integrals - ∫ Σ densities| relative to the largest term"""
        return (self.total - self.density_total).norm() / max(self.scale(), 1e-300)


def eval_bfv_action(state: BFVState, audit: bool = True) -> BFVAction:
    densities = dict(s0_densities(state))
    densities.update(s1_densities(state))
    layout = state.layout
    if audit:
        for name, density in densities.items():
            ghost_number_audit(density.terms, layout, 1, name)
    terms = {name: integrate(density) for name, density in densities.items()}
    s0 = sum((terms[k] for k in S0_TERMS), GrassmannNumber({}, layout.n_ghost))
    s1 = sum((terms[k] for k in S1_TERMS), GrassmannNumber({}, layout.n_ghost))
    summed = None
    for density in densities.values():
        summed = density if summed is None else summed + density
    result = BFVAction(s0, s1, terms, integrate(summed))
    if audit:
        ghost_number_audit(result.total.terms, layout, 1, "S")
    logger.debug(f"S0 {s0.norm():.3e}, S1 {s1.norm():.3e}, quadrature mismatch {result.quadrature_mismatch():.3e}")
    return result


# cohomological vector field


@dataclass
class QComponents:
    """
    Q restricted to the fields. The ω-directions are kept as E = e^{N-3}Q_ω, the
    form in which ϖ sees them. For the antighost-linear part only E1 and
    D1 = Q1e e^{N-3} are primary; Q1e is their minimum-norm preimage.
    """

    q0_e: Field
    q0_E: Field
    q0_omega: Field
    c: Field
    lam: Field
    xi: VectorField
    q1_E: Field
    q1_D: Field
    q1_e: Field
    preimage_residual: float
    q1_residual: float

    def q0(self) -> TangentPair:
        return TangentPair(self.q0_e, self.q0_E, 1, self.q0_omega, "Q0")

    def q1(self) -> TangentPair:
        return TangentPair(self.q1_e, self.q1_E, 1, None, "Q1")

    def ghost_numbers(self) -> Dict[str, Optional[int]]:
        out = {name: getattr(self, name).ghost_number for name in ("q0_e", "q0_E", "q0_omega", "c", "lam", "q1_E", "q1_D")}
        xi_numbers = {self.c.layout.ghost_number(g) for (g, _mu) in self.xi.terms}
        out["xi"] = xi_numbers.pop() if len(xi_numbers) == 1 else (0 if not xi_numbers else None)
        return out


def _constant_monomial(proto: Field, mask: int) -> Field:
    return proto._new({mask: np.array(1.0)})


def _probe(
    state: BFVState,
    degree: Tuple[int, int],
    density: Callable[[Field], Field],
    monomial_first: bool,
) -> Field:
    """
    Local dual of a linear functional k ↦ ∫ density(k): the field Z with
    k ∧ Z = density(k) (monomial_first) or Z ∧ k = density(k), for constant
    basis monomials k of Ω^{i,j}.
    """
    layout = state.layout
    top = layout.base_all | layout.internal_all
    proto = state.cdag._new({})
    out: Dict[int, np.ndarray] = {}
    for mask in fibre_basis(layout, *degree):
        value = density(_constant_monomial(proto, mask))
        complement = top ^ mask
        sign = merge_sign(mask, complement) if monomial_first else merge_sign(complement, mask)
        for ghost, coeff in top_coefficient(value).items():
            key = ghost | complement
            piece = coeff if sign > 0 else -coeff
            out[key] = out[key] + piece if key in out else piece
    return proto._new(out)


def q1_legs(state: BFVState, frame: Optional[AntighostFrame] = None) -> Tuple[Field, Field]:
    """
    (E1, D1) with DS1[k] = ∫ k_e E1 - ∫ D1 k_ω, from

        DS1[k_e] = -∫ Σ_b (X′^{(b)} (k_e)_b)^{(μ)} t_μ,  DS1[k_ω] = -∫ X′^{(a)} (k_ω)_a c†
    """
    frame = frame or AntighostFrame(state)
    x, y = composite_vectors(state)
    xp = x - y
    xpc = frame.components(xp)
    n = state.n

    def along_e(k: Field) -> Field:
        v = frame.zero._new({})
        for b in range(n):
            if xpc[b].terms:
                v = v + wedge(xpc[b], contract_coordinate(k, b))
        return -frame.pair(v) if v.terms else frame.zero

    def along_omega(k: Field) -> Field:
        total = frame.zero
        for a in range(n):
            if xpc[a].terms:
                total = total + wedge(wedge(xpc[a], contract_coordinate(k, a)), state.cdag)
        return total

    e1 = _probe(state, (1, 1), along_e, monomial_first=True)
    d1 = _probe(state, (1, 2), along_omega, monomial_first=False)
    return e1, d1


def ghost_pieces(state: BFVState) -> Dict[str, Dict[str, object]]:
    """
    Qc, Qλ and Qξ split into their named summands:

        Qc = ½[c,c] - L_ξ^{ω0}c + ½ι_ξι_ξF_{ω0} - X^{(a)}(ω-ω0)_a + Y^{(a)}(ω-ω0)_a
        Qλ = X^{(n)} - Y^{(n)},  Qξ = X^{(a)}∂_a - Y^{(a)}∂_a - ½[ξ,ξ]
    """
    geometry = state.geometry
    eta, omega0 = geometry.eta, geometry.omega0
    c, xi = state.c, state.xi
    x, y = composite_vectors(state)
    x_vec, x_n = frame_split(geometry, x)
    y_vec, y_n = frame_split(geometry, y)
    return {
        "c": {
            "cc": bracket(c, c, eta).scale(0.5),
            "lie": -covariant_lie(xi, omega0, c, eta),
            "xw": -shifted_connection_multiplier(geometry, state.omega, x_vec),
            "yw": shifted_connection_multiplier(geometry, state.omega, y_vec),
            "iiF": iota(xi, iota(xi, curvature(omega0, eta))).scale(0.5),
        },
        "lam": {"x": x_n, "y": y_n.scale(-1.0)},
        "xi": {"x": x_vec, "y": y_vec.scale(-1.0), "xixi": lie_bracket(xi, xi).scale(-0.5)},
    }


def ghost_components(state: BFVState, frame: Optional[AntighostFrame] = None) -> Tuple[Field, Field, VectorField]:
    """(Qc, Qλ, Qξ)"""
    pieces = ghost_pieces(state)
    totals = []
    for label in ("c", "lam", "xi"):
        parts = list(pieces[label].values())
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        totals.append(total)
    return tuple(totals)


def cohomological_vf(state: BFVState) -> QComponents:
    geometry = state.geometry
    frame = AntighostFrame(state)
    fields = hamiltonian_fields(geometry, state.omega, state.ghosts, state.sigma)
    q0 = fields["L"] + fields["P"] + fields["H"]
    h_omega, residual = wedge_preimage(fields["H"].E, geometry, 1, 2)
    q0_omega = fields["L"].omega + fields["P"].omega + h_omega
    q_c, q_lam, q_xi = ghost_components(state, frame)
    e1, d1 = q1_legs(state, frame)
    q1_e, q1_residual = wedge_preimage(d1, geometry, 1, 1)
    if residual > 1e-8:
        logger.warning(f"E_H is not in the image of e^{geometry.N - 3}: residual {residual:.3e}")
    logger.debug(f"Q1e preimage residual {q1_residual:.3e}")
    return QComponents(q0.e, q0.E, q0_omega, q_c, q_lam, q_xi, e1, d1, q1_e, residual, q1_residual)


# consistency with the action


def state_at(state: BFVState, geometry: Geometry, omega: Field) -> BFVState:
    """Same ghosts and antighosts over another background"""
    return BFVState(geometry, omega, state.ghosts, state.cdag, state.lamdag, state.xidag)


def q_pairing(q: QComponents, k_e: Field, k_omega: Field, geometry: Geometry) -> GrassmannNumber:
    """ϖ(k, Q0) + ∫ k_e E1 - ∫ D1 k_ω for an even direction k"""
    k = TangentPair.from_legs(geometry, k_e, k_omega, 0, "k")
    return poisson_bracket(k, q.q0()) + integrate(wedge(k_e, q.q1_E)) - integrate(wedge(q.q1_D, k_omega))


def q_pairing_scale(q: QComponents, k_e: Field, k_omega: Field, geometry: Geometry) -> float:
    """Size of the individual legs entering q_pairing"""
    k = TangentPair.from_legs(geometry, k_e, k_omega, 0, "k")
    volume = geometry.grid.volume
    return pairing_scale(k, q.q0()) + volume * (k_e.norm() * q.q1_E.norm() + q.q1_D.norm() * k_omega.norm())


def action_gradient_rows(
    state: BFVState,
    rng: np.random.Generator,
    directions: int = 20,
    tol: float = 1e-6,
    constant: bool = False,
    q: Optional[QComponents] = None,
) -> List[GradientRow]:
    """ι_Q ϖ = δS along random (e, ω) directions against finite differences of S"""
    q = q or cohomological_vf(state)

    def functional(geometry: Geometry, omega: Field) -> GrassmannNumber:
        return eval_bfv_action(state_at(state, geometry, omega), audit=False).total

    rows = []
    for k in range(directions):
        direction = random_direction(state.geometry, rng, constant)
        derivative = directional_derivative(functional, state.geometry, state.omega, direction)
        pairing = q_pairing(q, direction[0], direction[1], state.geometry)
        scale = max(derivative.norm(), pairing.norm(), q_pairing_scale(q, direction[0], direction[1], state.geometry))
        error = (derivative - pairing).norm() / scale if scale else 0.0
        rows.append(
            GradientRow(
                functional="S",
                direction=k,
                derivative=derivative.norm(),
                pairing=pairing.norm(),
                rel_error=error,
                passed=error <= tol,
            )
        )
    return rows
