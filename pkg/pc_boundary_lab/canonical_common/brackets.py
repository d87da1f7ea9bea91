# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the Hamiltonian vector fields of the constraints, the boundary
pairing ϖ and the first-class relation checks.

A tangent vector X is stored as its e-leg X_e and E_X = e^{N-3} X_ω; the lone
ω-leg is kept when it is known but never needed. With |X| the ghost parity,

    ϖ(X, Y) = ∫ X_e E_Y - (-1)^{|X||Y|} ∫ Y_e E_X

so that ϖ(k, X_F) = DF[k] for even directions k.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from pc_boundary_lab.algebra_common.fibre import contract_coordinate, frame_components, wedge
from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber, popcount
from pc_boundary_lab.canonical_common.constraints import (
    H_of,
    L_of,
    Multipliers,
    P_of,
    eval_constraints,
    random_multipliers,
)
from pc_boundary_lab.fields_common.calculus import (
    bracket,
    covariant_lie,
    curvature,
    d_omega,
    integrate,
    iota,
    lie_bracket,
)
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.fields_common.random_fields import random_form
from pc_boundary_lab.slice_common.slice import SliceSolver, random_kernel_shift, sigma_of
from pc_boundary_lab.utils_common.errors import DegreeError
from pc_boundary_lab.utils_common.reports import BracketReport, GradientReport, GradientRow, RelationRow
from pc_boundary_lab.utils_common.tools_utils import progress

logger = logging.getLogger(__name__)


def ghost_parity(f) -> int:
    """Ghost parity of a homogeneous field or vector field; zero counts as even"""
    if isinstance(f, VectorField):
        seen = {popcount(g) & 1 for (g, _mu) in f.terms}
    else:
        seen = {popcount(m & f.layout.ghost_all) & 1 for m in f.terms}
    if len(seen) > 1:
        raise DegreeError("Field is not homogeneous in the ghost generators")
    return seen.pop() if seen else 0


@dataclass
class TangentPair:
    e: Field
    E: Field
    parity: int
    omega: Optional[Field] = None
    label: str = ""

    @classmethod
    def from_legs(cls, geometry: Geometry, e_leg: Field, omega_leg: Field, parity: int, label: str = "") -> "TangentPair":
        E = wedge(geometry.power(geometry.N - 3), omega_leg)
        return cls(e_leg, E, parity, omega_leg, label)

    def norm(self) -> float:
        return max(self.e.norm(), self.E.norm())

    def __add__(self, other: "TangentPair") -> "TangentPair":
        if other.parity != self.parity:
            raise DegreeError("Cannot add tangent vectors of different parity")
        omega = None
        if self.omega is not None and other.omega is not None:
            omega = self.omega + other.omega
        return TangentPair(self.e + other.e, self.E + other.E, self.parity, omega, self.label)


def poisson_bracket(x: TangentPair, y: TangentPair) -> GrassmannNumber:
    """ϖ(X, Y) as a Grassmann number"""
    first = integrate(wedge(x.e, y.E))
    second = integrate(wedge(y.e, x.E))
    if (x.parity * y.parity) % 2:
        return first + second
    return first - second


def pairing_scale(x: TangentPair, y: TangentPair) -> float:
    volume = x.e.grid.volume
    return volume * (x.e.norm() * y.E.norm() + y.e.norm() * x.E.norm())


# Hamiltonian vector fields


def hamiltonian_L(geometry: Geometry, omega: Field, c: Field) -> TangentPair:
    """𝕃_e = [c, e], 𝕃_ω = d_ω c"""
    e_leg = bracket(c, geometry.e, geometry.eta)
    omega_leg = d_omega(omega, c, geometry.eta)
    return TangentPair.from_legs(geometry, e_leg, omega_leg, ghost_parity(c), "L")


def hamiltonian_P(geometry: Geometry, omega: Field, xi: VectorField) -> TangentPair:
    """ℙ_e = -L_ξ^{ω0} e, ℙ_ω = -L_ξ^{ω0}(ω - ω0) - ι_ξ F_{ω0}"""
    omega0, eta = geometry.omega0, geometry.eta
    e_leg = -covariant_lie(xi, omega0, geometry.e, eta)
    omega_leg = -covariant_lie(xi, omega0, omega - omega0, eta) - iota(xi, curvature(omega0, eta))
    return TangentPair.from_legs(geometry, e_leg, omega_leg, ghost_parity(xi), "P")


def hamiltonian_H(geometry: Geometry, omega: Field, lam: Field, sigma: Field) -> TangentPair:
    """
    ℍ_e = d_ω(λ e_n) + (N-3) λσ and only
    E_ℍ = (N-3) λ e_n e^{N-4} F_ω + Λ/(N-2)! λ e_n e^{N-2}.
    """
    N, eta = geometry.N, geometry.eta
    lam_en = wedge(lam, geometry.e_n)
    e_leg = d_omega(omega, lam_en, eta) + wedge(lam, sigma).scale(N - 3)
    E = wedge(wedge(lam_en, geometry.power(N - 4)), curvature(omega, eta)).scale(N - 3)
    if geometry.cosmological:
        E = E + wedge(lam_en, geometry.power(N - 2)).scale(geometry.cosmological / math.factorial(N - 2))
    return TangentPair(e_leg, E, ghost_parity(lam), None, "H")


def hamiltonian_fields(
    geometry: Geometry, omega: Field, m: Multipliers, sigma: Optional[Field] = None
) -> Dict[str, TangentPair]:
    if sigma is None:
        sigma = sigma_of(omega, geometry)
    return {
        "L": hamiltonian_L(geometry, omega, m.c),
        "P": hamiltonian_P(geometry, omega, m.xi),
        "H": hamiltonian_H(geometry, omega, m.lam, sigma),
    }


# composite multipliers


def frame_split(geometry: Geometry, x: Field) -> Tuple[VectorField, Field]:
    """X ∈ Ω^{0,1} ↦ (vector field X^{(a)}∂_a, X^{(n)})"""
    comps = frame_components(x, geometry.frame_matrix())
    n = geometry.n
    vector = VectorField.from_components(comps[:n], grid=x.grid, backend=x.backend)
    return vector, comps[n]


def shifted_connection_multiplier(geometry: Geometry, omega: Field, vector: VectorField) -> Field:
    """X^{(a)} (ω - ω0)_a"""
    diff = omega - geometry.omega0
    total = diff._new({})
    for a, comp in enumerate(vector.components()):
        if comp.terms:
            total = total + wedge(comp, contract_coordinate(diff, a))
    return total


# relations


@dataclass
class RelationSample:
    lhs: GrassmannNumber
    terms: Dict[str, GrassmannNumber]
    leg_scale: float


RELATIONS = {
    "LL": ("{L_c, L_c} = -1/2 L_[c,c]", {"L[c,c]": -1.0}),
    "LP": ("{L_c, P_ξ} = L_{L_ξ c}", {"L[L_xi c]": 1.0}),
    "LH": ("{L_c, H_λ} = -P_X(a) + L_X(a)(ω-ω0)_a - H_X(n), X = [c, λe_n]", {"P[X]": -1.0, "L[X(w-w0)]": 1.0, "H[X]": -1.0}),
    "PP": ("{P_ξ, P_ξ} = 1/2 P_[ξ,ξ] - 1/2 L_{ι_ξι_ξF_ω0}", {"P[xi,xi]": 1.0, "L[iiF]": -1.0}),
    "PH": ("{P_ξ, H_λ} = P_Y(a) - L_Y(a)(ω-ω0)_a + H_Y(n), Y = L_ξ(λe_n)", {"P[Y]": 1.0, "L[Y(w-w0)]": -1.0, "H[Y]": 1.0}),
    "HH": ("{H_λ, H_λ} = 0", {}),
}


def relation_samples(
    geometry: Geometry,
    omega: Field,
    m: Multipliers,
    m2: Optional[Multipliers] = None,
    sigma: Optional[Field] = None,
) -> Dict[str, RelationSample]:
    """LHS ϖ(X_F, X_G) and the RHS constraint values with composite multipliers"""
    m2 = m if m2 is None else m2
    eta, omega0 = geometry.eta, geometry.omega0
    if sigma is None:
        sigma = sigma_of(omega, geometry)
    fields = hamiltonian_fields(geometry, omega, m, sigma)
    fields2 = fields if m2 is m else hamiltonian_fields(geometry, omega, m2, sigma)
    L1, P1, H1 = fields["L"], fields["P"], fields["H"]
    P2, H2 = fields2["P"], fields2["H"]

    def sample(x: TangentPair, y: TangentPair, terms: Dict[str, GrassmannNumber]) -> RelationSample:
        return RelationSample(poisson_bracket(x, y), terms, pairing_scale(x, y))

    out = {}
    out["LL"] = sample(L1, L1, {"L[c,c]": L_of(geometry, omega, bracket(m.c, m.c, eta))})
    out["LP"] = sample(L1, P2, {"L[L_xi c]": L_of(geometry, omega, covariant_lie(m2.xi, omega0, m.c, eta))})

    x_vec, x_n = frame_split(geometry, bracket(m.c, wedge(m2.lam, geometry.e_n), eta))
    out["LH"] = sample(
        L1,
        H2,
        {
            "P[X]": P_of(geometry, omega, x_vec),
            "L[X(w-w0)]": L_of(geometry, omega, shifted_connection_multiplier(geometry, omega, x_vec)),
            "H[X]": H_of(geometry, omega, x_n),
        },
    )

    iiF = iota(m.xi, iota(m.xi, curvature(omega0, eta)))
    out["PP"] = sample(
        P1,
        P1,
        {"P[xi,xi]": P_of(geometry, omega, lie_bracket(m.xi, m.xi)), "L[iiF]": L_of(geometry, omega, iiF)},
    )

    y_vec, y_n = frame_split(geometry, covariant_lie(m.xi, omega0, wedge(m2.lam, geometry.e_n), eta))
    out["PH"] = sample(
        P1,
        H2,
        {
            "P[Y]": P_of(geometry, omega, y_vec),
            "L[Y(w-w0)]": L_of(geometry, omega, shifted_connection_multiplier(geometry, omega, y_vec)),
            "H[Y]": H_of(geometry, omega, y_n),
        },
    )
    out["HH"] = sample(H1, H1, {})
    return out


def _stack(samples: List[RelationSample], names: List[str]) -> Tuple[np.ndarray, np.ndarray]:
    rows_a, rows_b = [], []
    for s in samples:
        masks = set(s.lhs.terms)
        for t in s.terms.values():
            masks |= set(t.terms)
        for mask in sorted(masks):
            rows_b.append(s.lhs.get(mask))
            rows_a.append([s.terms[name].get(mask) for name in names])
    a = np.array(rows_a, dtype=float).reshape(len(rows_b), len(names))
    return a, np.array(rows_b, dtype=float)


@dataclass
class RelationFit:
    fitted: Dict[str, float]
    residual: float
    displayed_residual: float
    scale: float


def fit_relation(samples: List[RelationSample], displayed: Dict[str, float]) -> RelationFit:
    """
    Least-squares coefficients κ in LHS ≈ Σ κ_r RHS_r over every Grassmann monomial
    of every sample; residuals are relative to the largest term involved.
    """
    names = list(displayed)
    a, b = _stack(samples, names)
    if names and len(b):
        kappa, *_ = np.linalg.lstsq(a, b, rcond=None)
    else:
        kappa = np.zeros(len(names))
    kappa_disp = np.array([displayed[n] for n in names])
    term_scale = float(np.max(np.abs(a))) if a.size else 0.0
    lhs_scale = float(np.max(np.abs(b))) if b.size else 0.0
    leg_scale = max((s.leg_scale for s in samples), default=0.0)
    scale = max(lhs_scale, term_scale, leg_scale)
    if scale == 0.0:
        return RelationFit({n: float(k) for n, k in zip(names, kappa)}, 0.0, 0.0, 0.0)
    fitted_res = float(np.max(np.abs(a @ kappa - b))) if b.size else 0.0
    displayed_res = float(np.max(np.abs(a @ kappa_disp - b))) if b.size else 0.0
    return RelationFit(
        fitted={n: float(k) for n, k in zip(names, kappa)},
        residual=fitted_res / scale,
        displayed_residual=displayed_res / scale,
        scale=scale,
    )


def verify_theorem_brackets(
    geometry: Geometry,
    omega: Field,
    m: Multipliers,
    m2: Optional[Multipliers] = None,
    tol: float = 1e-9,
    sigma: Optional[Field] = None,
    extra: Optional[List[Dict[str, RelationSample]]] = None,
) -> List[RelationRow]:
    """
    One row per relation, passed when the displayed coefficients leave a residual
    within tol. `extra` adds samples from further configurations to the fit.
    """
    samples = relation_samples(geometry, omega, m, m2, sigma)
    rows = []
    for rid, (anchor, displayed) in RELATIONS.items():
        pool = [samples[rid]] + [e[rid] for e in (extra or [])]
        fit = fit_relation(pool, displayed)
        passed = fit.displayed_residual <= tol
        logger.info(f"relation {rid}: displayed residual {fit.displayed_residual:.3e}, fitted {fit.fitted} residual {fit.residual:.3e}")
        rows.append(
            RelationRow(
                relation_id=rid,
                anchor=anchor,
                N=geometry.N,
                backend=geometry.backend.value,
                grid=list(geometry.grid.dims),
                residual=fit.residual,
                scale=fit.scale,
                displayed=displayed,
                displayed_residual=fit.displayed_residual,
                fitted=fit.fitted,
                passed=passed,
            )
        )
    return rows


def random_configuration(
    geometry: Geometry,
    rng: np.random.Generator,
    constant: bool = False,
    bandwidth: int = 1,
    amplitude: float = 1.0,
) -> Tuple[Field, Multipliers]:
    """On-slice ω from a random ω̃ and multipliers polarized over their labels"""
    layout, grid, backend = geometry.layout, geometry.grid, geometry.backend
    omega_tilde = random_form(layout, grid, backend, 1, 2, rng, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    omega = SliceSolver(geometry).decompose(omega_tilde).omega
    m = random_multipliers(layout, grid, backend, rng, constant=constant, bandwidth=bandwidth, amplitude=amplitude)
    return omega, m


def verify_bracket_suite(
    geometry: Geometry,
    rng: np.random.Generator,
    seed: int = 0,
    trials: int = 1,
    tol: float = 1e-9,
    constant_fields: bool = False,
    bandwidth: int = 1,
    quiet: bool = True,
) -> BracketReport:
    """
    The six relations on `trials` random configurations over one geometry. The
    first configuration gives the rows; the others only enter the coefficient fit.

    ω and the multipliers are band-limited fields unless `constant_fields`; the
    coframe is whatever the geometry carries. On SPECTRAL grids the identities hold
    to roundoff only when the grid resolves the products of those bands.
    """
    if trials < 1:
        raise DegreeError("At least one trial is needed", {"trials": trials})
    configurations = [random_configuration(geometry, rng, constant_fields, bandwidth) for _ in range(trials)]
    extra = []
    for omega, m in progress(configurations[1:], f"brackets N={geometry.N}", quiet):
        extra.append(relation_samples(geometry, omega, m))
    omega, m = configurations[0]
    rows = verify_theorem_brackets(geometry, omega, m, tol=tol, extra=extra)
    return BracketReport(
        N=geometry.N,
        seed=seed,
        cosmological=geometry.cosmological,
        trials=trials,
        passed=all(r.passed for r in rows),
        rows=rows,
    )


# consistency checks


def perturbed(geometry: Geometry, k_e: Optional[Field], t: float) -> Geometry:
    if k_e is None or t == 0.0:
        return geometry
    return Geometry(geometry.e + k_e.scale(t), geometry.e_n, geometry.eta, geometry.omega0, geometry.cosmological)


def directional_derivative(
    functional: Callable[[Geometry, Field], GrassmannNumber],
    geometry: Geometry,
    omega: Field,
    direction: Tuple[Field, Field],
    step: float = 1e-4,
) -> GrassmannNumber:
    """Central differences at h and h/2 with one Richardson step"""
    k_e, k_omega = direction

    def central(h: float) -> GrassmannNumber:
        plus = functional(perturbed(geometry, k_e, h), omega + k_omega.scale(h))
        minus = functional(perturbed(geometry, k_e, -h), omega + k_omega.scale(-h))
        return (plus - minus) * (1.0 / (2.0 * h))

    coarse, fine = central(step), central(step / 2.0)
    return fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)


def random_direction(geometry: Geometry, rng: np.random.Generator, constant: bool = False, bandwidth: int = 1) -> Tuple[Field, Field]:
    layout, grid, backend = geometry.layout, geometry.grid, geometry.backend
    k_e = random_form(layout, grid, backend, 1, 1, rng, constant=constant, bandwidth=bandwidth)
    k_omega = random_form(layout, grid, backend, 1, 2, rng, constant=constant, bandwidth=bandwidth)
    return k_e, k_omega


def gradient_oracle(
    functional: Callable[[Geometry, Field], GrassmannNumber],
    geometry: Geometry,
    omega: Field,
    x: TangentPair,
    direction: Tuple[Field, Field],
    step: float = 1e-4,
) -> Tuple[GrassmannNumber, GrassmannNumber, float]:
    """
    (DF[k], ϖ(k, X), relative error) for an even direction k. The error is taken
    against the leg scale of the pairing as well, so a vanishing gradient does not
    turn differencing noise into an O(1) relative error.
    """
    k_e, k_omega = direction
    k = TangentPair.from_legs(geometry, k_e, k_omega, 0, "k")
    derivative = directional_derivative(functional, geometry, omega, direction, step)
    pairing = poisson_bracket(k, x)
    scale = max(derivative.norm(), pairing.norm(), pairing_scale(k, x))
    if scale == 0.0:
        return derivative, pairing, 0.0
    return derivative, pairing, (derivative - pairing).norm() / scale


def constraint_gradient_rows(
    geometry: Geometry,
    omega: Field,
    m: Multipliers,
    rng: np.random.Generator,
    directions: int = 20,
    tol: float = 1e-6,
    sigma: Optional[Field] = None,
    constant: bool = False,
) -> List[GradientRow]:
    """ι_X ϖ = δF for L_c, P_ξ and H_λ along random directions"""
    fields = hamiltonian_fields(geometry, omega, m, sigma)
    functionals = {
        "L": lambda g, w: L_of(g, w, m.c),
        "P": lambda g, w: P_of(g, w, m.xi),
        "H": lambda g, w: H_of(g, w, m.lam),
    }
    rows = []
    for k in range(directions):
        direction = random_direction(geometry, rng, constant)
        for name, functional in functionals.items():
            derivative, pairing, error = gradient_oracle(functional, geometry, omega, fields[name], direction)
            rows.append(
                GradientRow(
                    functional=name,
                    direction=k,
                    derivative=derivative.norm(),
                    pairing=pairing.norm(),
                    rel_error=error,
                    passed=error <= tol,
                )
            )
    return rows


def verify_constraint_gradients(
    geometry: Geometry,
    omega: Field,
    m: Multipliers,
    rng: np.random.Generator,
    seed: int = 0,
    directions: int = 20,
    tol: float = 1e-6,
    constant: bool = False,
) -> GradientReport:
    rows = constraint_gradient_rows(geometry, omega, m, rng, directions, tol, constant=constant)
    return GradientReport(N=geometry.N, seed=seed, tol=tol, passed=all(r.passed for r in rows), rows=rows)


@dataclass
class GaugeCheck:
    max_deviation: float
    shifts: int
    passed: bool


def gauge_invariance_check(
    geometry: Geometry,
    omega_tilde: Field,
    m: Multipliers,
    rng: np.random.Generator,
    shifts: int = 20,
    tol: float = 1e-9,
    amplitude: float = 1.0,
) -> GaugeCheck:
    """Constraints after decomposing ω̃ and ω̃ + v′ agree for random kernel shifts v′"""
    solver = SliceSolver(geometry)
    base = solver.decompose(omega_tilde).omega
    reference = eval_constraints(geometry, base, m, check_slice=False)
    scale = max(reference.norm(), 1e-300)
    worst = 0.0
    for _ in range(shifts):
        shift = random_kernel_shift(geometry, rng, amplitude)
        shifted = solver.decompose(omega_tilde + shift).omega
        values = eval_constraints(geometry, shifted, m, check_slice=False)
        deviation = max(
            (values.L - reference.L).norm(), (values.P - reference.P).norm(), (values.H - reference.H).norm()
        )
        worst = max(worst, deviation / scale)
    return GaugeCheck(worst, shifts, worst <= tol)
