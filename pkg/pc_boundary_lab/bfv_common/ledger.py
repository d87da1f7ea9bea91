# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the term-by-term ledger of 2{S0,S1}_f + {S1,S1}_g.

Every ledger term is the change of one S1 integrand when one field moves along one
summand of Q. The move is made exact by an auxiliary odd generator θ placed in
front of every other generator: a field φ becomes φ + θ Q_piece, S1 is evaluated
as usual and the coefficient of θ is kept. Terms f1..f26 move e and ω along Q0,
terms g1..g46 move the ghosts along Qc, Qλ and Qξ, so that

    Σ f = {S0,S1}_f,  Σ g = ½{S1,S1}_g.

Each term is integrated on its own and the cancellation groups of data/ledger.yaml
are summed. Shorthand used below:

    T(v) = Σ_a v^{(a)} ξ′†_a,  N(v) = v^{(n)} λ†,  W = ω - ω0
    X = [c, λe_n],  Y = L_ξ^{ω0}(λe_n)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

from pc_boundary_lab.algebra_common.fibre import contract_coordinate, wedge
from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber, Layout
from pc_boundary_lab.bfv_common.action import AntighostFrame, composite_vectors, ghost_pieces, s1_densities
from pc_boundary_lab.bfv_common.state import BFVState
from pc_boundary_lab.canonical_common.constraints import Multipliers
from pc_boundary_lab.fields_common.calculus import (
    bracket,
    covariant_lie,
    curvature,
    d_omega,
    integrate,
    iota,
    partial,
)
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.slice_common.slice import wedge_preimage
from pc_boundary_lab.utils_common.errors import LabError
from pc_boundary_lab.utils_common.reports import LedgerGroup, LedgerReport, LedgerRow
from pc_boundary_lab.utils_common.tools_utils import get_lab_data, progress

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-12
THETA = "theta"

# S1 integrands that depend on each moved field
VARIED_TERMS = {
    "c": ("cc_cdag", "lie_c_cdag", "X_xidag", "X_lamdag"),
    "lam": ("X_xidag", "X_lamdag", "Y_xidag", "Y_lamdag"),
    "xi": ("lie_c_cdag", "Y_xidag", "Y_lamdag", "xixi_xidag", "iiF_cdag"),
    "omega": ("X_xidag", "Y_xidag"),
}

# (moved field, summand of Q, term numbers in VARIED_TERMS order); a pair splits
# the change of -½ι_{[ξ,ξ]}ξ† into its transport part and the rest
TermSlot = Union[int, Tuple[int, int]]
GHOST_BLOCKS: Tuple[Tuple[str, str, Tuple[TermSlot, ...]], ...] = (
    ("c", "cc", (1, 2, 3, 4)),
    ("c", "lie", (5, 6, 7, 8)),
    ("c", "xw", (9, 10, 11, 12)),
    ("c", "yw", (13, 14, 15, 16)),
    ("c", "iiF", (40, 41, 42, 43)),
    ("lam", "x", (17, 18, 19, 20)),
    ("lam", "y", (21, 22, 23, 24)),
    ("xi", "x", (25, 26, 27, (28, 29), 44)),
    ("xi", "y", (30, 31, 32, (33, 34), 45)),
    ("xi", "xixi", (35, 36, 37, (38, 39), 46)),
)
# summands of Q0e, each giving T(X), N(X), T(Y), N(Y) terms from its first number on
E_BLOCKS = (("ce", 1), ("lie_e", 5), ("d_lam", 9), ("lam_sigma", 13))
# summands of Q0ω, each giving an X and a Y term
OMEGA_BLOCKS = (("d_c", 17), ("lie_w", 19), ("h_curv", 21), ("iota_f0", 23), ("h_lambda", 25))


def theta_layout(layout: Layout) -> Layout:
    """`layout` with one extra odd generator in front, ghost number -1 so that φ + θQφ keeps the ghost number of φ"""
    return layout.with_ghosts((THETA,) + layout.ghost_labels, (-1,) + layout.ghost_numbers)


def lift(f: Field, layout: Layout) -> Field:
    return Field(layout, {m << 1: v for m, v in f.terms.items()}, grid=f.grid, backend=f.backend)


def lift_vector(v: VectorField, layout: Layout) -> VectorField:
    return VectorField(layout, {(g << 1, mu): c for (g, mu), c in v.terms.items()}, grid=v.grid, backend=v.backend)


def theta_part(f: Field, layout: Layout) -> Field:
    """Coefficient of θ, back on the layout without θ"""
    return Field(layout, {m >> 1: v for m, v in f.terms.items() if m & 1}, grid=f.grid, backend=f.backend)


def lift_state(state: BFVState, layout: Layout) -> BFVState:
    geometry = state.geometry.with_layout(layout)
    ghosts = Multipliers(lift(state.c, layout), lift_vector(state.xi, layout), lift(state.lam, layout))
    return BFVState(
        geometry,
        lift(state.omega, layout),
        ghosts,
        lift(state.cdag, layout),
        lift(state.lamdag, layout),
        tuple(lift(x, layout) for x in state.xidag),
        lift(state.sigma, layout),
    )


class LedgerTerms:
    """
    Class to build the ledger integrands of one BFV state. The state is re-homed
    on the θ layout once; Q and the frame components of X and Y are computed there.
    """

    def __init__(self, state: BFVState):
        self.state = state
        self.layout = theta_layout(state.layout)
        self.base = lift_state(state, self.layout)
        g = self.base.geometry
        self.geometry = g
        self.eta, self.N, self.n = g.eta, g.N, g.n
        self.theta = Field(self.layout, {1: 1.0}, grid=g.grid, backend=g.backend)
        self.frame = AntighostFrame(self.base)
        x, y = composite_vectors(self.base)
        self.comps = {"X": self.frame.components(x), "Y": self.frame.components(y)}
        self.ghost_steps = ghost_pieces(self.base)

    # θ bookkeeping

    def along_theta(self, f):
        if isinstance(f, VectorField):
            comps = [wedge(self.theta, comp) for comp in f.components()]
            return VectorField.from_components(comps, grid=f.grid, backend=f.backend)
        return wedge(self.theta, f)

    def drop(self, f: Field) -> Field:
        return theta_part(f, self.state.layout)

    def moved(self, label: str, piece) -> BFVState:
        """The θ-lifted state with one field moved by θ piece"""
        s = self.base
        step = self.along_theta(piece)
        if label == "omega":
            return BFVState(s.geometry, s.omega + step, s.ghosts, s.cdag, s.lamdag, s.xidag, s.sigma)
        c, xi, lam = s.c, s.xi, s.lam
        if label == "c":
            c = c + step
        elif label == "xi":
            xi = xi + step
        else:
            lam = lam + step
        return BFVState(s.geometry, s.omega, Multipliers(c, xi, lam), s.cdag, s.lamdag, s.xidag, s.sigma)

    def variation(self, label: str, piece) -> Dict[str, Field]:
        """Change of every S1 integrand that depends on the moved field"""
        densities = s1_densities(self.moved(label, piece), names=VARIED_TERMS[label])
        return {name: self.drop(density) for name, density in densities.items()}

    def transport(self, d: VectorField) -> Field:
        """-Σ D^ν (∂_ν ξ^μ) ξ†_μ, the part of the change of -½ι_{[ξ,ξ]}ξ† that moves ξ along ξ + θD"""
        step = self.along_theta(d).components()
        xi = self.base.xi.components()
        total = self.frame.zero
        for mu in range(self.n):
            inner = self.frame.zero
            for nu in range(self.n):
                if step[nu].terms:
                    inner = inner + wedge(step[nu], partial(xi[mu], nu))
            if inner.terms:
                total = total + wedge(inner, self.base.xidag[mu])
        return self.drop(-total)

    # Q0 summands

    def q0e_pieces(self) -> Dict[str, Field]:
        g, s = self.geometry, self.base
        return {
            "ce": bracket(s.c, g.e, self.eta),
            "lie_e": -covariant_lie(s.xi, g.omega0, g.e, self.eta),
            "d_lam": d_omega(s.omega, wedge(s.lam, g.e_n), self.eta),
            "lam_sigma": wedge(s.lam, s.sigma).scale(self.N - 3),
        }

    def q0omega_pieces(self) -> Dict[str, Field]:
        g, s = self.geometry, self.base
        lam_en = wedge(s.lam, g.e_n)
        curv = wedge(wedge(lam_en, g.power(self.N - 4)), curvature(s.omega, self.eta)).scale(self.N - 3)
        h_curv, residual = wedge_preimage(curv, g, 1, 2)
        logger.debug(f"ledger H_ω preimage residual {residual:.3e}")
        if g.cosmological:
            cosmo = wedge(lam_en, g.power(self.N - 2)).scale(g.cosmological / math.factorial(self.N - 2))
            h_lambda, _ = wedge_preimage(cosmo, g, 1, 2)
        else:
            h_lambda = s.omega._new({})
        return {
            "d_c": d_omega(s.omega, s.c, self.eta),
            "lie_w": -covariant_lie(s.xi, g.omega0, s.shifted_omega, self.eta),
            "h_curv": h_curv,
            "iota_f0": -iota(s.xi, curvature(g.omega0, self.eta)),
            "h_lambda": h_lambda,
        }

    def frame_variation(self, which: str, p: Field) -> List[Field]:
        """
        Change of the frame components of X or Y when e moves to e + θp. The
        frame vectors e_b move by (θp)_b and X = Σ X^{(μ)} f_μ is held fixed.
        """
        step = wedge(self.theta, p)
        comps = self.comps[which]
        moved = None
        for b in range(self.n):
            if comps[b].terms:
                term = wedge(comps[b], contract_coordinate(step, b))
                moved = term if moved is None else moved + term
        if moved is None or not moved.terms:
            return [self.frame.zero for _ in range(self.n + 1)]
        return self.frame.components(-moved)

    # blocks

    def _e_terms(self) -> Dict[str, Field]:
        out = {}
        for name, p in self.q0e_pieces().items():
            first = dict(E_BLOCKS)[name]
            k = first
            for which, sign in (("X", 1.0), ("Y", -1.0)):
                delta = self.frame_variation(which, p)
                out[f"f{k}"] = self.drop(self.frame.tangential(None, delta)).scale(sign)
                out[f"f{k + 1}"] = self.drop(self.frame.normal(None, delta)).scale(sign)
                k += 2
        return out

    def _omega_terms(self) -> Dict[str, Field]:
        out = {}
        for name, p in self.q0omega_pieces().items():
            first = dict(OMEGA_BLOCKS)[name]
            changed = self.variation("omega", p)
            out[f"f{first}"] = changed["X_xidag"]
            out[f"f{first + 1}"] = changed["Y_xidag"]
        return out

    def _ghost_terms(self, label: str, piece: str, slots: Tuple[TermSlot, ...]) -> Dict[str, Field]:
        step = self.ghost_steps[label][piece]
        changed = self.variation(label, step)
        out = {}
        for name, slot in zip(VARIED_TERMS[label], slots):
            if isinstance(slot, tuple):
                first = self.transport(step)
                out[f"g{slot[0]}"] = first
                out[f"g{slot[1]}"] = changed[name] - first
            else:
                out[f"g{slot}"] = changed[name]
        return out

    def builders(self) -> Dict[str, Callable[[], Dict[str, Field]]]:
        blocks: Dict[str, Callable[[], Dict[str, Field]]] = {"q0e": self._e_terms, "q0omega": self._omega_terms}
        for label, piece, slots in GHOST_BLOCKS:
            blocks[f"{label}:{piece}"] = lambda label=label, piece=piece, slots=slots: self._ghost_terms(label, piece, slots)
        return blocks

    def densities(self, quiet: bool = True) -> Dict[str, Field]:
        out: Dict[str, Field] = {}
        for name, build in progress(self.builders().items(), "ledger blocks", quiet):
            logger.debug(f"ledger block {name}")
            out.update(build())
        return out


def term_ids() -> List[str]:
    return [f"f{k}" for k in range(1, 27)] + [f"g{k}" for k in range(1, 47)]


def ledger_groups() -> List[Dict]:
    """Groups from data/ledger.yaml; every term must sit in exactly one group"""
    groups = get_lab_data("ledger.yaml")["groups"]
    seen: Dict[str, str] = {}
    for group in groups:
        for term in group["terms"]:
            if term in seen:
                raise LabError("Ledger term listed twice", {"term": term, "groups": [seen[term], group["id"]]})
            seen[term] = group["id"]
    missing = sorted(set(term_ids()) - set(seen))
    if missing:
        raise LabError("Ledger terms missing from every group", {"terms": missing})
    return groups


def ledger_values(state: BFVState, quiet: bool = True) -> Dict[str, GrassmannNumber]:
    """∫ of every ledger integrand, in id order"""
    densities = LedgerTerms(state).densities(quiet)
    return {tid: integrate(densities[tid]) for tid in term_ids()}


def ledger_total(values: Dict[str, GrassmannNumber]) -> GrassmannNumber:
    """Σ f + Σ g = {S0,S1}_f + ½{S1,S1}_g"""
    total = None
    for tid in term_ids():
        total = values[tid] if total is None else total + values[tid]
    return total


@dataclass
class GroupSum:
    group_id: str
    term_ids: List[str]
    value: GrassmannNumber
    scale: float

    @property
    def residual(self) -> float:
        return self.value.norm() / self.scale if self.scale > 0 else self.value.norm()


def group_sums(values: Dict[str, GrassmannNumber], groups: Optional[List[Dict]] = None) -> List[GroupSum]:
    """
    Group sums scaled by their largest term. Exact groups may vanish term by term,
    so they are scaled by the largest term of the whole ledger instead.
    """
    groups = groups if groups is not None else ledger_groups()
    ledger_scale = max((v.norm() for v in values.values()), default=0.0)
    out = []
    for group in groups:
        ids = list(group["terms"])
        value = values[ids[0]]
        for tid in ids[1:]:
            value = value + values[tid]
        scale = max(values[tid].norm() for tid in ids)
        if group.get("exact", False):
            scale = ledger_scale
        out.append(GroupSum(group["id"], ids, value, scale))
    return out


def cancellation_ledger(
    state: BFVState,
    seed: int = 0,
    tol: float = 1e-9,
    exact_tol: float = EXACT_TOL,
    values: Optional[Dict[str, GrassmannNumber]] = None,
    quiet: bool = True,
) -> LedgerReport:
    """Every group sum against its tolerance; exact groups use exact_tol"""
    values = values if values is not None else ledger_values(state, quiet)
    group_of = {}
    rows = []
    report_groups = []
    groups = ledger_groups()
    for group, summed in zip(groups, group_sums(values, groups)):
        exact = bool(group.get("exact", False))
        limit = exact_tol if exact else tol
        passed = summed.residual <= limit
        for tid in summed.term_ids:
            group_of[tid] = summed.group_id
        logger.info(f"ledger group {summed.group_id}: residual {summed.residual:.3e} over {len(summed.term_ids)} terms")
        report_groups.append(
            LedgerGroup(
                group_id=summed.group_id,
                term_ids=summed.term_ids,
                group_sum=summed.residual,
                scale=summed.scale,
                tol=limit,
                exact=exact,
                passed=passed,
                comment=group.get("comment", ""),
            )
        )
    for tid in term_ids():
        rows.append(LedgerRow(term_id=tid, group_id=group_of[tid], value_norm=values[tid].norm()))
    total = ledger_total(values)
    scale = max((v.norm() for v in values.values()), default=0.0)
    return LedgerReport(
        N=state.N,
        seed=seed,
        passed=all(g.passed for g in report_groups),
        total=total.norm() / scale if scale > 0 else total.norm(),
        groups=report_groups,
        terms=rows,
    )
