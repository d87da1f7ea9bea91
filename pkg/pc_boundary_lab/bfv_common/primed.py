# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the change to primed variables

    c′ = c + ι_ξ(ω - ω0),  ξ′†_a = ξ†_a - (ω - ω0)_a c†

and the covariant antighost y† ∈ Ω^{n,N-1} with e_a y† = -ξ′†_a and e_n y† = -λ†,
in which

    S′ = ∫ c′ e^{N-3} d_ω e + ι_ξ e e^{N-3} F_ω + λe_n (e^{N-3} F_ω + Λ/(N-1)! e^{N-1})
           + ½[c′,c′]c† - L_ξ^ω c′ c† + ½ι_ξι_ξ F_ω c†
           - [c′, λe_n] y† + L_ξ^ω(λe_n) y† + ½ι_{[ξ,ξ]} e y†

and ϖ′ = ∫ e^{N-3} δe δω + δc′ δc† + δω δ(ι_ξ c†) + (δλ e_n + ι_{δξ} e) δy†.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy.linalg import orth

from pc_boundary_lab.algebra_common.fibre import FibreElement, frame_vectors, top_coefficient, wedge
from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber, merge_sign
from pc_boundary_lab.bfv_common.action import eval_bfv_action
from pc_boundary_lab.bfv_common.state import BFVState
from pc_boundary_lab.canonical_common.constraints import H_density, L_density, P_density
from pc_boundary_lab.fields_common.calculus import bracket, covariant_lie, curvature, integrate, iota, lie_bracket
from pc_boundary_lab.fields_common.field import Field
from pc_boundary_lab.slice_common.slice import node_frames
from pc_boundary_lab.utils_common.errors import DegeneracyError
from pc_boundary_lab.utils_common.reports import PrimedReport
from pc_boundary_lab.wedge_common.wedge_maps import RANK_TOL, NodeFrame, Variant, WMapSpec, assemble, fibre_basis, rank_kernel

logger = logging.getLogger(__name__)


@dataclass
class PrimedState:
    state: BFVState
    c_prime: Field
    xidag_prime: List[Field]
    ydag: Field


def _frame_fields(state: BFVState) -> List[Field]:
    """f_k = (e_0, ..., e_{n-1}, e_n) as internal vector fields"""
    proto = state.cdag._new({})
    return frame_vectors(state.geometry.frame_matrix(), state.layout, proto)


def solve_ydag(state: BFVState) -> Field:
    """
    y† from f_k ∧ y† = -t_k, t = (ξ′†_a, λ†), solved per ghost monomial and per
    node as an N×N system over the basis dx^{top} ε_j of Ω^{n,N-1}.
    """
    layout = state.layout
    N = state.N
    proto = state.cdag._new({})
    frames = _frame_fields(state)
    targets = state.antighost_targets()
    slots = fibre_basis(layout, state.n, N - 1)
    ghosts = sorted({g for t in targets for g in top_coefficient(t)})
    out: Dict[int, np.ndarray] = {}
    for ghost in ghosts:
        columns = []
        for slot in slots:
            probe = proto._new({ghost | slot: np.array(1.0)})
            columns.append([top_coefficient(wedge(f, probe)).get(ghost, np.zeros(())) for f in frames])
        # matrix[..., k, j]
        entries = [[np.asarray(columns[j][k]) for j in range(len(slots))] for k in range(N)]
        shape = np.broadcast_shapes(*[e.shape for row in entries for e in row])
        matrix = np.zeros(shape + (N, len(slots)))
        for k in range(N):
            for j in range(len(slots)):
                matrix[..., k, j] = entries[k][j]
        rhs_parts = [np.asarray(-top_coefficient(t).get(ghost, np.zeros(()))) for t in targets]
        rhs_shape = np.broadcast_shapes(shape, *[r.shape for r in rhs_parts])
        rhs = np.zeros(rhs_shape + (N,))
        for k, r in enumerate(rhs_parts):
            rhs[..., k] = r
        matrix = np.broadcast_to(matrix, rhs_shape + (N, len(slots)))
        try:
            solution = np.linalg.solve(matrix, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            raise DegeneracyError("Frame (e_a, e_n) cannot carry y†", details={"ghost": ghost})
        for j, slot in enumerate(slots):
            out[ghost | slot] = solution[..., j]
    return proto._new(out)


def transform_primed(state: BFVState) -> PrimedState:
    c_prime = state.c + iota(state.xi, state.shifted_omega)
    xidag_prime = [state.shifted_xidag(a) for a in range(state.n)]
    return PrimedState(state, c_prime, xidag_prime, solve_ydag(state))


def reconstruction_residuals(primed: PrimedState) -> Tuple[float, float]:
    """(|e_n y† + λ†|, max_a |e_a y† + ξ′†_a|), relative to the antighost norms"""
    state = primed.state
    frames = _frame_fields(state)
    scale_n = max(state.lamdag.norm(), 1e-300)
    rec_n = (wedge(frames[-1], primed.ydag) + state.lamdag).norm() / scale_n
    rec_a = 0.0
    for a in range(state.n):
        target = primed.xidag_prime[a]
        scale = max(target.norm(), 1e-300)
        rec_a = max(rec_a, (wedge(frames[a], primed.ydag) + target).norm() / scale)
    return rec_n, rec_a


def primed_densities(primed: PrimedState) -> Dict[str, Field]:
    state = primed.state
    geometry, omega = state.geometry, state.omega
    N, eta = geometry.N, geometry.eta
    xi, cdag, ydag, c_prime = state.xi, state.cdag, primed.ydag, primed.c_prime
    lam_en = wedge(state.lam, geometry.e_n)
    iiF = iota(xi, iota(xi, curvature(omega, eta)))
    return {
        "L_prime": L_density(geometry, omega, c_prime),
        "P_bare": P_density(geometry, omega, xi, bare=True),
        "H": H_density(geometry, omega, state.lam),
        "cc_cdag": wedge(bracket(c_prime, c_prime, eta), cdag).scale(0.5),
        "lie_c_cdag": -wedge(covariant_lie(xi, omega, c_prime, eta), cdag),
        "iiF_cdag": wedge(iiF, cdag).scale(0.5),
        "c_lam_ydag": -wedge(bracket(c_prime, lam_en, eta), ydag),
        "lie_lam_ydag": wedge(covariant_lie(xi, omega, lam_en, eta), ydag),
        "xixi_e_ydag": wedge(iota(lie_bracket(xi, xi), geometry.e), ydag).scale(0.5),
    }


def eval_primed_action(primed: PrimedState) -> GrassmannNumber:
    total = GrassmannNumber({}, primed.state.layout.n_ghost)
    for density in primed_densities(primed).values():
        total = total + integrate(density)
    return total


# ϖ′ at one node


def _pairing_block(node: NodeFrame, left: List[int], right: List[int]) -> np.ndarray:
    """∫ m_i ∧ m_j over fibre monomials: the sign when they are complementary"""
    layout = node.layout
    top = layout.base_all | layout.internal_all
    block = np.zeros((len(left), len(right)))
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            if a | b == top and not a & b:
                block[i, j] = merge_sign(a, b)
    return block


def pairing_blocks(node: NodeFrame) -> Dict[str, np.ndarray]:
    """
    Nonzero blocks of ϖ′ on a ghost-free background, where δω δ(ι_ξ c†) drops out.
    The connection directions are restricted to the complement of Ker e^{N-3}.
    """
    layout, N, n = node.layout, node.N, node.base_dim
    w12 = assemble(WMapSpec(Variant.BOUNDARY, N - 3, 1, 2, N), node)
    effective = orth(w12.matrix.T, rcond=RANK_TOL)
    e_basis = fibre_basis(layout, 1, 1)
    e_omega = _pairing_block(node, e_basis, w12.codomain) @ w12.matrix @ effective

    c_basis = fibre_basis(layout, 0, 2)
    cdag_basis = fibre_basis(layout, n, N - 2)
    c_cdag = _pairing_block(node, c_basis, cdag_basis)

    y_basis = fibre_basis(layout, n, N - 1)
    frame = frame_vectors(node.frame_matrix(), layout)
    frame_y = np.zeros((N, len(y_basis)))
    for k, f in enumerate(frame):
        for j, slot in enumerate(y_basis):
            frame_y[k, j] = float(top_coefficient(wedge(f, FibreElement(layout, {slot: 1.0}))).get(0, 0.0))
    return {"e_omega": e_omega, "c_cdag": c_cdag, "xi_lam_ydag": frame_y}


def symplectic_matrix(node: NodeFrame) -> np.ndarray:
    """ϖ′ on (e, ω, c′, ξ, λ | c†, y†) with every block and its transpose in place"""
    blocks = pairing_blocks(node)
    left = [blocks["e_omega"].shape[0], blocks["c_cdag"].shape[0], blocks["xi_lam_ydag"].shape[0]]
    right = [blocks["e_omega"].shape[1], blocks["c_cdag"].shape[1], blocks["xi_lam_ydag"].shape[1]]
    # rows: e | c | (ξ, λ) | ω | c† | y†
    dim = sum(left) + sum(right)
    matrix = np.zeros((dim, dim))
    row = 0
    col = sum(left)
    for name, rows_, cols_ in zip(("e_omega", "c_cdag", "xi_lam_ydag"), left, right):
        block = blocks[name]
        matrix[row : row + rows_, col : col + cols_] = block
        matrix[col : col + cols_, row : row + rows_] = -block.T
        row += rows_
        col += cols_
    return matrix


def pairing_rank(state: BFVState) -> Tuple[int, int]:
    """(smallest rank over the nodes, dimension) of the assembled ϖ′"""
    _, frames = node_frames(state.geometry)
    worst, dim = None, 0
    for node in frames:
        matrix = symplectic_matrix(node)
        dim = matrix.shape[0]
        rank = rank_kernel(matrix).rank
        worst = rank if worst is None else min(worst, rank)
    return worst, dim


def primed_dimension(N: int) -> int:
    """nN + (nC(N,2) - kernel) + C(N,2) + n + 1 + C(N,2) + N"""
    n = N - 1
    pairs = math.comb(N, 2)
    kernel = N * (N - 1) * (N - 3) // 2
    return n * N + (n * pairs - kernel) + pairs + n + 1 + pairs + N


def change_variables_primed(state: BFVState, seed: int = 0, tol: float = 1e-10) -> PrimedReport:
    """S against S′ after the transformation, the y† identities and the rank of ϖ′"""
    primed = transform_primed(state)
    original = eval_bfv_action(state, audit=False)
    transformed = eval_primed_action(primed)
    scale = max(original.scale(), transformed.norm(), 1e-300)
    residual = (original.total - transformed).norm() / scale
    rec_n, rec_a = reconstruction_residuals(primed)
    rank, dim = pairing_rank(state)
    logger.info(f"primed action residual {residual:.3e}, y† identities {rec_n:.3e} {rec_a:.3e}, ϖ′ rank {rank}/{dim}")
    passed = residual <= tol and rec_n <= tol and rec_a <= tol and rank == dim
    return PrimedReport(
        N=state.N,
        seed=seed,
        action_residual=residual,
        action_scale=scale,
        reconstruction_n=rec_n,
        reconstruction_a=rec_a,
        pairing_rank=rank,
        pairing_dim=dim,
        tol=tol,
        passed=passed,
    )
