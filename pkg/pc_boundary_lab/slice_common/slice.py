# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the structural constraint: the decomposition ω̃ = ω + v with
e^{N-3}v = 0 and e_n e^{N-4} d_ω e = e^{N-3}σ, plus the helpers that move fields
between the grid and the per-node fibre matrices of wedge_maps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from pc_boundary_lab.algebra_common.fibre import wedge
from pc_boundary_lab.fields_common.calculus import d_omega
from pc_boundary_lab.fields_common.field import Field
from pc_boundary_lab.fields_common.geometry import Geometry
from pc_boundary_lab.utils_common.errors import DegreeError, OffSliceError
from pc_boundary_lab.utils_common.reports import DecompositionReport, DofAudit
from pc_boundary_lab.wedge_common.lemmas import BetaSolver, boundary_kernel_dim
from pc_boundary_lab.wedge_common.wedge_maps import (
    RANK_TOL,
    NodeFrame,
    Variant,
    WMapSpec,
    assemble,
    cokernel_projector,
    fibre_basis,
    rank_kernel,
)

logger = logging.getLogger(__name__)

SOLVER_TOL = 1e-12
ACCEPT_TOL = 1e-10


# grid <-> fibre matrices


def node_frames(geometry: Geometry) -> Tuple[List[Tuple], List[NodeFrame]]:
    """One NodeFrame per grid node, or a single one (index ()) for a constant frame"""
    coframe = geometry.coframe_array()
    normal = geometry.normal_array()
    batch = np.broadcast_shapes(coframe.shape[:-2], normal.shape[:-1])
    if batch == ():
        return [()], [NodeFrame(coframe, geometry.eta, normal)]
    coframe = np.broadcast_to(coframe, batch + coframe.shape[-2:])
    normal = np.broadcast_to(normal, batch + normal.shape[-1:])
    indices = [tuple(i) for i in np.ndindex(*batch)]
    return indices, [NodeFrame(coframe[i], geometry.eta, normal[i]) for i in indices]


def to_array(f: Field, basis: List[int], shift: int) -> np.ndarray:
    """Coefficients of a ghost-free field over a node basis; shape (len(basis),) + grid or (len(basis),)"""
    index = {m << shift: r for r, m in enumerate(basis)}
    for mask in f.terms:
        if mask not in index:
            raise DegreeError("Field has components outside the fibre basis", {"mask": mask})
    nodal = any(v.ndim for v in f.terms.values())
    shape = (len(basis),) + (f.grid.dims if nodal else ())
    out = np.zeros(shape)
    for mask, value in f.terms.items():
        out[index[mask]] = value
    return out


def from_array(arr: np.ndarray, basis: List[int], shift: int, proto: Field) -> Field:
    terms = {}
    for r, mask in enumerate(basis):
        value = arr[r]
        if np.any(value):
            terms[mask << shift] = value
    return proto._new(terms)


def _apply_nodewise(matrices: List[np.ndarray], indices: List[Tuple], target: np.ndarray) -> np.ndarray:
    """matrix @ target at every node; a single matrix is applied to the whole batch"""
    if len(matrices) == 1 and indices == [()]:
        flat = target.reshape(target.shape[0], -1)
        out = matrices[0] @ flat
        return out.reshape((matrices[0].shape[0],) + target.shape[1:])
    if target.ndim == 1:
        target = np.broadcast_to(target[:, None], (target.shape[0], len(indices))).copy()
        batched = True
    else:
        batched = False
    stack = np.stack(matrices)
    if batched:
        vectors = target.T
    else:
        vectors = np.stack([target[(slice(None),) + i] for i in indices])
    solved = np.einsum("nij,nj->ni", stack, vectors)
    grid_shape = tuple(max(i[k] for i in indices) + 1 for k in range(len(indices[0])))
    out = np.zeros((stack.shape[1],) + grid_shape)
    for r, i in enumerate(indices):
        out[(slice(None),) + i] = solved[r]
    return out


# decomposition


@dataclass
class SliceDecomposition:
    omega: Field
    v: Field
    sigma: Field
    max_residual: float
    mean_residual: float
    kernel_residual: float
    kernel_dim: int
    system_size: int

    def describe(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "kernel_residual": self.kernel_residual,
            "kernel_dim": self.kernel_dim,
            "v_norm": self.v.norm(),
            "sigma_norm": self.sigma.norm(),
        }


def structural_target(omega: Field, geometry: Geometry) -> Field:
    """e_n e^{N-4} d_ω e"""
    N = geometry.N
    prefix = wedge(geometry.e_n, geometry.power(N - 4))
    return wedge(prefix, d_omega(omega, geometry.e, geometry.eta))


def invariant_constraint(omega: Field, geometry: Geometry) -> Field:
    """e^{N-3} d_ω e"""
    return wedge(geometry.power(geometry.N - 3), d_omega(omega, geometry.e, geometry.eta))


def _nodal_norms(arr: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(arr * arr, axis=0))


class SliceSolver:
    """
    Class to perform decompositions against one geometry: the per-node β-systems are
    assembled and inverted once, then applied to every node in one batched product.
    """

    def __init__(self, geometry: Geometry, tol: float = RANK_TOL):
        geometry.check_nondegenerate()
        self.geometry = geometry
        self.shift = geometry.layout.n_ghost
        self.indices, self.frames = node_frames(geometry)
        self.solvers = [BetaSolver(node, tol) for node in self.frames]
        first = self.solvers[0]
        self.beta_basis = first.w11.codomain
        self.gamma_basis = first.w11.domain
        self.v_basis = first.chi.domain
        self.kernel_dim = first.kernel.shape[1]

    def decompose(self, omega_tilde: Field) -> SliceDecomposition:
        geometry = self.geometry
        if omega_tilde.terms and omega_tilde.degrees() != {(1, 2)}:
            raise DegreeError("Connection must lie in Ω^{1,2}", {"degrees": sorted(omega_tilde.degrees())})
        beta = structural_target(omega_tilde, geometry)
        target = to_array(beta, self.beta_basis, self.shift)
        solution = _apply_nodewise([s.inverse for s in self.solvers], self.indices, target)
        split = len(self.gamma_basis)
        gamma_arr = solution[:split]
        kernels = [s.kernel for s in self.solvers]
        v_arr = _apply_nodewise(kernels, self.indices, solution[split:])
        sigma = from_array(gamma_arr, self.gamma_basis, self.shift, omega_tilde)
        v = from_array(v_arr, self.v_basis, self.shift, omega_tilde)
        omega = omega_tilde - v
        N = geometry.N
        mismatch = structural_target(omega, geometry) - wedge(geometry.power(N - 3), sigma)
        diff = to_array(mismatch, self.beta_basis, self.shift)
        scale = max(float(np.max(_nodal_norms(target))) if target.size else 0.0, 1e-300)
        residuals = _nodal_norms(diff) / scale
        kernel_residual = wedge(geometry.power(N - 3), v).norm() / max(v.norm(), 1e-300) if v.terms else 0.0
        logger.debug(f"slice decomposition: max residual {float(np.max(residuals)):.3e}")
        return SliceDecomposition(
            omega=omega,
            v=v,
            sigma=sigma,
            max_residual=float(np.max(residuals)),
            mean_residual=float(np.mean(residuals)),
            kernel_residual=float(kernel_residual),
            kernel_dim=self.kernel_dim,
            system_size=self.solvers[0].size,
        )


def decompose_connection(omega_tilde: Field, geometry: Geometry, tol: float = RANK_TOL) -> SliceDecomposition:
    """ω̃ ↦ (ω = ω̃ - v, v ∈ Ker W_{N-3}^{∂,(1,2)}, σ) with e_n e^{N-4} d_ω e = e^{N-3}σ"""
    return SliceSolver(geometry, tol).decompose(omega_tilde)


def kernel_projector(geometry: Geometry, node=(), tol: float = RANK_TOL) -> np.ndarray:
    """Orthogonal projector onto Ker W_{N-3}^{∂,(1,2)} in the Ω^{1,2}_∂ monomial basis"""
    indices, frames = node_frames(geometry)
    frame = frames[0] if indices == [()] else frames[indices.index(tuple(node))]
    w12 = assemble(WMapSpec(Variant.BOUNDARY, geometry.N - 3, 1, 2, geometry.N), frame)
    kernel = rank_kernel(w12, tol).kernel
    return kernel @ kernel.T


def random_kernel_shift(
    geometry: Geometry,
    rng: np.random.Generator,
    amplitude: float = 1.0,
    constant: Optional[bool] = None,
    tol: float = RANK_TOL,
) -> Field:
    """Random v′ ∈ Ω^{1,2}_∂ with e^{N-3}v′ = 0 at every node"""
    indices, frames = node_frames(geometry)
    shift = geometry.layout.n_ghost
    basis = fibre_basis(frames[0].layout, 1, 2)
    spec = WMapSpec(Variant.BOUNDARY, geometry.N - 3, 1, 2, geometry.N)
    projectors = []
    for frame in frames:
        kernel = rank_kernel(assemble(spec, frame), tol).kernel
        projectors.append(kernel @ kernel.T)
    if constant is None:
        constant = indices == [()]
    if constant and indices == [()]:
        raw = rng.uniform(-1.0, 1.0, size=len(basis))
    else:
        raw = rng.uniform(-1.0, 1.0, size=(len(basis),) + geometry.grid.dims)
    projected = _apply_nodewise(projectors, indices, raw)
    return from_array(amplitude * projected, basis, shift, geometry.e)


def sigma_of(omega: Field, geometry: Geometry, tol: float = ACCEPT_TOL) -> Field:
    """σ = (W_{N-3}^{∂,(1,1)})^{-1}(e_n e^{N-4} d_ω e) by nodewise least squares; OffSliceError above tol"""
    indices, frames = node_frames(geometry)
    shift = geometry.layout.n_ghost
    spec = WMapSpec(Variant.BOUNDARY, geometry.N - 3, 1, 1, geometry.N)
    maps = [assemble(spec, frame) for frame in frames]
    target = to_array(structural_target(omega, geometry), maps[0].codomain, shift)
    pinvs = [np.linalg.pinv(m.matrix) for m in maps]
    gamma = _apply_nodewise(pinvs, indices, target)
    rebuilt = _apply_nodewise([m.matrix for m in maps], indices, gamma)
    scale = max(float(np.max(_nodal_norms(target))) if target.size else 0.0, 1e-300)
    residual = float(np.max(_nodal_norms(target - rebuilt))) / scale
    if residual > tol:
        raise OffSliceError("Connection is off the structural slice", {"residual": f"{residual:.3e}", "tol": tol})
    return from_array(gamma, maps[0].domain, shift, omega)


def structural_residual(omega: Field, geometry: Geometry, tol: float = RANK_TOL) -> float:
    """Max nodal norm of the part of e_n e^{N-4} d_ω e outside Im W_{N-3}^{∂,(1,1)}, relative to d_ω e"""
    indices, frames = node_frames(geometry)
    shift = geometry.layout.n_ghost
    spec = WMapSpec(Variant.BOUNDARY, geometry.N - 3, 1, 1, geometry.N)
    maps = [assemble(spec, frame) for frame in frames]
    target = to_array(structural_target(omega, geometry), maps[0].codomain, shift)
    projectors = []
    for m in maps:
        coker = cokernel_projector(m, tol)
        projectors.append(coker.T @ coker)
    outside = _apply_nodewise(projectors, indices, target)
    scale = max(d_omega(omega, geometry.e, geometry.eta).norm(), 1.0)
    return float(np.max(_nodal_norms(outside))) / scale


def dof_audit(N: int) -> DofAudit:
    """Local component counts: coframe, connection, kernel shifts and constraints"""
    n = N - 1
    coframe = n * N
    connection = n * math.comb(N, 2)
    kernel = boundary_kernel_dim(N)
    effective = connection - kernel
    constraints = math.comb(N, 2) + n + 1
    physical = coframe - constraints
    return DofAudit(
        N=N,
        coframe=coframe,
        connection=connection,
        kernel=kernel,
        connection_effective=effective,
        constraints=constraints,
        physical=physical,
        passed=effective == coframe and physical == N * (N - 3) // 2,
    )


def wedge_preimage(target: Field, geometry: Geometry, i: int, j: int) -> Tuple[Field, float]:
    """
    Minimum-norm X ∈ Ω^{i,j} with X ∧ e^{N-3} = target, solved nodewise for every
    ghost monomial of the target. Also returns the relative part of the target that
    lies outside the image.
    """
    indices, frames = node_frames(geometry)
    shift = geometry.layout.n_ghost
    spec = WMapSpec(Variant.BOUNDARY, geometry.N - 3, i, j, geometry.N)
    maps = [assemble(spec, frame) for frame in frames]
    pinvs = [np.linalg.pinv(m.matrix) for m in maps]
    out = target._new({})
    worst = 0.0
    for ghost in target.ghost_masks():
        arr = to_array(target.ghost_part(ghost), maps[0].codomain, shift)
        solution = _apply_nodewise(pinvs, indices, arr)
        rebuilt = _apply_nodewise([m.matrix for m in maps], indices, solution)
        scale = max(float(np.max(_nodal_norms(arr))), 1e-300)
        worst = max(worst, float(np.max(_nodal_norms(arr - rebuilt))) / scale)
        piece = from_array(solution, maps[0].domain, shift, target)
        out = out + piece._new({m | ghost: v for m, v in piece.terms.items()})
    return out, worst


def verify_decomposition(
    geometry: Geometry,
    omega_tilde: Field,
    tol: float = ACCEPT_TOL,
    gauge_shifts: int = 0,
    rng: Optional[np.random.Generator] = None,
    gauge_tol: float = 1e-9,
) -> DecompositionReport:
    """Decompose ω̃, check the result is on the slice and, optionally, that ω ignores kernel shifts"""
    solver = SliceSolver(geometry)
    result = solver.decompose(omega_tilde)
    on_slice = structural_residual(result.omega, geometry)
    invariant = invariant_constraint(result.omega, geometry).norm()
    deviation = None
    if gauge_shifts:
        rng = rng if rng is not None else np.random.default_rng(0)
        scale = max(result.omega.norm(), 1e-300)
        deviation = 0.0
        for _ in range(gauge_shifts):
            shifted = solver.decompose(omega_tilde + random_kernel_shift(geometry, rng)).omega
            deviation = max(deviation, (shifted - result.omega).norm() / scale)
        logger.info(f"gauge deviation over {gauge_shifts} shifts: {deviation:.3e}")
    passed = result.max_residual <= tol and on_slice <= tol
    if deviation is not None:
        passed = passed and deviation <= gauge_tol
    return DecompositionReport(
        N=geometry.N,
        grid=list(geometry.grid.dims),
        backend=geometry.backend.value,
        kernel_dim=result.kernel_dim,
        max_residual=result.max_residual,
        mean_residual=result.mean_residual,
        structural_residual=on_slice,
        invariant_norm=invariant,
        v_norm=result.v.norm(),
        sigma_norm=result.sigma.norm(),
        gauge_deviation=deviation,
        gauge_shifts=gauge_shifts,
        tol=tol,
        passed=passed,
    )
