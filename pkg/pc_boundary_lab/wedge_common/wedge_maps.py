# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the wedge maps W_k^{(i,j)} (bulk) and W_k^{∂,(i,j)} (boundary),
the maps ϱ(X) = [X, e] and χ(v) = e_n e^{N-4}[v, e], their assembly as dense
fibre matrices at one node, and rank/kernel computation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from pc_boundary_lab.algebra_common.fibre import FibreElement, internal_bracket
from pc_boundary_lab.algebra_common.grassmann import Layout, merge_sign
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.utils_common.errors import ConfigError, DegreeError

logger = logging.getLogger(__name__)

RANK_TOL = 1e-9


class Variant(str, Enum):
    BULK = "BULK"
    BOUNDARY = "BOUNDARY"


@dataclass(frozen=True)
class WMapSpec:
    """X ↦ X ∧ e^k on Ω^{i,j}, bulk (base dim N) or boundary (base dim N-1)"""

    variant: Variant
    k: int
    i: int
    j: int
    N: int

    def __post_init__(self):
        if self.k < 0 or self.i < 0 or self.j < 0:
            raise DegreeError("Negative degree in WMapSpec", {"spec": self.label})
        if self.i + self.k > self.base_dim or self.j + self.k > self.N:
            raise DegreeError(
                "Wedge map leaves the exterior algebra",
                {"spec": self.label, "base_dim": self.base_dim},
            )

    @property
    def base_dim(self) -> int:
        return self.N if self.variant == Variant.BULK else self.N - 1

    @property
    def domain_dim(self) -> int:
        return math.comb(self.base_dim, self.i) * math.comb(self.N, self.j)

    @property
    def codomain_dim(self) -> int:
        return math.comb(self.base_dim, self.i + self.k) * math.comb(self.N, self.j + self.k)

    @property
    def label(self) -> str:
        mark = "∂," if self.variant == Variant.BOUNDARY else ""
        return f"W_{self.k}^{{{mark}({self.i},{self.j})}}"


@lru_cache(maxsize=None)
def _basis(layout: Layout, i: int, j: int) -> Tuple[int, ...]:
    out = []
    for base in combinations(range(layout.base_dim), i):
        for internal in combinations(range(layout.internal_dim), j):
            out.append(layout.base_mask(base) | layout.internal_mask(internal))
    return tuple(out)


def fibre_basis(layout: Layout, i: int, j: int) -> List[int]:
    """Monomial masks of Ω^{i,j}, base multi-index major"""
    return list(_basis(layout, i, j))


@dataclass(frozen=True)
class ProductTable:
    """
    Nonzero basis products of Ω^{left} × Ω^{right} → Ω^{left+right}:
    left[l[t]] · right[r[t]] = sign[t] · out[o[t]] for every entry t.
    """

    out: np.ndarray
    left: np.ndarray
    right: np.ndarray
    sign: np.ndarray
    shape: Tuple[int, int, int]

    def multiply(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Coefficients of x ∧ y"""
        return np.bincount(self.out, weights=self.sign * x[self.left] * y[self.right], minlength=self.shape[0])

    def right_matrix(self, y: np.ndarray) -> np.ndarray:
        """Matrix of X ↦ X ∧ y"""
        matrix = np.zeros(self.shape[:2])
        np.add.at(matrix, (self.out, self.left), self.sign * y[self.right])
        return matrix

    def left_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of Y ↦ x ∧ Y"""
        matrix = np.zeros((self.shape[0], self.shape[2]))
        np.add.at(matrix, (self.out, self.right), self.sign * x[self.left])
        return matrix


@lru_cache(maxsize=None)
def product_table(layout: Layout, left: Tuple[int, int], right: Tuple[int, int]) -> ProductTable:
    left_basis, right_basis = _basis(layout, *left), _basis(layout, *right)
    out_basis = _basis(layout, left[0] + right[0], left[1] + right[1])
    index = {m: o for o, m in enumerate(out_basis)}
    entries = []
    for l, a in enumerate(left_basis):
        for r, b in enumerate(right_basis):
            sign = merge_sign(a, b)
            if sign:
                entries.append((index[a | b], l, r, sign))
    table = np.array(entries, dtype=np.int64).reshape(-1, 4)
    logger.debug(f"product table {left} x {right}: {len(entries)} entries")
    return ProductTable(
        table[:, 0], table[:, 1], table[:, 2], table[:, 3].astype(float), (len(out_basis), len(left_basis), len(right_basis))
    )


@dataclass
class FibreMatrix:
    """Dense matrix of a linear map between fibre spaces, in monomial bases"""

    matrix: np.ndarray
    domain: List[int]
    codomain: List[int]
    layout: Layout
    label: str = ""

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def vector(self, x: FibreElement, basis: Optional[List[int]] = None) -> np.ndarray:
        basis = self.domain if basis is None else basis
        index = {m: r for r, m in enumerate(basis)}
        vec = np.zeros(len(basis))
        for mask, value in x.terms.items():
            if mask not in index:
                raise DegreeError("Element outside the fibre basis", {"map": self.label})
            vec[index[mask]] = float(value)
        return vec

    def element(self, vec: np.ndarray, basis: Optional[List[int]] = None) -> FibreElement:
        basis = self.domain if basis is None else basis
        return FibreElement(self.layout, {m: float(v) for m, v in zip(basis, vec) if v != 0.0})

    def apply(self, x: FibreElement) -> FibreElement:
        return self.element(self.matrix @ self.vector(x), self.codomain)


def assemble_linear(
    layout: Layout,
    func: Callable[[FibreElement], FibreElement],
    domain: List[int],
    codomain: List[int],
    label: str = "",
) -> FibreMatrix:
    """Column r is func(basis element r) expanded in the codomain basis"""
    index = {m: r for r, m in enumerate(codomain)}
    matrix = np.zeros((len(codomain), len(domain)))
    for col, mask in enumerate(domain):
        image = func(FibreElement(layout, {mask: 1.0}))
        for out_mask, value in image.terms.items():
            if out_mask not in index:
                raise DegreeError("Image leaves the codomain", {"map": label})
            matrix[index[out_mask], col] += float(value)
    return FibreMatrix(matrix, domain, codomain, layout, label)


@lru_cache(maxsize=None)
def bracket_tensor(layout: Layout, eta: InternalMetric) -> np.ndarray:
    """T[o, x, s] with [X, e] = Σ_{x,s} T[:, x, s] X_x e_s for X ∈ Ω^{1,2}, e ∈ Ω^{1,1}"""
    domain, codomain = fibre_basis(layout, 1, 2), fibre_basis(layout, 2, 1)
    columns = [
        assemble_linear(layout, lambda x: internal_bracket(x, FibreElement(layout, {s: 1.0}), eta), domain, codomain).matrix
        for s in _basis(layout, 1, 1)
    ]
    return np.stack(columns, axis=-1)


class NodeFrame:
    """
    Class to perform fibre computations at one node: coframe e (rows dx^a),
    optional transversal e_n, metric η and cached powers of e. Powers and the
    assembled maps go through coefficient vectors in the fibre bases.
    """

    def __init__(self, coframe: np.ndarray, eta: InternalMetric, normal: Optional[np.ndarray] = None):
        coframe = np.asarray(coframe, dtype=float)
        self.base_dim, self.N = coframe.shape
        self.layout = Layout(self.base_dim, self.N)
        self.eta = eta
        self.coframe = coframe
        # _basis(layout, 1, 1) runs dx^a major, e_c minor
        self.e_vector = coframe.reshape(-1).copy()
        self.e = self._element(1, 1, self.e_vector)
        self.e_n = None
        self.e_n_vector = None
        if normal is not None:
            self.e_n_vector = np.asarray(normal, dtype=float).copy()
            self.e_n = self._element(0, 1, self.e_n_vector)
        self._power_vectors: Dict[int, np.ndarray] = {0: np.ones(1)}
        self._powers: Dict[int, FibreElement] = {}

    def _element(self, i: int, j: int, vec: np.ndarray) -> FibreElement:
        return FibreElement(self.layout, {m: float(v) for m, v in zip(_basis(self.layout, i, j), vec) if v != 0.0})

    def power_vector(self, k: int) -> np.ndarray:
        if k not in self._power_vectors:
            table = product_table(self.layout, (k - 1, k - 1), (1, 1))
            self._power_vectors[k] = table.multiply(self.power_vector(k - 1), self.e_vector)
        return self._power_vectors[k]

    def power(self, k: int) -> FibreElement:
        if k not in self._powers:
            self._powers[k] = self._element(k, k, self.power_vector(k))
        return self._powers[k]

    def prefix_vector(self, k: int) -> np.ndarray:
        """e_n e^k in the Ω^{k,k+1} basis"""
        if self.e_n_vector is None:
            raise DegreeError("Node frame has no transversal e_n", {"k": k})
        return product_table(self.layout, (0, 1), (k, k)).multiply(self.e_n_vector, self.power_vector(k))

    def frame_matrix(self) -> np.ndarray:
        frame = np.zeros((self.N, self.N))
        frame[:, : self.base_dim] = self.coframe.T
        if self.e_n_vector is not None:
            frame[:, self.base_dim] = self.e_n_vector
        return frame


def assemble(spec: WMapSpec, node: NodeFrame) -> FibreMatrix:
    """Matrix of X ↦ X ∧ e^k at one node"""
    if node.base_dim != spec.base_dim or node.N != spec.N:
        raise DegreeError("Node frame does not match the map", {"map": spec.label})
    table = product_table(node.layout, (spec.i, spec.j), (spec.k, spec.k))
    domain = fibre_basis(node.layout, spec.i, spec.j)
    codomain = fibre_basis(node.layout, spec.i + spec.k, spec.j + spec.k)
    return FibreMatrix(table.right_matrix(node.power_vector(spec.k)), domain, codomain, node.layout, spec.label)


def _rho_matrix(node: NodeFrame) -> np.ndarray:
    return np.tensordot(bracket_tensor(node.layout, node.eta), node.e_vector, axes=([2], [0]))


def assemble_rho(node: NodeFrame) -> FibreMatrix:
    """ϱ: Ω^{1,2}_∂ → Ω^{2,1}_∂, X ↦ [X, e]"""
    domain = fibre_basis(node.layout, 1, 2)
    codomain = fibre_basis(node.layout, 2, 1)
    return FibreMatrix(_rho_matrix(node), domain, codomain, node.layout, "rho")


def assemble_chi(node: NodeFrame) -> FibreMatrix:
    """χ: Ω^{1,2}_∂ → Ω^{N-2,N-2}_∂, v ↦ e_n e^{N-4} [v, e]"""
    N = node.N
    prefix = product_table(node.layout, (N - 4, N - 3), (2, 1)).left_matrix(node.prefix_vector(N - 4))
    domain = fibre_basis(node.layout, 1, 2)
    codomain = fibre_basis(node.layout, N - 2, N - 2)
    return FibreMatrix(prefix @ _rho_matrix(node), domain, codomain, node.layout, "chi")


def assemble_prefixed(node: NodeFrame, i: int, j: int, k: int, label: str = "") -> FibreMatrix:
    """X ↦ e_n e^k X on Ω^{i,j}"""
    table = product_table(node.layout, (k, k + 1), (i, j))
    domain = fibre_basis(node.layout, i, j)
    codomain = fibre_basis(node.layout, i + k, j + k + 1)
    return FibreMatrix(table.left_matrix(node.prefix_vector(k)), domain, codomain, node.layout, label)


@dataclass
class RankKernel:
    rank: int
    kernel: np.ndarray
    singular_values: np.ndarray
    gap: Optional[float]
    tol: float

    @property
    def nullity(self) -> int:
        return self.kernel.shape[1]


def rank_kernel(m, tol: float = RANK_TOL) -> RankKernel:
    """
    Rank by relative singular value threshold tol·σ_max; orthonormal kernel basis from
    the right singular vectors. The gap is σ_kept_min / σ_discarded_max.
    """
    if tol <= 0:
        raise ConfigError("Rank tolerance must be positive", {"tol": tol})
    matrix = m.matrix if isinstance(m, FibreMatrix) else np.asarray(m, dtype=float)
    rows, cols = matrix.shape
    if matrix.size == 0:
        return RankKernel(0, np.eye(cols), np.zeros(0), None, tol)
    u, s, vh = np.linalg.svd(matrix)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    kernel = vh[rank:].T.copy()
    gap = None
    if 0 < rank < len(s):
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else float("inf")
    elif 0 < rank < cols:
        gap = float("inf")
    return RankKernel(rank, kernel, s, gap, tol)


def exact_rank(matrix: np.ndarray, digits: int = 9) -> int:
    """Rank over the rationals for matrices with integer (or near-integer) entries"""
    rows = []
    for row in np.asarray(matrix):
        out = []
        for x in row:
            r = round(float(x))
            if abs(float(x) - r) > 10.0 ** (-digits):
                raise ValueError("exact_rank needs integer entries")
            out.append(Fraction(r))
        rows.append(out)
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / p
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def image_residual(m: FibreMatrix, target: np.ndarray) -> float:
    """Relative least-squares residual of target against Im m"""
    sol, *_ = np.linalg.lstsq(m.matrix, target, rcond=None)
    scale = max(float(np.linalg.norm(target)), 1e-300)
    return float(np.linalg.norm(m.matrix @ sol - target) / scale)


def cokernel_projector(m: FibreMatrix, tol: float = RANK_TOL) -> np.ndarray:
    """Rows spanning the orthogonal complement of Im m"""
    u, s, _ = np.linalg.svd(m.matrix)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return u[:, rank:].T.copy()
