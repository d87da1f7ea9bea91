# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains FibreElement and VectorFibre, the fibrewise exterior algebra
Λ(ghosts) ⊗ Λ(base*) ⊗ Λ(internal) and its operations: wedge, the so(V) bracket,
interior products and frame components.

Storage is sparse over monomials and dense over a batch of nodes: `terms` maps a
monomial bitmask (see grassmann.Layout) to a numpy array whose shape is the batch
shape, () for a single fibre value.
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from pc_boundary_lab.algebra_common.grassmann import (
    GrassmannNumber,
    Layout,
    left_sign,
    merge_sign,
    popcount,
    relabel_mask,
    right_sign,
)
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.algebra_common.multi_index import MultiIndex
from pc_boundary_lab.utils_common.errors import DegeneracyError, DegreeError

logger = logging.getLogger(__name__)

Scalar = Union[float, int, np.ndarray]


def _as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=float)


class FibreElement:
    """
    Class to perform exact graded arithmetic on fibre values of Ω^{i,j}, possibly
    Grassmann valued and batched over the nodes of a grid.
    """

    _priority = 0

    def __init__(self, layout: Layout, terms: Optional[Dict[int, Scalar]] = None, shape=()):
        self.layout = layout
        self.shape = tuple(shape)
        self.terms: Dict[int, np.ndarray] = {}
        for mask, value in (terms or {}).items():
            arr = _as_array(value)
            if arr.shape != () and arr.shape != self.shape:
                arr = np.broadcast_to(arr, self.shape)
            self.terms[mask] = arr

    # construction helpers

    def _meta(self) -> dict:
        return {}

    def _new(self, terms: Dict[int, np.ndarray], shape=None) -> "FibreElement":
        return type(self)(self.layout, terms, self.shape if shape is None else shape, **self._meta())

    @staticmethod
    def _proto(a: "FibreElement", b: "FibreElement") -> "FibreElement":
        return b if b._priority > a._priority else a

    @classmethod
    def zero(cls, layout: Layout, shape=(), **meta) -> "FibreElement":
        return cls(layout, {}, shape, **meta)

    @classmethod
    def basis(
        cls,
        layout: Layout,
        base: Iterable[int] = (),
        internal: Iterable[int] = (),
        value: Scalar = 1.0,
        shape=(),
        **meta,
    ) -> "FibreElement":
        """dx^{base} ⊗ e_{internal} with sign from sorting both index lists"""
        base_sign, base_idx = MultiIndex.sorted_from(base, layout.base_dim)
        int_sign, int_idx = MultiIndex.sorted_from(internal, layout.internal_dim)
        sign = base_sign * int_sign
        if sign == 0:
            return cls(layout, {}, shape, **meta)
        mask = layout.base_mask(base_idx) | layout.internal_mask(int_idx)
        return cls(layout, {mask: sign * _as_array(value)}, shape, **meta)

    @classmethod
    def ghost_function(cls, layout: Layout, values: Dict[int, Scalar], shape=(), **meta):
        """A Grassmann valued function: {ghost monomial: coefficient array}"""
        return cls(layout, dict(values), shape, **meta)

    # inspection

    def copy(self) -> "FibreElement":
        return self._new({m: np.array(v) for m, v in self.terms.items()})

    def masks(self) -> List[int]:
        return sorted(self.terms)

    def degrees(self) -> set:
        return {
            (self.layout.base_degree(m), self.layout.internal_degree(m)) for m in self.terms
        }

    def base_degrees(self) -> set:
        return {self.layout.base_degree(m) for m in self.terms}

    def internal_degrees(self) -> set:
        return {self.layout.internal_degree(m) for m in self.terms}

    def ghost_degrees(self) -> set:
        return {self.layout.ghost_degree(m) for m in self.terms}

    def parity(self) -> Optional[int]:
        """Total parity (ghost + base + internal degree mod 2), None if mixed"""
        seen = {popcount(m) & 1 for m in self.terms}
        if not seen:
            return 0
        return seen.pop() if len(seen) == 1 else None

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def norm(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.terms.values()), default=0.0)

    def chop(self, tol: float = 0.0) -> "FibreElement":
        return self._new({m: v for m, v in self.terms.items() if np.max(np.abs(v)) > tol})

    def coefficient(self, base: MultiIndex, internal: MultiIndex, node=None) -> GrassmannNumber:
        """Ghost-algebra coefficient of dx^{base} ⊗ e_{internal}, at one node"""
        slot = self.layout.base_mask(base) | self.layout.internal_mask(internal)
        out: Dict[int, float] = {}
        for mask, value in self.terms.items():
            ghost, rest = mask & self.layout.ghost_all, mask & ~self.layout.ghost_all
            if rest != slot:
                continue
            out[ghost] = float(value if value.shape == () or node is None else value[node])
        return GrassmannNumber(out, self.layout.n_ghost)

    def at(self, node) -> "FibreElement":
        """Pointwise fibre value"""
        return FibreElement(
            self.layout,
            {m: (v if v.shape == () else v[node]) for m, v in self.terms.items()},
            (),
        )

    def select(self, predicate) -> "FibreElement":
        return self._new({m: v for m, v in self.terms.items() if predicate(m)})

    def ghost_part(self, ghost_mask: int) -> "FibreElement":
        """Coefficient (ghost-free) of one ghost monomial placed on the left"""
        out = {}
        for mask, value in self.terms.items():
            if mask & self.layout.ghost_all == ghost_mask:
                out[mask ^ ghost_mask] = value
        return self._new(out)

    def ghost_masks(self) -> List[int]:
        return sorted({m & self.layout.ghost_all for m in self.terms})

    def relabel(self, perm) -> "FibreElement":
        """Image under θ_k ↦ θ_{perm[k]} of the ghost generators"""
        out = {}
        for mask, value in self.terms.items():
            image, sign = relabel_mask(mask, perm)
            out[image] = value if sign > 0 else -value
        return self._new(out)

    # linear structure

    def _check(self, other: "FibreElement"):
        if other.layout != self.layout:
            raise DegreeError("Layouts differ between operands")

    def _combine(self, other: "FibreElement", factor: float) -> "FibreElement":
        self._check(other)
        out = dict(self.terms)
        for mask, value in other.terms.items():
            if mask in out:
                out[mask] = out[mask] + factor * value
            else:
                out[mask] = factor * value
        proto = self._proto(self, other)
        return proto._new(out, np.broadcast_shapes(self.shape, other.shape))

    def __add__(self, other):
        if isinstance(other, FibreElement):
            return self._combine(other, 1.0)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FibreElement):
            return self._combine(other, -1.0)
        return NotImplemented

    def __neg__(self):
        return self._new({m: -v for m, v in self.terms.items()})

    def scale(self, factor: Scalar) -> "FibreElement":
        factor = _as_array(factor)
        shape = np.broadcast_shapes(self.shape, factor.shape)
        return self._new({m: v * factor for m, v in self.terms.items()}, shape)

    def __mul__(self, other):
        if isinstance(other, FibreElement):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, FibreElement):
            return wedge(other, self)
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(1.0 / _as_array(other))

    def allclose(self, other: "FibreElement", atol: float = 1e-12) -> bool:
        return (self - other).norm() <= atol

    def __repr__(self):
        return (
            f"{type(self).__name__}(terms={len(self.terms)}, degrees={sorted(self.degrees())}, "
            f"shape={self.shape})"
        )


def wedge(a: FibreElement, b: FibreElement) -> FibreElement:
    """Graded product; degree overflow is an error unless one side is zero"""
    a._check(b)
    layout = a.layout
    if a.terms and b.terms:
        min_base = min(a.base_degrees()) + min(b.base_degrees())
        min_int = min(a.internal_degrees()) + min(b.internal_degrees())
        if min_base > layout.base_dim or min_int > layout.internal_dim:
            raise DegreeError(
                "Wedge product exceeds the available degrees",
                {"base": min_base, "internal": min_int},
            )
    out: Dict[int, np.ndarray] = {}
    for ma, va in a.terms.items():
        for mb, vb in b.terms.items():
            sign = merge_sign(ma, mb)
            if not sign:
                continue
            key = ma | mb
            prod = va * vb if sign > 0 else -(va * vb)
            if key in out:
                out[key] = out[key] + prod
            else:
                out[key] = prod
    proto = FibreElement._proto(a, b)
    return proto._new(out, np.broadcast_shapes(a.shape, b.shape))


def left_derivative(a: FibreElement, bit: int) -> FibreElement:
    """Odd derivative removing generator `bit` from the left"""
    out = {}
    for mask, value in a.terms.items():
        if mask & bit:
            out[mask ^ bit] = value if left_sign(mask, bit) > 0 else -value
    return a._new(out)


def right_derivative(a: FibreElement, bit: int) -> FibreElement:
    """Odd derivative removing generator `bit` from the right"""
    out = {}
    for mask, value in a.terms.items():
        if mask & bit:
            out[mask ^ bit] = value if right_sign(mask, bit) > 0 else -value
    return a._new(out)


def contract_coordinate(a: FibreElement, mu: int) -> FibreElement:
    """ι_{∂_mu} a, the base component (a)_mu"""
    if a.terms and min(a.base_degrees()) == 0 and max(a.base_degrees()) == 0:
        raise DegreeError("Cannot contract a base 0-form", {"mu": mu})
    return left_derivative(a, a.layout.base_bit(mu))


def internal_bracket(x: FibreElement, a: FibreElement, eta: InternalMetric) -> FibreElement:
    """
    so(V) action of x ∈ Ω^{i,2} on a, extended to Λ^m V as a graded derivation:
    [x, a] = Σ_b η_bb (∂^R_{e_b} x)(∂^L_{e_b} a).
    """
    if x.terms and x.internal_degrees() != {2}:
        raise DegreeError(
            "internal_bracket needs internal degree 2 on the left",
            {"degrees": sorted(x.internal_degrees())},
        )
    layout = x.layout
    result = FibreElement._proto(x, a)._new({}, np.broadcast_shapes(x.shape, a.shape))
    for b in range(layout.internal_dim):
        bit = layout.internal_bit(b)
        dx = right_derivative(x, bit)
        if not dx.terms:
            continue
        da = left_derivative(a, bit)
        if not da.terms:
            continue
        term = wedge(dx, da)
        result = result + (term if eta[b] > 0 else -term)
    return result


class VectorFibre:
    """
    Class to perform arithmetic on (possibly Grassmann valued) vector fields
    ξ = Σ θ^{g} ξ^μ_g ∂_μ, stored as {(ghost monomial, μ): coefficient array}.
    """

    _priority = 0

    def __init__(self, layout: Layout, terms: Optional[Dict[Tuple[int, int], Scalar]] = None, shape=()):
        self.layout = layout
        self.shape = tuple(shape)
        self.terms: Dict[Tuple[int, int], np.ndarray] = {}
        for key, value in (terms or {}).items():
            arr = _as_array(value)
            if arr.shape != () and arr.shape != self.shape:
                arr = np.broadcast_to(arr, self.shape)
            self.terms[key] = arr

    def _meta(self) -> dict:
        return {}

    def _new(self, terms, shape=None) -> "VectorFibre":
        return type(self)(self.layout, terms, self.shape if shape is None else shape, **self._meta())

    def _scalar(self, terms, shape=None) -> FibreElement:
        return FibreElement(self.layout, terms, self.shape if shape is None else shape)

    @classmethod
    def coordinate(cls, layout: Layout, mu: int, value: Scalar = 1.0, shape=(), **meta):
        return cls(layout, {(0, mu): value}, shape, **meta)

    @classmethod
    def from_components(cls, components: List[FibreElement], **meta) -> "VectorFibre":
        """Assemble from ghost functions ξ^μ (base and internal degree 0)"""
        layout = components[0].layout
        shape = np.broadcast_shapes(*(c.shape for c in components))
        terms = {}
        for mu, comp in enumerate(components):
            for mask, value in comp.terms.items():
                if mask & ~layout.ghost_all:
                    raise DegreeError("Vector components must be ghost functions", {"mu": mu})
                terms[(mask, mu)] = value
        return cls(layout, terms, shape, **meta)

    def component(self, mu: int) -> FibreElement:
        return self._scalar({g: v for (g, m), v in self.terms.items() if m == mu})

    def components(self) -> List[FibreElement]:
        return [self.component(mu) for mu in range(self.layout.base_dim)]

    def relabel(self, perm) -> "VectorFibre":
        out = {}
        for (ghost, mu), value in self.terms.items():
            image, sign = relabel_mask(ghost, perm)
            out[(image, mu)] = value if sign > 0 else -value
        return self._new(out)

    def parity(self) -> Optional[int]:
        seen = {popcount(g) & 1 for (g, _mu) in self.terms}
        if not seen:
            return 0
        return seen.pop() if len(seen) == 1 else None

    def norm(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.terms.values()), default=0.0)

    def _combine(self, other: "VectorFibre", factor: float) -> "VectorFibre":
        out = dict(self.terms)
        for key, value in other.terms.items():
            out[key] = out[key] + factor * value if key in out else factor * value
        proto = other if other._priority > self._priority else self
        return proto._new(out, np.broadcast_shapes(self.shape, other.shape))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def scale(self, factor: Scalar) -> "VectorFibre":
        factor = _as_array(factor)
        shape = np.broadcast_shapes(self.shape, factor.shape)
        return self._new({k: v * factor for k, v in self.terms.items()}, shape)

    def __mul__(self, factor):
        return self.scale(factor)

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}(terms={len(self.terms)}, shape={self.shape})"


def interior_product(xi: VectorFibre, a: FibreElement) -> FibreElement:
    """ι_ξ a = Σ θ^g ξ^μ_g ι_{∂μ} a; an error on base 0-forms"""
    if a.terms and max(a.base_degrees()) == 0:
        raise DegreeError("Interior product of a base 0-form")
    layout = a.layout
    out: Dict[int, np.ndarray] = {}
    for (ghost, mu), coeff in xi.terms.items():
        da = left_derivative(a, layout.base_bit(mu))
        for mask, value in da.terms.items():
            sign = merge_sign(ghost, mask)
            if not sign:
                continue
            key = ghost | mask
            prod = coeff * value if sign > 0 else -(coeff * value)
            out[key] = out[key] + prod if key in out else prod
    shape = np.broadcast_shapes(xi.shape, a.shape)
    if a._priority >= xi._priority:
        return a._new(out, shape)
    return xi._scalar(out, shape)


# frames


def frame_vectors(frame: np.ndarray, layout: Layout, proto: Optional[FibreElement] = None) -> List[FibreElement]:
    """Internal vectors f_k = Σ_c frame[..., c, k] e_c"""
    vectors = []
    for k in range(frame.shape[-1]):
        terms = {layout.internal_bit(c): frame[..., c, k] for c in range(frame.shape[-2])}
        shape = frame.shape[:-2]
        if proto is None:
            vectors.append(FibreElement(layout, terms, shape))
        else:
            vectors.append(proto._new(terms, shape))
    return vectors


def check_frame(frame: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Indices of nodes where the frame matrix is numerically singular"""
    sv = np.linalg.svd(frame, compute_uv=False)
    bad = sv[..., -1] <= tol * sv[..., 0]
    return np.argwhere(bad) if bad.ndim else (np.array([[0]]) if bad else np.zeros((0, 1), int))


def frame_components(x: FibreElement, frame: np.ndarray, tol: float = 1e-12) -> List[FibreElement]:
    """
    Components X^{(k)} with X = Σ_k X^{(k)} f_k, for x of internal degree 1.
    The last entry is the (n) component along e_n.
    """
    if x.terms and x.internal_degrees() != {1}:
        raise DegreeError(
            "frame_components needs internal degree 1",
            {"degrees": sorted(x.internal_degrees())},
        )
    bad = check_frame(frame, tol)
    if len(bad):
        raise DegeneracyError("Frame (e_a, e_n) is singular", nodes=[tuple(b) for b in bad])
    layout = x.layout
    dim = layout.internal_dim
    inverse = np.linalg.inv(frame)
    grouped: Dict[int, List[np.ndarray]] = {}
    for mask, value in x.terms.items():
        rest = mask & ~layout.internal_all
        c = layout.internal_entries(mask)[0]
        slot = grouped.setdefault(rest, [np.zeros(()) for _ in range(dim)])
        slot[c] = slot[c] + value
    comps: List[Dict[int, np.ndarray]] = [dict() for _ in range(dim)]
    for rest, values in grouped.items():
        stacked = np.stack(np.broadcast_arrays(*values), axis=-1)
        solved = np.einsum("...kc,...c->...k", inverse, stacked)
        for k in range(dim):
            comps[k][rest] = solved[..., k]
    shape = np.broadcast_shapes(x.shape, frame.shape[:-2])
    return [x._new(c, shape) for c in comps]


def reconstruct(components: List[FibreElement], frame: np.ndarray) -> FibreElement:
    """Σ_k X^{(k)} f_k"""
    vectors = frame_vectors(frame, components[0].layout, components[0])
    total = components[0]._new({}, np.broadcast_shapes(components[0].shape, frame.shape[:-2]))
    for comp, vec in zip(components, vectors):
        total = total + wedge(comp, vec)
    return total


def top_coefficient(a: FibreElement) -> Dict[int, np.ndarray]:
    """{ghost monomial: coefficient of θ^g dx^0..dx^{n-1} e_0..e_{N-1}}"""
    layout = a.layout
    top = layout.base_all | layout.internal_all
    return {m & layout.ghost_all: v for m, v in a.terms.items() if m & ~layout.ghost_all == top}


def top_form(layout: Layout, proto: Optional[FibreElement] = None) -> FibreElement:
    """dx^0..dx^{n-1} e_0..e_{N-1}"""
    terms = {layout.base_all | layout.internal_all: 1.0}
    if proto is None:
        return FibreElement(layout, terms)
    return proto._new(terms, ())


def is_homogeneous(a: FibreElement) -> bool:
    """Single (base, internal) bidegree and single total parity"""
    return len(a.degrees()) <= 1 and a.parity() is not None
