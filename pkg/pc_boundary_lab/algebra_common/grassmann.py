# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the bitmask Grassmann machinery: the generator Layout shared by
ghosts, base covectors and internal vectors, the reordering sign, and GrassmannNumber.

Every generator is odd. A monomial is the ordered product of the generators whose
bits are set, lowest bit leftmost, and the sign of a product of two monomials is the
parity of the transpositions needed to restore that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from pc_boundary_lab.utils_common.errors import BudgetError


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=1 << 20)
def merge_sign(a: int, b: int) -> int:
    """Sign of (monomial a)(monomial b) against the canonical monomial a|b, 0 if they share a generator"""
    if a & b:
        return 0
    swaps = 0
    while b:
        low = b & -b
        # generators of a sitting to the right of this generator of b
        swaps += popcount(a & ~((low << 1) - 1))
        b ^= low
    return -1 if swaps & 1 else 1


def left_sign(mask: int, bit: int) -> int:
    """Sign of pulling generator `bit` to the left end of monomial `mask`"""
    return -1 if popcount(mask & (bit - 1)) & 1 else 1


def right_sign(mask: int, bit: int) -> int:
    """Sign of pulling generator `bit` to the right end of monomial `mask`"""
    return -1 if popcount(mask & ~((bit << 1) - 1)) & 1 else 1


def relabel_mask(mask: int, perm: Sequence[int]) -> Tuple[int, int]:
    """
    (image, sign) of a monomial under θ_k ↦ θ_{perm[k]} for k < len(perm); higher
    generators are kept and stay to the right of the relabelled ones.
    """
    count = len(perm)
    low = mask & ((1 << count) - 1)
    images = [perm[k] for k in range(count) if low >> k & 1]
    inversions = sum(1 for i in range(len(images)) for j in range(i + 1, len(images)) if images[i] > images[j])
    image = mask ^ low
    for k in images:
        image |= 1 << k
    return image, -1 if inversions & 1 else 1


@dataclass(frozen=True)
class Layout:
    """
    Class to perform generator bookkeeping for one computation.

    Generators are ordered ghosts first, then the base covectors dx^0..dx^{n-1},
    then the internal basis vectors e_0..e_{N-1}. Each ghost generator carries a
    label (the field it polarizes) and a ghost number used by the audits.
    """

    base_dim: int
    internal_dim: int
    ghost_labels: Tuple[str, ...] = ()
    ghost_numbers: Tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.ghost_numbers) != len(self.ghost_labels):
            object.__setattr__(self, "ghost_numbers", tuple(1 for _ in self.ghost_labels))

    @property
    def n_ghost(self) -> int:
        return len(self.ghost_labels)

    def ghost_bit(self, k: int) -> int:
        return 1 << k

    def base_bit(self, mu: int) -> int:
        return 1 << (self.n_ghost + mu)

    def internal_bit(self, a: int) -> int:
        return 1 << (self.n_ghost + self.base_dim + a)

    @property
    def ghost_all(self) -> int:
        return (1 << self.n_ghost) - 1

    @property
    def base_all(self) -> int:
        return ((1 << self.base_dim) - 1) << self.n_ghost

    @property
    def internal_all(self) -> int:
        return ((1 << self.internal_dim) - 1) << (self.n_ghost + self.base_dim)

    def split(self, mask: int) -> Tuple[int, int, int]:
        return mask & self.ghost_all, mask & self.base_all, mask & self.internal_all

    def base_degree(self, mask: int) -> int:
        return popcount(mask & self.base_all)

    def internal_degree(self, mask: int) -> int:
        return popcount(mask & self.internal_all)

    def ghost_degree(self, mask: int) -> int:
        return popcount(mask & self.ghost_all)

    def ghost_number(self, mask: int) -> int:
        total = 0
        for k in range(self.n_ghost):
            if mask >> k & 1:
                total += self.ghost_numbers[k]
        return total

    def generators(self, label: str) -> List[int]:
        """Indices of the ghost generators allotted to a field label"""
        return [k for k, lab in enumerate(self.ghost_labels) if lab == label]

    def base_mask(self, entries: Iterable[int]) -> int:
        mask = 0
        for mu in entries:
            mask |= self.base_bit(mu)
        return mask

    def internal_mask(self, entries: Iterable[int]) -> int:
        mask = 0
        for a in entries:
            mask |= self.internal_bit(a)
        return mask

    def base_entries(self, mask: int) -> Tuple[int, ...]:
        return tuple(mu for mu in range(self.base_dim) if mask & self.base_bit(mu))

    def internal_entries(self, mask: int) -> Tuple[int, ...]:
        return tuple(a for a in range(self.internal_dim) if mask & self.internal_bit(a))

    def ghost_entries(self, mask: int) -> Tuple[int, ...]:
        return tuple(k for k in range(self.n_ghost) if mask >> k & 1)

    def with_ghosts(self, labels: Sequence[str], numbers: Sequence[int]) -> "Layout":
        return Layout(self.base_dim, self.internal_dim, tuple(labels), tuple(numbers))

    def fibre_dim(self, i: int, j: int) -> int:
        return math.comb(self.base_dim, i) * math.comb(self.internal_dim, j)


def build_layout(
    base_dim: int,
    internal_dim: int,
    allotment: Optional[Mapping[str, Tuple[int, int]]] = None,
    max_generators: int = 40,
) -> Layout:
    """
    Make a Layout from {label: (generator count, ghost number)} in insertion order.
    """
    labels: List[str] = []
    numbers: List[int] = []
    for label, (count, ghost_number) in (allotment or {}).items():
        labels.extend([label] * count)
        numbers.extend([ghost_number] * count)
    if len(labels) > max_generators:
        raise BudgetError(
            "Requested more Grassmann generators than the budget allows",
            {"requested": len(labels), "budget": max_generators},
        )
    return Layout(base_dim, internal_dim, tuple(labels), tuple(numbers))


@dataclass
class GrassmannNumber:
    """Element of the Grassmann algebra on the ghost generators of a layout"""

    terms: Dict[int, float] = field(default_factory=dict)
    n_generators: int = 0

    @classmethod
    def scalar(cls, value: float, n_generators: int = 0) -> "GrassmannNumber":
        return cls({0: float(value)} if value else {}, n_generators)

    @classmethod
    def generator(cls, k: int, n_generators: int) -> "GrassmannNumber":
        if k >= n_generators:
            raise BudgetError("Generator index outside budget", {"k": k, "G": n_generators})
        return cls({1 << k: 1.0}, n_generators)

    def _combine(self, other: "GrassmannNumber", factor: float) -> "GrassmannNumber":
        out = dict(self.terms)
        for mask, value in other.terms.items():
            out[mask] = out.get(mask, 0.0) + factor * value
        return GrassmannNumber(out, max(self.n_generators, other.n_generators))

    def __add__(self, other):
        if not isinstance(other, GrassmannNumber):
            other = GrassmannNumber.scalar(other, self.n_generators)
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, GrassmannNumber):
            other = GrassmannNumber.scalar(other, self.n_generators)
        return self._combine(other, -1.0)

    def __neg__(self):
        return GrassmannNumber({m: -v for m, v in self.terms.items()}, self.n_generators)

    def __mul__(self, other):
        if not isinstance(other, GrassmannNumber):
            return GrassmannNumber(
                {m: v * float(other) for m, v in self.terms.items()}, self.n_generators
            )
        out: Dict[int, float] = {}
        for ma, va in self.terms.items():
            for mb, vb in other.terms.items():
                sign = merge_sign(ma, mb)
                if sign:
                    key = ma | mb
                    out[key] = out.get(key, 0.0) + sign * va * vb
        return GrassmannNumber(out, max(self.n_generators, other.n_generators))

    def __rmul__(self, other):
        return self.__mul__(other)

    @property
    def body(self) -> float:
        return self.terms.get(0, 0.0)

    def soul(self) -> "GrassmannNumber":
        return GrassmannNumber({m: v for m, v in self.terms.items() if m}, self.n_generators)

    def even(self) -> "GrassmannNumber":
        return GrassmannNumber(
            {m: v for m, v in self.terms.items() if not popcount(m) & 1}, self.n_generators
        )

    def odd(self) -> "GrassmannNumber":
        return GrassmannNumber(
            {m: v for m, v in self.terms.items() if popcount(m) & 1}, self.n_generators
        )

    def parity(self, tol: float = 0.0) -> Optional[int]:
        """0 or 1 for homogeneous elements, None when mixed; zero counts as even"""
        seen = {popcount(m) & 1 for m, v in self.terms.items() if abs(v) > tol}
        if not seen:
            return 0
        return seen.pop() if len(seen) == 1 else None

    def norm(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def chop(self, tol: float = 0.0) -> "GrassmannNumber":
        return GrassmannNumber(
            {m: v for m, v in self.terms.items() if abs(v) > tol}, self.n_generators
        )

    def relabel(self, perm: Sequence[int]) -> "GrassmannNumber":
        """Image under θ_k ↦ θ_{perm[k]}"""
        out: Dict[int, float] = {}
        for mask, value in self.terms.items():
            image, sign = relabel_mask(mask, perm)
            out[image] = sign * value
        return GrassmannNumber(out, self.n_generators)

    def get(self, mask: int) -> float:
        return self.terms.get(mask, 0.0)

    def masks(self) -> List[int]:
        return sorted(self.terms)

    def __repr__(self):
        if not self.terms:
            return "GrassmannNumber(0)"
        parts = []
        for mask in sorted(self.terms):
            gens = "".join(f"θ{k}" for k in range(mask.bit_length()) if mask >> k & 1)
            parts.append(f"{self.terms[mask]:+.6g}{gens}")
        return "GrassmannNumber(" + " ".join(parts) + ")"


def grassmann_norm(values: Iterable[GrassmannNumber]) -> float:
    return max((v.norm() for v in values), default=0.0)


def ghost_number_profile(masks: Iterable[int], layout: Layout) -> Dict[int, int]:
    """{ghost number: count of monomials} for the ghost parts of `masks`"""
    profile: Dict[int, int] = {}
    for mask in masks:
        gn = layout.ghost_number(mask & layout.ghost_all)
        profile[gn] = profile.get(gn, 0) + 1
    return profile
