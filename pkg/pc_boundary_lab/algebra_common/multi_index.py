# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the MultiIndex type used to name basis slots of exterior powers.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence, Tuple

from pc_boundary_lab.utils_common.errors import DegreeError


def permutation_sign(entries: Sequence[int]) -> int:
    """Levi-Civita sign of a sequence relative to its sorted order, 0 on repeats"""
    items = list(entries)
    if len(set(items)) != len(items):
        return 0
    sign = 1
    # Inversion count parity
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def levi_civita(perm: Sequence[int]) -> int:
    """ε of a permutation of 0..k-1; 0 for anything that is not a permutation"""
    if sorted(perm) != list(range(len(perm))):
        return 0
    return permutation_sign(perm)


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Strictly increasing tuple of axis indices below an ambient dimension"""

    entries: Tuple[int, ...]
    dim: int

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if any(b <= a for a, b in zip(entries, entries[1:])):
            raise DegreeError(
                "MultiIndex entries must be strictly increasing", {"entries": entries}
            )
        if entries and (entries[0] < 0 or entries[-1] >= self.dim):
            raise DegreeError(
                "MultiIndex entry outside ambient dimension",
                {"entries": entries, "dim": self.dim},
            )

    @classmethod
    def sorted_from(cls, entries: Iterable[int], dim: int) -> Tuple[int, "MultiIndex"]:
        """Sort arbitrary entries, returning (sign, index); sign is 0 on repeats"""
        items = list(entries)
        sign = permutation_sign(items)
        if sign == 0:
            return 0, cls((), dim)
        return sign, cls(tuple(sorted(items)), dim)

    @classmethod
    def from_mask(cls, mask: int, dim: int, offset: int = 0) -> "MultiIndex":
        entries = tuple(k for k in range(dim) if mask >> (offset + k) & 1)
        return cls(entries, dim)

    def to_mask(self, offset: int = 0) -> int:
        mask = 0
        for e in self.entries:
            mask |= 1 << (offset + e)
        return mask

    @property
    def arity(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def complement(self) -> "MultiIndex":
        return MultiIndex(tuple(k for k in range(self.dim) if k not in self.entries), self.dim)


def all_multi_indices(dim: int, arity: int) -> Iterator[MultiIndex]:
    """Every MultiIndex of given arity in lexicographic order"""
    if arity < 0 or arity > dim:
        return iter(())
    return (MultiIndex(c, dim) for c in combinations(range(dim), arity))
