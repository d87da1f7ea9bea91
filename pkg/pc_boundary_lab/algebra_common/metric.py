# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the internal Minkowski metric.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pc_boundary_lab.utils_common.errors import ConfigError


@dataclass(frozen=True)
class InternalMetric:
    """Diagonal metric of signature (N-1, 1); the last internal axis is timelike"""

    components: Tuple[int, ...]

    @classmethod
    def lorentzian(cls, dim: int) -> "InternalMetric":
        if dim < 2:
            raise ConfigError("Internal dimension must be at least 2", {"dim": dim})
        return cls(tuple([1] * (dim - 1) + [-1]))

    @classmethod
    def euclidean(cls, dim: int) -> "InternalMetric":
        return cls(tuple([1] * dim))

    def __post_init__(self):
        if any(c not in (1, -1) for c in self.components):
            raise ConfigError("Metric components must be +1 or -1", {"eta": self.components})

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def signature(self) -> Tuple[int, int]:
        plus = sum(1 for c in self.components if c > 0)
        return plus, self.dim - plus

    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.components, dtype=float))

    def det(self) -> int:
        return int(np.prod(self.components))

    def __getitem__(self, a: int) -> int:
        return self.components[a]

    def inner(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Pointwise η(u, v) for arrays with the internal axis first"""
        eta = np.array(self.components, dtype=float).reshape((-1,) + (1,) * (u.ndim - 1))
        return np.sum(eta * u * v, axis=0)
