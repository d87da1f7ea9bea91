# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains RunConfig and its loader. Sources, lowest precedence first:
data/defaults.yaml, a plain-text `key = value` file, PCLAB_* environment
variables and finally command line flags.
"""

import os
from typing import Dict, List, Mapping, Optional, Tuple

try:
    # Try the newer v2 pydantic and use that first
    from pydantic.v1 import BaseModel, ValidationError, validator
except:
    # Assume we are on v1 and give that a go
    from pydantic import BaseModel, ValidationError, validator

from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.utils_common.errors import ConfigError
from pc_boundary_lab.utils_common.tools_utils import LOG_FOLDER, get_lab_data

ENV_PREFIX = "PCLAB_"


class RunConfig(BaseModel):
    dim: int = 4
    grid: List[int] = [8]
    backend: str = "SPECTRAL"
    seed: int = 0
    trials: int = 100
    fit_trials: int = 3
    tol: float = 1e-9
    solver_tol: float = 1e-12
    accept_tol: float = 1e-10
    rank_tol: float = 1e-9
    cosmological: float = 0.0
    constant_coframe: bool = True
    converge: bool = False
    ghost_generators: int = 3
    antighost_generators: int = 2
    perturbation: float = 0.2
    shifts: int = 50
    directions: int = 20
    exact: bool = False
    probe: bool = False
    out: str = LOG_FOLDER
    quiet: bool = False
    verbose: int = 0

    class Config:
        extra = "forbid"

    @validator("dim")
    def dim_above_three(cls, v):
        if v < 4:
            raise ValueError("dimension must be greater than three")
        return v

    @validator("grid", pre=True)
    def split_grid(cls, v):
        if isinstance(v, str):
            v = [p for p in v.replace("x", ",").split(",") if p.strip()]
        if isinstance(v, int):
            v = [v]
        return v

    @validator("grid")
    def grid_resolves_stencil(cls, v):
        if not v or any(p < 3 for p in v):
            raise ValueError("every grid axis needs at least 3 nodes")
        return v

    @validator("backend")
    def known_backend(cls, v):
        return Backend.parse(v).value

    @validator("trials", "fit_trials", "shifts", "directions", "ghost_generators", "antighost_generators")
    def at_least_one(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @validator("tol", "solver_tol", "accept_tol", "rank_tol")
    def positive_tolerance(cls, v):
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    @validator("perturbation")
    def small_perturbation(cls, v):
        if not 0.0 <= v <= 0.2:
            raise ValueError("coframe perturbation must lie in [0, 0.2]")
        return v

    @property
    def n(self) -> int:
        return self.dim - 1

    @property
    def backend_enum(self) -> Backend:
        return Backend(self.backend)

    def grid_dims(self) -> Tuple[int, ...]:
        """One entry applies to every axis of the boundary torus"""
        if len(self.grid) == 1:
            return tuple(self.grid * self.n)
        if len(self.grid) != self.n:
            raise ConfigError("Grid needs one entry or N-1 entries", {"grid": self.grid, "N": self.dim})
        return tuple(self.grid)

    def make_grid(self, points: Optional[int] = None) -> Grid:
        if points is not None:
            return Grid.cube(self.n, points)
        return Grid(self.grid_dims())


def parse_config_file(fname: str) -> Dict[str, str]:
    """`key = value` lines; `#` starts a comment"""
    values = {}
    try:
        with open(fname, "r") as f:
            lines = f.readlines()
    except OSError as e:
        raise ConfigError(f"Cannot read config file: {e}", {"file": fname})
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError("Config line is not `key = value`", {"file": fname, "line": lineno})
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def env_overrides(environ: Mapping[str, str]) -> Dict[str, str]:
    fields = set(RunConfig.__fields__)
    out = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX) :].lower()
            if name in fields:
                out[name] = value
    return out


def load_config(
    overrides: Optional[Mapping] = None,
    config_file: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Merge every source and validate; raises ConfigError"""
    values = dict(get_lab_data("defaults.yaml") or {})
    if config_file:
        values.update(parse_config_file(config_file))
    values.update(env_overrides(os.environ if environ is None else environ))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**values)
    except ValidationError as e:
        errors = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError("Invalid run configuration", {"errors": errors})
