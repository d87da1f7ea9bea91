# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the field snapshot format: a YAML header, a `---` separator and
one record per stored monomial. Floats are written with repr() so a save/load
cycle is bit-exact.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from yaml import safe_dump, safe_load

from pc_boundary_lab.algebra_common.grassmann import Layout
from pc_boundary_lab.fields_common.field import Field, VectorField
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.utils_common.errors import SnapshotError

SEPARATOR = "---"
FORMAT_VERSION = 1


def _header(f: Union[Field, VectorField], name: str) -> Dict:
    layout = f.layout
    header = {
        "format": FORMAT_VERSION,
        "name": name,
        "kind": "vector" if isinstance(f, VectorField) else "form",
        "N": layout.internal_dim,
        "base_dim": layout.base_dim,
        "grid": list(f.grid.dims),
        "lengths": [float(x) for x in f.grid.lengths],
        "backend": f.backend.value,
        "ghost_labels": list(layout.ghost_labels),
        "ghost_numbers": list(layout.ghost_numbers),
        "parity": f.parity(),
    }
    if isinstance(f, Field):
        header["degrees"] = [list(d) for d in sorted(f.degrees())]
        header["ghost_number"] = f.ghost_number
    return header


def _values_line(value: np.ndarray) -> str:
    if value.ndim == 0:
        return f"const {float(value)!r}"
    return "nodal " + " ".join(repr(float(x)) for x in np.ravel(value, order="C"))


def dumps(f: Union[Field, VectorField], name: str = "field") -> str:
    lines = [safe_dump(_header(f, name), sort_keys=True).rstrip(), SEPARATOR]
    if isinstance(f, VectorField):
        for (ghost, mu), value in sorted(f.terms.items()):
            lines.append(f"{ghost} {mu} {_values_line(value)}")
    else:
        for mask, value in sorted(f.terms.items()):
            lines.append(f"{mask} {_values_line(value)}")
    return "\n".join(lines) + "\n"


def save(f: Union[Field, VectorField], fname: str, name: str = "field") -> str:
    dir_path = os.path.dirname(os.path.realpath(fname))
    Path(dir_path).mkdir(parents=True, exist_ok=True)
    with open(fname, "w") as out:
        out.write(dumps(f, name))
    return fname


def _parse_values(tokens: List[str], dims) -> np.ndarray:
    if not tokens:
        raise SnapshotError("Empty record")
    kind, rest = tokens[0], tokens[1:]
    if kind == "const":
        if len(rest) != 1:
            raise SnapshotError("Constant record needs one value")
        return np.asarray(float(rest[0]))
    if kind == "nodal":
        if len(rest) != int(np.prod(dims)):
            raise SnapshotError("Nodal record has the wrong length", {"expected": int(np.prod(dims)), "got": len(rest)})
        return np.array([float(x) for x in rest]).reshape(dims)
    raise SnapshotError("Unknown record kind", {"kind": kind})


def loads(text: str) -> Union[Field, VectorField]:
    head, sep, body = text.partition("\n" + SEPARATOR + "\n")
    if not sep:
        raise SnapshotError("Missing header separator")
    try:
        header = safe_load(head)
    except Exception as e:
        raise SnapshotError(f"Header is not valid YAML: {e}")
    try:
        grid = Grid(tuple(header["grid"]), tuple(header["lengths"]))
        layout = Layout(
            int(header["base_dim"]),
            int(header["N"]),
            tuple(header["ghost_labels"]),
            tuple(header["ghost_numbers"]),
        )
        backend = Backend.parse(header["backend"])
        kind = header["kind"]
    except (KeyError, TypeError) as e:
        raise SnapshotError(f"Incomplete header: {e}")
    terms = {}
    for lineno, line in enumerate(body.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        try:
            if kind == "vector":
                key = (int(tokens[0]), int(tokens[1]))
                terms[key] = _parse_values(tokens[2:], grid.dims)
            else:
                terms[int(tokens[0])] = _parse_values(tokens[1:], grid.dims)
        except ValueError as e:
            raise SnapshotError(f"Bad record on line {lineno}: {e}")
    if kind == "vector":
        return VectorField(layout, terms, grid=grid, backend=backend)
    return Field(layout, terms, grid=grid, backend=backend)


def load(fname: str) -> Union[Field, VectorField]:
    with open(fname, "r") as f:
        return loads(f.read())
