# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the pydantic report models written by the verification suites.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict, List, Optional, Union

try:
    # Try the newer v2 pydantic and use that first
    from pydantic.v1 import BaseModel
except:
    # Assume we are on v1 and give that a go
    from pydantic import BaseModel


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "pass" if value else "FAIL"
    if isinstance(value, float):
        return f"{value:.3e}"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_fmt(v)}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return "" if value is None else str(value)


class ReportModel(BaseModel):
    """Base class for reports: deterministic JSON and markdown rendering"""

    def save_as_json(self, fname: Union[str, Path]):
        dir_path = os.path.dirname(os.path.realpath(fname))
        Path(dir_path).mkdir(parents=True, exist_ok=True)
        with open(fname, "w") as f:
            raw_json = self.json(exclude_none=False)
            reloaded_json = json.loads(raw_json)
            json.dump(reloaded_json, f, indent=4, sort_keys=True)

    def to_json(self) -> str:
        return json.dumps(json.loads(self.json(exclude_none=False)), indent=4, sort_keys=True)

    def summary(self) -> Dict:
        return {k: v for k, v in self.dict().items() if not isinstance(v, list)}

    def to_markdown(self) -> str:
        lines = []
        for key, value in self.summary().items():
            lines.append(f"- **{key}**: {_fmt(value)}")
        for key, value in self.dict().items():
            if isinstance(value, list) and value and isinstance(value[0], dict):
                lines.append("")
                lines.append(f"### {key}")
                lines.append("")
                lines.extend(markdown_table(value))
        return "\n".join(lines) + "\n"

    def save_as_markdown(self, fname: Union[str, Path], title: str = ""):
        dir_path = os.path.dirname(os.path.realpath(fname))
        Path(dir_path).mkdir(parents=True, exist_ok=True)
        with open(fname, "w") as f:
            if title:
                f.write(f"# {title}\n\n")
            f.write(self.to_markdown())


def markdown_table(rows: List[Dict]) -> List[str]:
    headers = list(rows[0].keys())
    out = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    for row in rows:
        out.append("| " + " | ".join(_fmt(row.get(h)) for h in headers) + " |")
    return out


class LemmaRow(ReportModel):
    """One rank or kernel count against its closed form"""

    lemma_id: str
    anchor: str
    N: int
    trial_seed: int
    expected: int
    observed: int
    spectral_gap: Optional[float]
    passed: bool


class LemmaReport(ReportModel):
    N: int
    trials: int
    seed: int
    resampled: int = 0
    exact: bool = False
    passed: bool = True
    rows: List[LemmaRow] = []
    probes: List[LemmaRow] = []


class DecompositionReport(ReportModel):
    N: int
    grid: List[int]
    backend: str
    kernel_dim: int
    max_residual: float
    mean_residual: float
    structural_residual: float
    invariant_norm: float
    v_norm: float
    sigma_norm: float
    gauge_deviation: Optional[float] = None
    gauge_shifts: int = 0
    tol: float
    passed: bool


class RelationRow(ReportModel):
    """One first-class bracket relation"""

    relation_id: str
    anchor: str
    N: int
    backend: str
    grid: List[int]
    residual: float
    scale: float
    displayed: Dict[str, float]
    displayed_residual: float
    fitted: Dict[str, float]
    passed: bool


class BracketReport(ReportModel):
    N: int
    seed: int
    cosmological: float
    trials: int
    passed: bool = True
    rows: List[RelationRow] = []


class GradientRow(ReportModel):
    functional: str
    direction: int
    derivative: float
    pairing: float
    rel_error: float
    passed: bool


class GradientReport(ReportModel):
    N: int
    seed: int
    tol: float
    passed: bool = True
    rows: List[GradientRow] = []


class PieceRow(ReportModel):
    """One piece of the master equation"""

    piece: str
    residual: float
    scale: float
    tol: float
    passed: bool


class MasterReport(ReportModel):
    N: int
    seed: int
    grid: List[int]
    backend: str
    generators: int
    ghost_number_ok: bool
    passed: bool = True
    pieces: List[PieceRow] = []


class LedgerRow(ReportModel):
    term_id: str
    group_id: str
    value_norm: float


class LedgerGroup(ReportModel):
    group_id: str
    term_ids: List[str]
    group_sum: float
    scale: float
    tol: float
    exact: bool
    passed: bool
    comment: str = ""


class LedgerReport(ReportModel):
    N: int
    seed: int
    passed: bool = True
    total: float = 0.0
    groups: List[LedgerGroup] = []
    terms: List[LedgerRow] = []


class PrimedReport(ReportModel):
    N: int
    seed: int
    action_residual: float
    action_scale: float
    reconstruction_n: float
    reconstruction_a: float
    pairing_rank: int
    pairing_dim: int
    tol: float
    passed: bool


class DofAudit(ReportModel):
    """Local component counts per node"""

    N: int
    coframe: int
    connection: int
    kernel: int
    connection_effective: int
    constraints: int
    physical: int
    passed: bool


class ConvergenceRow(ReportModel):
    points: int
    residual: float
    ratio: Optional[float]


class ConvergenceReport(ReportModel):
    quantity: str
    order: Optional[float]
    passed: bool
    rows: List[ConvergenceRow] = []
