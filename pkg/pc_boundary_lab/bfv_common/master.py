# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0

"""
This file contains the master equation check. {S, S} is split by which fields the
two derivatives hit (f: e and ω, g: ghosts against antighosts):

    {S,S} = {S0,S0}_f + 2{S0,S1}_f + 2{S0,S1}_g + {S1,S1}_f + {S1,S1}_g

and each of the pieces below must vanish on its own:

    {S0,S0}_g                       S0 has no antighosts
    {S1,S1}_f = ϖ(Q1, Q1)           every monomial carries λλ
    {S0,S0}_f + 2{S0,S1}_g          first class brackets of the constraints
    2{S0,S1}_f + {S1,S1}_g          the term ledger
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from pc_boundary_lab.algebra_common.grassmann import GrassmannNumber
from pc_boundary_lab.bfv_common.action import QComponents, cohomological_vf, eval_bfv_action, ghost_number_audit
from pc_boundary_lab.bfv_common.ledger import ledger_total, ledger_values
from pc_boundary_lab.bfv_common.state import BFVState
from pc_boundary_lab.canonical_common.brackets import pairing_scale, poisson_bracket
from pc_boundary_lab.canonical_common.constraints import H_of, L_of, P_of
from pc_boundary_lab.utils_common.reports import MasterReport, PieceRow
from pc_boundary_lab.utils_common.tools_utils import relative

logger = logging.getLogger(__name__)

GHOST_PIECE = "S0S0_g"
LAMBDA_PIECE = "S1S1_f"
BRACKET_PIECE = "S0S0_f + 2 S0S1_g"
LEDGER_PIECE = "2 S0S1_f + S1S1_g"
TOTAL = "total"
RELABEL_ROW = "relabelled generators"
EXACT_PIECES = (GHOST_PIECE, LAMBDA_PIECE)


@dataclass
class MasterPieces:
    values: Dict[str, GrassmannNumber] = field(default_factory=dict)
    scales: Dict[str, float] = field(default_factory=dict)

    def residual(self, piece: str) -> float:
        return relative(self.values[piece].norm(), self.scales[piece])


def master_pieces(
    state: BFVState,
    q: Optional[QComponents] = None,
    ledger: Optional[Dict[str, GrassmannNumber]] = None,
    quiet: bool = True,
) -> MasterPieces:
    geometry, omega = state.geometry, state.omega
    q = q or cohomological_vf(state)
    pieces = MasterPieces()
    zero = GrassmannNumber({}, state.layout.n_ghost)
    pieces.values[GHOST_PIECE] = zero
    pieces.scales[GHOST_PIECE] = 0.0

    q1 = q.q1()
    pieces.values[LAMBDA_PIECE] = poisson_bracket(q1, q1)
    pieces.scales[LAMBDA_PIECE] = pairing_scale(q1, q1)

    q0 = q.q0()
    flat = poisson_bracket(q0, q0)
    ghost_terms = [L_of(geometry, omega, q.c), P_of(geometry, omega, q.xi), H_of(geometry, omega, q.lam)]
    bracket_piece = flat
    for term in ghost_terms:
        bracket_piece = bracket_piece + term * 2.0
    pieces.values[BRACKET_PIECE] = bracket_piece
    pieces.scales[BRACKET_PIECE] = max([pairing_scale(q0, q0), flat.norm()] + [2.0 * t.norm() for t in ghost_terms])

    ledger = ledger if ledger is not None else ledger_values(state, quiet)
    pieces.values[LEDGER_PIECE] = ledger_total(ledger) * 2.0
    pieces.scales[LEDGER_PIECE] = 2.0 * max((v.norm() for v in ledger.values()), default=0.0)

    total = zero
    for name in (GHOST_PIECE, LAMBDA_PIECE, BRACKET_PIECE, LEDGER_PIECE):
        total = total + pieces.values[name]
    pieces.values[TOTAL] = total
    pieces.scales[TOTAL] = max(pieces.scales.values())
    return pieces


RELABEL_TOL = 1e-12


@dataclass
class RelabelCheck:
    perm: List[int]
    deviation: float
    scale: float
    passed: bool


def relabelling_check(
    state: BFVState,
    perm: Sequence[int],
    tol: float = RELABEL_TOL,
    pieces: Optional[MasterPieces] = None,
    ledger: Optional[Dict[str, GrassmannNumber]] = None,
    quiet: bool = True,
) -> RelabelCheck:
    """
    S, every ledger term and every piece of {S,S} computed on the relabelled state
    against the relabelled values of the original state.
    """
    ledger = ledger if ledger is not None else ledger_values(state, quiet)
    pieces = pieces if pieces is not None else master_pieces(state, ledger=ledger, quiet=quiet)
    moved = state.relabel(perm)
    moved_ledger = ledger_values(moved, quiet)
    moved_pieces = master_pieces(moved, ledger=moved_ledger, quiet=quiet)
    pairs = [(eval_bfv_action(state, audit=False).total, eval_bfv_action(moved, audit=False).total)]
    pairs += [(ledger[tid], moved_ledger[tid]) for tid in ledger]
    pairs += [(pieces.values[name], moved_pieces.values[name]) for name in pieces.values]
    scale = max(before.norm() for before, _ in pairs)
    deviation = relative(max((before.relabel(perm) - after).norm() for before, after in pairs), scale)
    logger.info(f"relabelling {list(perm)}: deviation {deviation:.3e}")
    return RelabelCheck(list(perm), deviation, scale, deviation <= tol)


def master_equation(
    state: BFVState,
    seed: int = 0,
    tol: float = 1e-9,
    exact_tol: float = 1e-12,
    q: Optional[QComponents] = None,
    ledger: Optional[Dict[str, GrassmannNumber]] = None,
    quiet: bool = True,
    relabel: Optional[Sequence[int]] = None,
) -> MasterReport:
    """
    Residual of every piece of {S,S} plus the ghost-number audits of S and {S,S}.
    With `relabel`, also the deviation of everything under that permutation of
    the ghost generators.
    """
    layout = state.layout
    action = eval_bfv_action(state, audit=False)
    ghost_ok = ghost_number_audit(action.total.terms, layout, 1, "S", strict=False)
    ledger = ledger if ledger is not None else ledger_values(state, quiet)
    pieces = master_pieces(state, q, ledger, quiet)
    ghost_ok = ghost_number_audit(pieces.values[TOTAL].terms, layout, 2, "{S,S}", strict=False) and ghost_ok
    rows = []
    for name, value in pieces.values.items():
        limit = exact_tol if name in EXACT_PIECES else tol
        residual = pieces.residual(name)
        logger.info(f"{name}: residual {residual:.3e} (scale {pieces.scales[name]:.3e})")
        rows.append(PieceRow(piece=name, residual=residual, scale=pieces.scales[name], tol=limit, passed=residual <= limit))
    if relabel is not None:
        check = relabelling_check(state, relabel, exact_tol, pieces, ledger, quiet)
        rows.append(PieceRow(piece=RELABEL_ROW, residual=check.deviation, scale=check.scale, tol=exact_tol, passed=check.passed))
    return MasterReport(
        N=state.N,
        seed=seed,
        grid=list(state.geometry.grid.dims),
        backend=state.geometry.backend.value,
        generators=layout.n_ghost,
        ghost_number_ok=ghost_ok,
        passed=ghost_ok and all(r.passed for r in rows),
        pieces=rows,
    )
