# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the BFV action, the cohomological vector field, the master equation
pieces, the cancellation ledger and the primed variables
"""
import numpy as np
import pytest

from pc_boundary_lab.algebra_common.fibre import wedge
from pc_boundary_lab.bfv_common.action import action_gradient_rows, cohomological_vf, eval_bfv_action, ghost_number_audit
from pc_boundary_lab.bfv_common.ledger import cancellation_ledger, ledger_groups, term_ids
from pc_boundary_lab.bfv_common.master import (
    BRACKET_PIECE,
    EXACT_PIECES,
    LEDGER_PIECE,
    RELABEL_ROW,
    TOTAL,
    master_equation,
    relabelling_check,
)
from pc_boundary_lab.bfv_common.primed import change_variables_primed, primed_dimension
from pc_boundary_lab.bfv_common.state import BFVState, bfv_layout, random_bfv_state, random_relabelling
from pc_boundary_lab.canonical_common.constraints import Multipliers, eval_constraints, multiplier_layout
from pc_boundary_lab.fields_common.calculus import bracket, covariant_lie, d_omega
from pc_boundary_lab.fields_common.field import VectorField
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.fields_common.random_fields import random_geometry
from pc_boundary_lab.utils_common.errors import DegreeError


def _state(seed: int, points: int = 4, constant: bool = True, dim: int = 4, ghosts: int = 2, omega0_scale: float = 0.0):
    layout = bfv_layout(dim - 1, dim, ghosts=ghosts, antighosts=ghosts)
    grid = Grid.cube(dim - 1, points)
    rng = np.random.default_rng(seed)
    # constant background, fields resolved on the grid when not constant
    geometry = random_geometry(layout, grid, Backend.SPECTRAL, rng, constant=True, omega0_scale=omega0_scale)
    return random_bfv_state(geometry, rng, constant=constant, bandwidth=1)


def test_state_degrees_checked():
    state = _state(0)
    with pytest.raises(DegreeError):
        BFVState(state.geometry, state.omega, state.ghosts, state.lamdag, state.lamdag, state.xidag)
    with pytest.raises(DegreeError):
        BFVState(state.geometry, state.omega, state.ghosts, state.cdag, state.lamdag, state.xidag[:2])
    layout = multiplier_layout(3, 4, generators=1)
    geometry = random_geometry(layout, Grid.cube(3, 4), Backend.SPECTRAL, np.random.default_rng(1))
    with pytest.raises(DegreeError):
        random_bfv_state(geometry, np.random.default_rng(1))


def test_action_without_antighosts():
    state = _state(1)
    bare = state.ghost_free()
    action = eval_bfv_action(bare)
    assert action.S1.norm() == 0.0
    constraints = eval_constraints(state.geometry, state.omega, state.ghosts).total()
    assert (action.S0 - constraints).norm() <= 1e-12 * max(constraints.norm(), 1.0)


def test_action_ghost_number():
    state = _state(2)
    action = eval_bfv_action(state)
    assert action.total.norm() > 0.0
    assert ghost_number_audit(action.total.terms, state.layout, 1)
    assert action.quadrature_mismatch() <= 1e-12
    assert not ghost_number_audit(action.total.terms, state.layout, 2, strict=False)
    with pytest.raises(DegreeError):
        ghost_number_audit(action.total.terms, state.layout, 2)


def test_q_ghost_numbers():
    q = cohomological_vf(_state(3))
    numbers = q.ghost_numbers()
    assert numbers["c"] == 2
    assert numbers["lam"] == 2
    assert numbers["xi"] == 2
    assert numbers["q0_e"] == 1
    assert q.preimage_residual <= 1e-8


def test_master_equation_exact_pieces():
    state = _state(4, points=8, constant=False)
    report = master_equation(state, seed=4)
    assert report.ghost_number_ok
    rows = {row.piece: row for row in report.pieces}
    for piece in EXACT_PIECES:
        assert rows[piece].passed
        assert rows[piece].tol == 1e-12
    for piece in (BRACKET_PIECE, LEDGER_PIECE, TOTAL):
        assert rows[piece].passed, piece
    assert rows[TOTAL].residual <= 1e-9
    assert report.passed


def test_master_equation_n5():
    state = _state(20, dim=5, ghosts=1)
    report = master_equation(state, seed=20)
    assert report.N == 5
    assert report.ghost_number_ok
    assert report.passed, [(row.piece, row.residual) for row in report.pieces if not row.passed]


def test_master_equation_shifted_background():
    state = _state(21, omega0_scale=0.3)
    assert state.geometry.omega0.norm() > 0.0
    perm = random_relabelling(state.layout, np.random.default_rng(21))
    report = master_equation(state, seed=21, relabel=perm)
    rows = {row.piece: row for row in report.pieces}
    assert rows[RELABEL_ROW].passed
    assert report.passed


def test_relabelling_invariance():
    state = _state(9)
    layout = state.layout
    perm = list(range(layout.n_ghost))
    for label in dict.fromkeys(layout.ghost_labels):
        slots = layout.generators(label)
        for k, image in zip(slots, reversed(slots)):
            perm[k] = image
    assert perm != list(range(layout.n_ghost))
    check = relabelling_check(state, perm)
    assert check.scale > 0.0
    assert check.passed, check.deviation
    sampled = random_relabelling(layout, np.random.default_rng(9))
    assert sorted(sampled) == list(range(layout.n_ghost))
    assert all(layout.ghost_labels[sampled[k]] == layout.ghost_labels[k] for k in range(layout.n_ghost))


def test_q0_matches_hamiltonian_fields():
    state = _state(10, omega0_scale=0.3).ghost_free()
    geometry, eta = state.geometry, state.geometry.eta
    q = cohomological_vf(state)
    expected = (
        bracket(state.c, geometry.e, eta)
        - covariant_lie(state.xi, geometry.omega0, geometry.e, eta)
        + d_omega(state.omega, wedge(state.lam, geometry.e_n), eta)
        + wedge(state.lam, state.sigma).scale(state.N - 3)
    )
    assert q.q0_e.norm() > 1e-3
    assert (q.q0_e - expected).norm() <= 1e-12 * q.q0_e.norm()
    assert q.q1_E.norm() <= 1e-14
    assert q.q1_D.norm() <= 1e-14


def test_action_gradients():
    state = _state(11)
    rows = action_gradient_rows(state, np.random.default_rng(11), directions=2, constant=True)
    assert len(rows) == 2
    assert all(row.functional == "S" for row in rows)
    assert all(row.passed for row in rows), [row.rel_error for row in rows]


def test_ledger_groups_cover_terms():
    groups = ledger_groups()
    assert len(groups) == 20
    listed = sorted(t for g in groups for t in g["terms"])
    assert listed == sorted(term_ids())
    assert len(term_ids()) == 26 + 46


def test_ledger_constant_fields():
    state = _state(5)
    report = cancellation_ledger(state, seed=5)
    exact = [g for g in report.groups if g.exact]
    assert {g.group_id for g in exact} == {"B1", "B16", "B17", "B18", "B19"}
    assert all(g.passed for g in exact)
    assert len(report.terms) == len(term_ids())
    assert all(g.passed for g in report.groups), [g.group_id for g in report.groups if not g.passed]
    assert report.total <= 1e-9


def test_ledger_varying_fields():
    state = _state(8, points=8, constant=False)
    report = cancellation_ledger(state, seed=8)
    for group in report.groups:
        assert group.group_sum <= group.tol, group.group_id
        assert group.group_sum <= 1e-9
    assert report.total <= 1e-9
    assert report.passed


def test_primed_variables():
    state = _state(6)
    zero_xi = VectorField(state.layout, {}, grid=state.geometry.grid, backend=state.geometry.backend)
    state = BFVState(
        state.geometry,
        state.omega,
        Multipliers(state.c, zero_xi, state.lam),
        state.cdag,
        state.lamdag,
        state.xidag,
    )
    report = change_variables_primed(state, seed=6)
    assert report.action_residual <= 1e-10
    assert report.reconstruction_n <= 1e-10
    assert report.reconstruction_a <= 1e-10
    assert report.pairing_rank == report.pairing_dim == primed_dimension(4) == 44


def test_primed_reconstruction_nonzero_xi():
    report = change_variables_primed(_state(7))
    assert report.reconstruction_n <= 1e-10
    assert report.reconstruction_a <= 1e-10


def main():
    test_state_degrees_checked()
    test_action_without_antighosts()
    test_action_ghost_number()
    test_q_ghost_numbers()
    test_master_equation_exact_pieces()
    test_master_equation_n5()
    test_master_equation_shifted_background()
    test_relabelling_invariance()
    test_q0_matches_hamiltonian_fields()
    test_action_gradients()
    test_ledger_groups_cover_terms()
    test_ledger_constant_fields()
    test_ledger_varying_fields()
    test_primed_variables()
    test_primed_reconstruction_nonzero_xi()
    print("bfv tests passed")


if __name__ == "__main__":
    main()
