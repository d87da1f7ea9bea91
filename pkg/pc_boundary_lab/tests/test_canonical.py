# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the boundary constraints, their Hamiltonian vector fields and the
first-class bracket relations
"""
import numpy as np
import pytest

from pc_boundary_lab.canonical_common.brackets import (
    TangentPair,
    gauge_invariance_check,
    poisson_bracket,
    random_configuration,
    verify_bracket_suite,
    verify_constraint_gradients,
)
from pc_boundary_lab.canonical_common.constraints import (
    MULTIPLIER_LABELS,
    Multipliers,
    eval_constraints,
    multiplier_layout,
    random_multipliers,
)
from pc_boundary_lab.cli import ladder_geometry
from pc_boundary_lab.fields_common.field import zero_field
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.fields_common.random_fields import identity_geometry, random_form, random_geometry
from pc_boundary_lab.utils_common.config import load_config
from pc_boundary_lab.utils_common.errors import DegreeError, OffSliceError


def _geometry(seed: int, constant: bool, points: int = 4, dim: int = 4, cosmological: float = 0.0):
    layout = multiplier_layout(dim - 1, dim, generators=2)
    grid = Grid.cube(dim - 1, points)
    rng = np.random.default_rng(seed)
    return random_geometry(layout, grid, Backend.SPECTRAL, rng, constant=constant, cosmological=cosmological), rng


def test_multiplier_layout():
    layout = multiplier_layout(3, 4)
    assert layout.n_ghost == 3 * len(MULTIPLIER_LABELS)
    assert all(len(layout.generators(label)) == 3 for label in MULTIPLIER_LABELS)


def test_multiplier_degrees_checked():
    layout = multiplier_layout(3, 4, generators=1)
    grid = Grid.cube(3, 4)
    rng = np.random.default_rng(0)
    m = random_multipliers(layout, grid, Backend.SPECTRAL, rng, constant=True)
    with pytest.raises(DegreeError):
        Multipliers(random_form(layout, grid, Backend.SPECTRAL, 0, 1, rng, ghost="c"), m.xi, m.lam)
    # no ghost generator, so c is even
    with pytest.raises(DegreeError):
        Multipliers(random_form(layout, grid, Backend.SPECTRAL, 0, 2, rng), m.xi, m.lam)


def test_flat_constraints_vanish():
    layout = multiplier_layout(3, 4, generators=1)
    grid = Grid.cube(3, 4)
    geometry = identity_geometry(layout, grid)
    m = random_multipliers(layout, grid, Backend.SPECTRAL, np.random.default_rng(1), constant=True)
    values = eval_constraints(geometry, zero_field(layout, grid), m)
    assert values.norm() == 0.0


def test_zero_multipliers_vanish():
    geometry, rng = _geometry(2, constant=False)
    omega, _ = random_configuration(geometry, rng)
    zero = Multipliers.zero(geometry.layout, geometry.grid, geometry.backend)
    assert eval_constraints(geometry, omega, zero).norm() == 0.0


def test_off_slice_rejected():
    geometry, rng = _geometry(3, constant=True)
    omega_tilde = random_form(geometry.layout, geometry.grid, Backend.SPECTRAL, 1, 2, rng)
    m = random_multipliers(geometry.layout, geometry.grid, Backend.SPECTRAL, rng, constant=True)
    with pytest.raises(OffSliceError):
        eval_constraints(geometry, omega_tilde, m)


def test_pairing_antisymmetric_on_even_vectors():
    geometry, rng = _geometry(4, constant=True)
    layout, grid = geometry.layout, geometry.grid

    def tangent():
        e_leg = random_form(layout, grid, Backend.SPECTRAL, 1, 1, rng)
        omega_leg = random_form(layout, grid, Backend.SPECTRAL, 1, 2, rng)
        return TangentPair.from_legs(geometry, e_leg, omega_leg, 0)

    x, y = tangent(), tangent()
    xy = poisson_bracket(x, y)
    assert abs(xy.body) > 1e-6
    assert (xy + poisson_bracket(y, x)).norm() <= 1e-14 * abs(xy.body)
    assert poisson_bracket(x, x).norm() == 0.0


def test_bracket_suite_constant_fields():
    geometry, rng = _geometry(5, constant=True)
    report = verify_bracket_suite(geometry, rng, seed=5, trials=2, constant_fields=True)
    assert report.passed
    assert [row.relation_id for row in report.rows] == ["LL", "LP", "LH", "PP", "PH", "HH"]
    with pytest.raises(DegreeError):
        verify_bracket_suite(geometry, rng, trials=0)


def test_bracket_suite_varying_fields():
    # band-1 ω and multipliers over a constant coframe, resolved by 8 points per axis
    geometry, rng = _geometry(15, constant=True, points=8)
    report = verify_bracket_suite(geometry, rng, seed=15, trials=1)
    assert report.passed
    for row in report.rows:
        assert row.displayed_residual <= 1e-9, row.relation_id


def test_bracket_suite_n5_and_cosmological():
    geometry, rng = _geometry(16, constant=True, dim=5)
    report = verify_bracket_suite(geometry, rng, seed=16, trials=2, constant_fields=True)
    assert report.passed
    assert report.N == 5
    geometry, rng = _geometry(17, constant=True, cosmological=1.0)
    report = verify_bracket_suite(geometry, rng, seed=17, trials=2, constant_fields=True)
    assert report.passed
    assert report.cosmological == 1.0
    for row in report.rows:
        assert row.displayed_residual <= 1e-9, row.relation_id


def test_bracket_residual_refines_at_second_order():
    cfg = load_config(environ={})
    layout = multiplier_layout(3, 4, generators=1)
    residuals = []
    for points in (8, 16):
        rng = np.random.default_rng(18)
        geometry = ladder_geometry(cfg, layout, rng, points)
        rows = verify_bracket_suite(geometry, rng, seed=18, trials=1, constant_fields=True).rows
        residuals.append(max(r.displayed_residual * r.scale for r in rows))
    assert residuals[1] > 0.0
    assert 3.5 <= residuals[0] / residuals[1] <= 4.5


def test_constraint_gradients_constant_fields():
    geometry, rng = _geometry(6, constant=True)
    omega, m = random_configuration(geometry, rng, constant=True)
    report = verify_constraint_gradients(geometry, omega, m, rng, directions=2, constant=True)
    assert report.passed
    assert len(report.rows) == 2 * 3


def test_constraint_gradients_vanishing_multipliers():
    geometry, rng = _geometry(19, constant=True)
    omega, _ = random_configuration(geometry, rng, constant=True)
    zero = Multipliers.zero(geometry.layout, geometry.grid, geometry.backend)
    report = verify_constraint_gradients(geometry, omega, zero, rng, directions=2, constant=True)
    assert report.passed
    assert all(row.rel_error == 0.0 for row in report.rows)


def test_gauge_invariance():
    geometry, rng = _geometry(7, constant=False)
    omega_tilde = random_form(geometry.layout, geometry.grid, Backend.SPECTRAL, 1, 2, rng, constant=False)
    m = random_multipliers(geometry.layout, geometry.grid, Backend.SPECTRAL, rng)
    check = gauge_invariance_check(geometry, omega_tilde, m, rng, shifts=3)
    assert check.passed
    assert check.shifts == 3


def main():
    test_multiplier_layout()
    test_multiplier_degrees_checked()
    test_flat_constraints_vanish()
    test_zero_multipliers_vanish()
    test_off_slice_rejected()
    test_pairing_antisymmetric_on_even_vectors()
    test_bracket_suite_constant_fields()
    test_bracket_suite_varying_fields()
    test_bracket_suite_n5_and_cosmological()
    test_bracket_residual_refines_at_second_order()
    test_constraint_gradients_constant_fields()
    test_constraint_gradients_vanishing_multipliers()
    test_gauge_invariance()
    print("canonical tests passed")


if __name__ == "__main__":
    main()
