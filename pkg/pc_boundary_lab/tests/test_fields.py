# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for fields on the boundary torus: derivative backends, d, d_ω, the odd
Lie derivative identity, integration and snapshots
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from pc_boundary_lab.algebra_common.fibre import top_form
from pc_boundary_lab.algebra_common.grassmann import build_layout
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.fields_common import snapshot
from pc_boundary_lab.fields_common.calculus import covariant_lie, curvature, d, d_omega, integrate, iota, lie_bracket
from pc_boundary_lab.fields_common.field import Field, zero_field
from pc_boundary_lab.fields_common.grid import Backend, Grid, derivative
from pc_boundary_lab.fields_common.random_fields import identity_geometry, random_form, random_geometry, random_vector
from pc_boundary_lab.utils_common.errors import ConfigError, DegreeError, SnapshotError
from pc_boundary_lab.utils_common.tools_utils import convergence_ladder


def test_grid_rejects_coarse_axes():
    with pytest.raises(ConfigError):
        Grid((2, 4, 4))
    grid = Grid.cube(3, 4)
    assert grid.nodes == 64
    assert grid.refine().dims == (8, 8, 8)
    assert Backend.parse("fd") == Backend.FD
    with pytest.raises(ConfigError):
        Backend.parse("chebyshev")


def test_spectral_derivative_exact():
    grid = Grid((8,))
    (x,) = grid.coordinates()
    values = np.sin(2 * np.pi * 3 * x)
    expected = 2 * np.pi * 3 * np.cos(2 * np.pi * 3 * x)
    assert_allclose(derivative(values, grid, 0, Backend.SPECTRAL), expected, atol=1e-11)


def test_fd_derivative_second_order():
    def error(points: int) -> float:
        grid = Grid((points,))
        (x,) = grid.coordinates()
        approx = derivative(np.sin(2 * np.pi * x), grid, 0, Backend.FD)
        return float(np.max(np.abs(approx - 2 * np.pi * np.cos(2 * np.pi * x))))

    report = convergence_ladder("fd sine", error, (16, 32, 64))
    assert report.passed
    assert abs(report.order - 2.0) < 0.1


def test_fd_summation_by_parts():
    grid = Grid.cube(3, 6)
    rng = np.random.default_rng(12)
    f = rng.uniform(-1, 1, grid.dims)
    g = rng.uniform(-1, 1, grid.dims)
    for axis in range(3):
        lhs = np.sum(f * derivative(g, grid, axis, Backend.FD))
        rhs = -np.sum(derivative(f, grid, axis, Backend.FD) * g)
        assert abs(lhs - rhs) <= 1e-12 * np.sum(np.abs(f)) * np.sum(np.abs(g))
    # Leibniz only holds to second order
    (x,) = Grid((8,)).coordinates()
    s, c = np.sin(2 * np.pi * x), np.cos(2 * np.pi * x)
    grid = Grid((8,))
    leibniz = derivative(s * c, grid, 0, Backend.FD) - derivative(s, grid, 0, Backend.FD) * c - s * derivative(c, grid, 0, Backend.FD)
    assert np.max(np.abs(leibniz)) > 1e-2


def test_spectral_product_aliasing():
    def leibniz_defect(points: int) -> float:
        grid = Grid((points,))
        (x,) = grid.coordinates()
        s, c = np.sin(2 * np.pi * x), np.cos(2 * np.pi * x)
        lhs = derivative(s * c, grid, 0, Backend.SPECTRAL)
        rhs = derivative(s, grid, 0, Backend.SPECTRAL) * c + s * derivative(c, grid, 0, Backend.SPECTRAL)
        return float(np.max(np.abs(lhs - rhs)))

    # sin·cos has band 2: resolved on 8 nodes, Nyquist on 4
    assert leibniz_defect(8) <= 1e-11
    assert leibniz_defect(4) > 1.0


def test_d_squared_vanishes():
    layout = build_layout(3, 4)
    grid = Grid.cube(3, 6)
    rng = np.random.default_rng(1)
    f = random_form(layout, grid, Backend.SPECTRAL, 0, 1, rng, constant=False, bandwidth=2)
    one_form = random_form(layout, grid, Backend.SPECTRAL, 1, 0, rng, constant=False, bandwidth=2)
    assert d(d(f)).norm() <= 1e-10 * max(f.norm(), 1.0)
    assert d(d(one_form)).norm() <= 1e-10 * max(one_form.norm(), 1.0)
    with pytest.raises(DegreeError):
        d(random_form(layout, grid, Backend.SPECTRAL, 3, 0, rng))


def test_bianchi_constant_connection():
    layout = build_layout(3, 4)
    grid = Grid.cube(3, 4)
    eta = InternalMetric.lorentzian(4)
    omega = random_form(layout, grid, Backend.SPECTRAL, 1, 2, np.random.default_rng(2), constant=True)
    F = curvature(omega, eta)
    assert F.norm() > 1e-3
    assert d_omega(omega, F, eta).norm() <= 1e-12 * max(F.norm() * omega.norm(), 1.0)


def test_odd_vector_field_identity():
    """ι_[ξ,ξ] = L_ξ ι_ξ - ι_ξ L_ξ for odd ξ"""
    layout = build_layout(3, 4, {"xi": (2, 1)})
    grid = Grid.cube(3, 8)
    eta = InternalMetric.lorentzian(4)
    rng = np.random.default_rng(5)
    xi = random_vector(layout, grid, Backend.SPECTRAL, rng, ghost="xi", constant=False, bandwidth=1)
    a = random_form(layout, grid, Backend.SPECTRAL, 1, 0, rng, constant=True)
    zero = zero_field(layout, grid)
    lhs = iota(lie_bracket(xi, xi), a)
    rhs = covariant_lie(xi, zero, iota(xi, a), eta) - iota(xi, covariant_lie(xi, zero, a, eta))
    assert lhs.norm() > 1e-3
    assert (lhs - rhs).norm() <= 1e-10 * lhs.norm()


def test_integrate_top_density():
    layout = build_layout(3, 4)
    grid = Grid.cube(3, 4)
    top = layout.base_all | layout.internal_all
    constant = Field(layout, {top: 2.5}, grid=grid)
    assert_allclose(integrate(constant).body, 2.5, rtol=1e-14)
    nodal = Field(layout, {top: np.full(grid.dims, 2.5)}, grid=grid)
    assert_allclose(integrate(nodal).body, 2.5, rtol=1e-14)
    assert integrate(top_form(layout, constant).scale(-1.0)).body == -1.0
    with pytest.raises(DegreeError):
        integrate(Field(layout, {layout.base_bit(0): 1.0}, grid=grid))


def test_mixed_backends_rejected():
    layout = build_layout(3, 4)
    grid = Grid.cube(3, 4)
    a = Field(layout, {layout.base_bit(0): 1.0}, grid=grid, backend=Backend.FD)
    b = Field(layout, {layout.base_bit(1): 1.0}, grid=grid, backend=Backend.SPECTRAL)
    with pytest.raises(DegreeError):
        a + b


def test_geometry_nondegenerate():
    layout = build_layout(3, 4)
    grid = Grid.cube(3, 4)
    geometry = random_geometry(layout, grid, Backend.SPECTRAL, np.random.default_rng(7), constant=False)
    metric = geometry.boundary_metric()
    assert metric.shape == grid.dims + (3, 3)
    assert np.all(np.linalg.eigvalsh(metric) > 0)
    flat = identity_geometry(layout, grid)
    assert_allclose(flat.frame_matrix(), np.eye(4), atol=0)
    assert flat.power(3).degrees() == {(3, 3)}


def test_snapshot_exact():
    layout = build_layout(3, 4, {"c": (2, 1)})
    grid = Grid.cube(3, 4)
    rng = np.random.default_rng(9)
    f = random_form(layout, grid, Backend.SPECTRAL, 1, 2, rng, ghost="c", constant=False)
    g = snapshot.loads(snapshot.dumps(f, "omega"))
    assert g.layout == f.layout
    assert g.grid == f.grid
    assert sorted(g.terms) == sorted(f.terms)
    for mask, value in f.terms.items():
        assert np.array_equal(g.terms[mask], value)
    with pytest.raises(SnapshotError):
        snapshot.loads("format: 1\n")


def main():
    test_grid_rejects_coarse_axes()
    test_spectral_derivative_exact()
    test_fd_derivative_second_order()
    test_fd_summation_by_parts()
    test_spectral_product_aliasing()
    test_d_squared_vanishes()
    test_bianchi_constant_connection()
    test_odd_vector_field_identity()
    test_integrate_top_density()
    test_mixed_backends_rejected()
    test_geometry_nondegenerate()
    test_snapshot_exact()
    print("fields tests passed")


if __name__ == "__main__":
    main()
