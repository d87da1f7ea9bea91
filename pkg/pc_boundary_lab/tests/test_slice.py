# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the structural slice: ω̃ = ω + v decomposition, gauge independence of ω
and the σ solver
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from pc_boundary_lab.algebra_common.fibre import wedge
from pc_boundary_lab.algebra_common.grassmann import build_layout
from pc_boundary_lab.fields_common.grid import Backend, Grid
from pc_boundary_lab.fields_common.random_fields import identity_geometry, random_form, random_geometry
from pc_boundary_lab.slice_common.slice import (
    SliceSolver,
    kernel_projector,
    random_kernel_shift,
    sigma_of,
    structural_residual,
    verify_decomposition,
    wedge_preimage,
)
from pc_boundary_lab.utils_common.errors import DegreeError, OffSliceError


def _setup(seed: int, constant: bool = False):
    layout = build_layout(3, 4)
    grid = Grid.cube(3, 4)
    rng = np.random.default_rng(seed)
    geometry = random_geometry(layout, grid, Backend.SPECTRAL, rng, constant=constant)
    omega_tilde = random_form(layout, grid, Backend.SPECTRAL, 1, 2, rng, constant=constant)
    return geometry, omega_tilde, rng


def test_decomposition_on_slice():
    geometry, omega_tilde, rng = _setup(0)
    report = verify_decomposition(geometry, omega_tilde, gauge_shifts=2, rng=rng)
    assert report.passed
    assert report.kernel_dim == 6
    assert report.max_residual <= 1e-10
    assert report.gauge_deviation <= 1e-9


def test_sigma_matches_decomposition():
    geometry, omega_tilde, _ = _setup(1)
    result = SliceSolver(geometry).decompose(omega_tilde)
    assert result.kernel_residual <= 1e-10
    assert structural_residual(result.omega, geometry) <= 1e-10
    sigma = sigma_of(result.omega, geometry)
    assert (sigma - result.sigma).norm() <= 1e-9 * max(result.sigma.norm(), 1.0)
    with pytest.raises(OffSliceError):
        sigma_of(omega_tilde, geometry)


def test_connection_degree_checked():
    geometry, _, rng = _setup(2, constant=True)
    wrong = random_form(geometry.layout, geometry.grid, Backend.SPECTRAL, 1, 1, rng)
    with pytest.raises(DegreeError):
        SliceSolver(geometry).decompose(wrong)


def test_kernel_shift_in_kernel():
    geometry, _, rng = _setup(3)
    shift = random_kernel_shift(geometry, rng)
    assert shift.norm() > 1e-3
    assert wedge(geometry.power(1), shift).norm() <= 1e-10 * shift.norm()


def test_kernel_projector_identity_frame():
    layout = build_layout(3, 4)
    geometry = identity_geometry(layout, Grid.cube(3, 4))
    P = kernel_projector(geometry)
    assert_allclose(P @ P, P, atol=1e-12)
    assert round(float(np.trace(P))) == 6


def test_wedge_preimage_recovers_sigma():
    geometry, omega_tilde, _ = _setup(4)
    result = SliceSolver(geometry).decompose(omega_tilde)
    target = wedge(result.sigma, geometry.power(1))
    x, outside = wedge_preimage(target, geometry, 1, 1)
    assert outside <= 1e-10
    assert (x - result.sigma).norm() <= 1e-9 * max(result.sigma.norm(), 1.0)


def main():
    test_decomposition_on_slice()
    test_sigma_matches_decomposition()
    test_connection_degree_checked()
    test_kernel_shift_in_kernel()
    test_kernel_projector_identity_frame()
    test_wedge_preimage_recovers_sigma()
    print("slice tests passed")


if __name__ == "__main__":
    main()
