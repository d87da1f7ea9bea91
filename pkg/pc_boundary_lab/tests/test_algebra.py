# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the Grassmann layout, graded fibre products and internal frames
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from pc_boundary_lab.algebra_common.fibre import (
    FibreElement,
    VectorFibre,
    frame_components,
    interior_product,
    internal_bracket,
    is_homogeneous,
    reconstruct,
    top_form,
    wedge,
)
from pc_boundary_lab.algebra_common.grassmann import (
    GrassmannNumber,
    build_layout,
    ghost_number_profile,
    merge_sign,
    relabel_mask,
)
from pc_boundary_lab.algebra_common.metric import InternalMetric
from pc_boundary_lab.algebra_common.multi_index import MultiIndex, levi_civita, permutation_sign
from pc_boundary_lab.utils_common.errors import BudgetError, ConfigError, DegreeError


def test_generators_anticommute():
    t0 = GrassmannNumber.generator(0, 3)
    t1 = GrassmannNumber.generator(1, 3)
    assert (t0 * t1 + t1 * t0).norm() == 0.0
    assert (t0 * t0).norm() == 0.0
    assert (t0 * t1).get(0b011) == 1.0
    assert (t1 * t0).get(0b011) == -1.0


def test_grassmann_product_associative():
    rng = np.random.default_rng(3)
    n = 5

    def sample():
        return GrassmannNumber({m: rng.uniform(-1, 1) for m in range(1 << n)}, n)

    a, b, c = sample(), sample(), sample()
    assert ((a * b) * c - a * (b * c)).norm() <= 1e-12


def test_body_soul_parity():
    x = GrassmannNumber({0: 2.0, 0b001: 1.0, 0b011: -3.0}, 2)
    assert x.body == 2.0
    assert x.soul().get(0) == 0.0
    assert x.odd().masks() == [0b001]
    assert x.even().masks() == [0, 0b011]
    assert x.parity() is None
    assert x.odd().parity() == 1


def test_generator_budget():
    with pytest.raises(BudgetError):
        GrassmannNumber.generator(3, 3)
    with pytest.raises(BudgetError):
        build_layout(3, 4, {"c": (30, 1), "cdag": (20, -1)}, max_generators=40)


def test_merge_sign():
    assert merge_sign(0b01, 0b10) == 1
    assert merge_sign(0b10, 0b01) == -1
    assert merge_sign(0b11, 0b01) == 0


def test_permutation_signs():
    assert levi_civita([0, 1, 2]) == 1
    assert levi_civita([1, 0, 2]) == -1
    assert levi_civita([1, 2, 0]) == 1
    assert levi_civita([0, 0, 1]) == 0
    assert levi_civita([0, 2]) == 0
    assert permutation_sign([3, 1]) == -1
    sign, index = MultiIndex.sorted_from([2, 0], 4)
    assert sign == -1
    assert index.entries == (0, 2)
    assert index.complement().entries == (1, 3)
    with pytest.raises(DegreeError):
        MultiIndex((1, 0), 4)


def test_ghost_number_profile():
    layout = build_layout(3, 4, {"c": (2, 1), "cdag": (2, -1)})
    c0, c1, d0 = layout.ghost_bit(0), layout.ghost_bit(1), layout.ghost_bit(2)
    profile = ghost_number_profile([c0, c0 | c1, c0 | d0, d0 | layout.base_bit(0)], layout)
    assert profile == {1: 1, 2: 1, 0: 1, -1: 1}


def test_wedge_graded_commutative():
    layout = build_layout(3, 4)
    dx0_e1 = FibreElement.basis(layout, base=[0], internal=[1])
    dx1 = FibreElement.basis(layout, base=[1])
    e2 = FibreElement.basis(layout, internal=[2])
    # even against odd commutes, odd against odd anticommutes
    assert (wedge(dx0_e1, dx1) - wedge(dx1, dx0_e1)).norm() == 0.0
    assert (wedge(dx1, e2) + wedge(e2, dx1)).norm() == 0.0
    assert wedge(dx1, dx1).norm() == 0.0


def test_wedge_degree_overflow():
    layout = build_layout(3, 4)
    volume = FibreElement.basis(layout, base=[0, 1, 2])
    with pytest.raises(DegreeError):
        wedge(volume, FibreElement.basis(layout, base=[0]))


def test_top_form_homogeneous():
    layout = build_layout(3, 4)
    top = top_form(layout)
    assert top.degrees() == {(3, 4)}
    assert is_homogeneous(top)
    mixed = FibreElement.basis(layout, base=[0]) + FibreElement.basis(layout, internal=[0, 1])
    assert not is_homogeneous(mixed)


def test_internal_bracket_rotation():
    layout = build_layout(3, 4)
    eta = InternalMetric.lorentzian(4)
    x = FibreElement.basis(layout, internal=[0, 1])
    e0 = FibreElement.basis(layout, internal=[0])
    e1 = FibreElement.basis(layout, internal=[1])
    assert (internal_bracket(x, e1, eta) - e0).norm() == 0.0
    assert (internal_bracket(x, e0, eta) + e1).norm() == 0.0
    # timelike axis picks up η_33 = -1
    boost = FibreElement.basis(layout, internal=[0, 3])
    e3 = FibreElement.basis(layout, internal=[3])
    assert (internal_bracket(boost, e3, eta) + e0).norm() == 0.0


def test_relabel_sign():
    assert relabel_mask(0b11, [1, 0]) == (0b11, -1)
    assert relabel_mask(0b01, [1, 0]) == (0b10, 1)
    # generators past the permutation stay put
    assert relabel_mask(0b101, [1, 0]) == (0b110, 1)
    rng = np.random.default_rng(4)
    n = 4

    def sample():
        return GrassmannNumber({m: rng.uniform(-1, 1) for m in range(1 << n)}, n)

    a, b = sample(), sample()
    perm = [2, 0, 3, 1]
    assert ((a * b).relabel(perm) - a.relabel(perm) * b.relabel(perm)).norm() <= 1e-12
    inverse = [int(k) for k in np.argsort(perm)]
    assert (a.relabel(perm).relabel(inverse) - a).norm() == 0.0


def _random_rotation(layout, rng):
    pairs = [(a, b) for a in range(layout.internal_dim) for b in range(a + 1, layout.internal_dim)]
    return FibreElement(layout, {layout.internal_mask(p): rng.uniform(-1, 1) for p in pairs})


def test_internal_bracket_jacobi():
    layout = build_layout(3, 4)
    eta = InternalMetric.lorentzian(4)
    rng = np.random.default_rng(13)
    x, y = _random_rotation(layout, rng), _random_rotation(layout, rng)
    xy = internal_bracket(x, y, eta)
    for a in (
        FibreElement(layout, {layout.internal_bit(c): rng.uniform(-1, 1) for c in range(4)}),
        _random_rotation(layout, rng),
    ):
        lhs = internal_bracket(x, internal_bracket(y, a, eta), eta) - internal_bracket(y, internal_bracket(x, a, eta), eta)
        rhs = internal_bracket(xy, a, eta)
        assert rhs.norm() > 1e-3
        assert (lhs - rhs).norm() <= 1e-12


def test_internal_bracket_derivation():
    layout = build_layout(3, 4)
    eta = InternalMetric.lorentzian(4)
    rng = np.random.default_rng(14)
    x = _random_rotation(layout, rng)
    u = FibreElement(layout, {layout.internal_bit(c): rng.uniform(-1, 1) for c in range(4)})
    v = FibreElement(layout, {layout.internal_bit(c) | layout.base_bit(0): rng.uniform(-1, 1) for c in range(4)})
    lhs = internal_bracket(x, wedge(u, v), eta)
    rhs = wedge(internal_bracket(x, u, eta), v) + wedge(u, internal_bracket(x, v, eta))
    assert lhs.norm() > 1e-3
    assert (lhs - rhs).norm() <= 1e-12


def test_interior_product_coordinates():
    layout = build_layout(3, 4)
    area = FibreElement.basis(layout, base=[0, 1])
    dx0 = FibreElement.basis(layout, base=[0])
    dx1 = FibreElement.basis(layout, base=[1])
    assert (interior_product(VectorFibre.coordinate(layout, 0), area) - dx1).norm() == 0.0
    assert (interior_product(VectorFibre.coordinate(layout, 1), area) + dx0).norm() == 0.0


def test_frame_components_rebuild():
    layout = build_layout(3, 4)
    rng = np.random.default_rng(11)
    frame = np.eye(4) + 0.2 * rng.uniform(-1, 1, (4, 4))
    x = FibreElement(layout, {layout.internal_bit(c): rng.uniform(-1, 1) for c in range(4)})
    comps = frame_components(x, frame)
    assert len(comps) == 4
    assert reconstruct(comps, frame).allclose(x, atol=1e-12)
    expected = np.linalg.solve(frame, np.array([x.terms[layout.internal_bit(c)] for c in range(4)]))
    assert_allclose([float(c.terms[0]) for c in comps], expected, atol=1e-12)


def test_metric_rejects_bad_components():
    eta = InternalMetric.lorentzian(5)
    assert eta.signature == (4, 1)
    assert eta.det() == -1
    with pytest.raises(ConfigError):
        InternalMetric((1, 2))


def main():
    test_generators_anticommute()
    test_grassmann_product_associative()
    test_body_soul_parity()
    test_generator_budget()
    test_merge_sign()
    test_permutation_signs()
    test_ghost_number_profile()
    test_wedge_graded_commutative()
    test_wedge_degree_overflow()
    test_top_form_homogeneous()
    test_internal_bracket_rotation()
    test_relabel_sign()
    test_internal_bracket_jacobi()
    test_internal_bracket_derivation()
    test_interior_product_coordinates()
    test_frame_components_rebuild()
    test_metric_rejects_bad_components()
    print("algebra tests passed")


if __name__ == "__main__":
    main()
