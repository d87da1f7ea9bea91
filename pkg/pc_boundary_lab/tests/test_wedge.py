# SPDX-FileCopyrightText: © 2026 PC Boundary Lab Authors
# SPDX-License-Identifier: Apache-2.0
"""
Test for the wedge map lemmas, the α-criterion and the β-decomposition
"""
import time

import numpy as np
import pytest

from pc_boundary_lab.algebra_common.fibre import FibreElement, internal_bracket, wedge
from pc_boundary_lab.slice_common.slice import dof_audit
from pc_boundary_lab.utils_common.errors import ConfigError, DegreeError
from pc_boundary_lab.wedge_common.lemmas import (
    alpha_criterion,
    alpha_dim,
    beta_decompose,
    beta_dim,
    boundary_kernel_dim,
    bulk_kernel_bound,
    identity_node,
    lemma_checks,
    sample_boundary_node,
    verify_lemma_suite,
)
from pc_boundary_lab.wedge_common.wedge_maps import (
    Variant,
    WMapSpec,
    assemble,
    assemble_chi,
    assemble_prefixed,
    assemble_rho,
    exact_rank,
    fibre_basis,
    rank_kernel,
)


def test_closed_forms():
    assert [boundary_kernel_dim(N) for N in (4, 5, 6)] == [6, 20, 45]
    assert beta_dim(4) == 18
    assert alpha_dim(4) == 12
    assert bulk_kernel_bound(4) == 20
    bulk = assemble(WMapSpec(Variant.BULK, 1, 2, 1, 4), identity_node(4, boundary=False))
    assert exact_rank(bulk.matrix) == 24


def test_wmap_spec_bounds():
    spec = WMapSpec(Variant.BOUNDARY, 1, 2, 1, 4)
    assert spec.base_dim == 3
    assert spec.domain_dim == 3 * 4
    assert spec.codomain_dim == 1 * 6
    with pytest.raises(DegreeError):
        WMapSpec(Variant.BOUNDARY, 2, 2, 1, 4)
    with pytest.raises(DegreeError):
        WMapSpec(Variant.BULK, -1, 1, 1, 4)


def test_rank_helpers():
    matrix = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]])
    assert exact_rank(matrix) == 2
    rk = rank_kernel(matrix)
    assert rk.rank == 2
    assert rk.nullity == 1
    assert np.linalg.norm(matrix @ rk.kernel) <= 1e-12
    with pytest.raises(ValueError):
        exact_rank(np.array([[0.5]]))
    with pytest.raises(ConfigError):
        rank_kernel(matrix, tol=0.0)


def test_lemma_suite_n4():
    report = verify_lemma_suite(4, trials=2, seed=0, exact=True)
    assert report.passed
    # identity coframe plus two random trials
    assert len(report.rows) == 3 * len(lemma_checks(4))
    assert {row.trial_seed for row in report.rows} == {-1, 0, 1}


def test_assembly_matches_fibre_products():
    node, _ = sample_boundary_node(5, np.random.default_rng(21))
    rng = np.random.default_rng(22)
    layout, N = node.layout, node.N

    def random_element(i: int, j: int) -> FibreElement:
        return FibreElement(layout, {m: rng.uniform(-1, 1) for m in fibre_basis(layout, i, j)})

    ek = wedge(wedge(node.e, node.e), node.e)
    assert (node.power(3) - ek).norm() <= 1e-12
    x = random_element(1, 2)
    w12 = assemble(WMapSpec(Variant.BOUNDARY, N - 3, 1, 2, N), node)
    assert (w12.apply(x) - wedge(x, node.power(N - 3))).norm() <= 1e-12
    rho = internal_bracket(x, node.e, node.eta)
    assert (assemble_rho(node).apply(x) - rho).norm() <= 1e-12
    prefix = wedge(node.e_n, node.power(N - 4))
    assert (assemble_chi(node).apply(x) - wedge(prefix, rho)).norm() <= 1e-12
    y = random_element(2, 1)
    assert (assemble_prefixed(node, 2, 1, N - 4).apply(y) - wedge(prefix, y)).norm() <= 1e-12


def test_lemma_suite_runtime():
    start = time.perf_counter()
    for N in (4, 5, 6, 7):
        assert verify_lemma_suite(N, trials=100, seed=0).passed
    assert time.perf_counter() - start < 60.0


def test_lower_injectivity_needs_n5():
    ids4 = {c["id"] for c in lemma_checks(4)}
    ids5 = {c["id"] for c in lemma_checks(5)}
    assert "boundary_21_lower_injective" not in ids4
    assert "boundary_21_lower_injective" in ids5


def test_lemma_suite_rejects_n3():
    with pytest.raises(DegreeError):
        verify_lemma_suite(3, trials=1, seed=0)


def test_beta_decomposition():
    node, _ = sample_boundary_node(4, np.random.default_rng(4))
    rng = np.random.default_rng(5)
    basis = fibre_basis(node.layout, 2, 2)
    beta = FibreElement(node.layout, {m: rng.uniform(-1, 1) for m in basis})
    result = beta_decompose(beta, node)
    assert result.residual <= 1e-10
    assert result.system_size == beta_dim(4)
    assert result.nullity == 0
    with pytest.raises(DegreeError):
        beta_decompose(FibreElement.basis(node.layout, base=[0], internal=[0]), node)


def test_alpha_criterion_kernel_element():
    """A nonzero α with e α = 0 must fail the image condition"""
    node = identity_node(4)
    w21 = assemble(WMapSpec(Variant.BOUNDARY, 1, 2, 1, 4), node)
    kernel = rank_kernel(w21).kernel
    assert kernel.shape[1] == boundary_kernel_dim(4)
    alpha = w21.element(kernel[:, 0])
    verdict = alpha_criterion(alpha, node)
    assert verdict.invariant_holds
    assert not verdict.image_holds
    assert verdict.stacked_rank == verdict.expected_rank == alpha_dim(4)
    zero = alpha_criterion(FibreElement(node.layout, {}), node)
    assert zero.both_hold


def test_dof_audit():
    audit = dof_audit(4)
    assert audit.physical == 2
    assert audit.connection_effective == audit.coframe == 12
    assert audit.passed
    assert dof_audit(5).passed


def main():
    test_closed_forms()
    test_wmap_spec_bounds()
    test_rank_helpers()
    test_lemma_suite_n4()
    test_assembly_matches_fibre_products()
    test_lemma_suite_runtime()
    test_lower_injectivity_needs_n5()
    test_lemma_suite_rejects_n3()
    test_beta_decomposition()
    test_alpha_criterion_kernel_element()
    test_dof_audit()
    print("wedge tests passed")


if __name__ == "__main__":
    main()
