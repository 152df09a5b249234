import numpy as np
import pytest

from inclab.errors import BadDiagonal, NotIrreducible, NotReversible, ScenarioError
from inclab.model import (
    build_kernel,
    chain_order,
    is_linear_chain,
    kernel_from_config,
)


def test_symmetric_two_site_measure_is_uniform():
    k = build_kernel([[0, 1], [1, 0]])
    assert np.allclose(k.measure, [0.5, 0.5])
    assert k.s_star == (0, 1)
    assert k.kappa_star == 2


def test_chain_measure_solved_by_detailed_balance():
    # solving m(x) r(x,y) = m(y) r(y,x) along the chain by hand:
    # m1 = m0/2 and m2 = m1/2, so m proportional to (1, 1/2, 1/4)
    k = build_kernel([[0, 1, 0], [2, 0, 1], [0, 2, 0]])
    assert np.allclose(k.measure, np.array([1, 0.5, 0.25]) / 1.75)
    assert np.allclose(k.m_star, [1, 0.5, 0.25])
    assert k.s_star == (0,)


def test_chain_with_doubled_middle_rates_has_maximal_endpoints(k3_chain):
    assert np.allclose(k3_chain.m_star, [1, 0.5, 1])
    assert k3_chain.s_star == (0, 2)


def test_no_return_path_raises_not_irreducible():
    with pytest.raises(NotIrreducible):
        build_kernel([[0, 1], [0, 0]])


def test_nonzero_diagonal_rejected():
    with pytest.raises(BadDiagonal):
        build_kernel([[1, 1], [1, 0]])


def test_kolmogorov_violating_cycle_rejected():
    # cycle products 0->1->2->0 and reverse differ, so no reversible measure
    rates = [[0, 1, 2], [1, 0, 1], [1, 1, 0]]
    with pytest.raises(NotReversible):
        build_kernel(rates)


def test_given_measure_validated():
    with pytest.raises(NotReversible):
        build_kernel([[0, 1], [1, 0]], measure=[0.9, 0.1])
    k = build_kernel([[0, 1], [1, 0]], measure=[0.5, 0.5])
    assert np.allclose(k.measure, [0.5, 0.5])


def test_rate_rescaling_leaves_measure_alone(k3_complete):
    scaled = build_kernel(3.7 * k3_complete.rates)
    assert np.allclose(scaled.measure, k3_complete.measure)
    assert scaled.s_star == k3_complete.s_star
    assert np.allclose(scaled.m_star, k3_complete.m_star)


def test_build_is_idempotent(k3_chain):
    again = build_kernel(
        k3_chain.rates, measure=k3_chain.measure, sites=k3_chain.sites
    )
    assert np.array_equal(again.measure, k3_chain.measure)
    assert np.array_equal(again.m_star, k3_chain.m_star)
    assert again.s_star == k3_chain.s_star


def test_detailed_balance_invariant_all_pairs(k3_chain, k3_complete):
    for k in (k3_chain, k3_complete):
        fwd = k.measure[:, None] * k.rates
        scale = np.maximum(fwd, fwd.T)
        mask = scale > 0
        assert (np.abs(fwd - fwd.T)[mask] <= 1e-12 * scale[mask]).all()


def test_linear_chain_detection(k3_chain, k3_complete, k4_chain):
    assert is_linear_chain(k3_chain)
    assert not is_linear_chain(k3_complete)
    assert is_linear_chain(k4_chain)
    assert chain_order(k4_chain) in ([0, 1, 2, 3], [3, 2, 1, 0])
    # chain whose endpoints are not the maximal set
    lopsided = build_kernel([[0, 1, 0], [2, 0, 1], [0, 2, 0]])
    assert chain_order(lopsided) is not None
    assert not is_linear_chain(lopsided)


def test_linear_chain_detection_permuted_labels(k3_chain):
    # same chain with the middle site listed last
    k = build_kernel([[0, 0, 1], [0, 0, 1], [2, 2, 0]])
    assert np.allclose(sorted(k.m_star), [0.5, 1, 1])
    assert is_linear_chain(k)


def test_kernel_from_config_round_trip():
    cfg = {
        "sites": [1, 2, 3],
        "rates": [[1, 2, 1.0], [2, 1, 2.0], [2, 3, 2.0], [3, 2, 1.0]],
    }
    k = kernel_from_config(cfg)
    assert k.sites == (1, 2, 3)
    assert np.allclose(k.m_star, [1, 0.5, 1])
    assert k.index(3) == 2


def test_kernel_config_rejects_unknown_keys():
    with pytest.raises(ScenarioError):
        kernel_from_config({"sites": [1, 2], "rates": [], "rate": []})
    with pytest.raises(ScenarioError):
        kernel_from_config({"sites": [1, 2], "rates": [[1, 9, 1.0]]})
    with pytest.raises(ScenarioError):
        kernel_from_config({"sites": [1, 1], "rates": [[1, 1, 1.0]]})
