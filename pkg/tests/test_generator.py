import numpy as np
import pytest

from conftest import brute_force_measure, make_generator
from inclab.config_space import ConfigSpace
from inclab.generator import apply_generator, dirichlet_form, stationarity_residual


def test_two_site_single_particle_rates(k2_sym):
    gen = make_generator(k2_sym, 1, 0.5)
    cs = gen.space
    r10 = cs.rank([1, 0])
    r01 = cs.rank([0, 1])
    mat = gen.rate_matrix().toarray()
    assert np.isclose(mat[r10, r01], 0.5)
    assert np.isclose(mat[r01, r10], 0.5)
    assert np.count_nonzero(mat) == 2


def test_two_site_two_particle_rates(k2_sym):
    gen = make_generator(k2_sym, 2, 0.1)
    cs = gen.space
    mat = gen.rate_matrix().toarray()
    assert np.isclose(mat[cs.rank([2, 0]), cs.rank([1, 1])], 2 * 0.1)
    assert np.isclose(mat[cs.rank([1, 1]), cs.rank([2, 0])], 1 * (0.1 + 1))


def test_row_degree_bound(gen_chain_30):
    kappa = gen_chain_30.kernel.kappa
    degrees = np.diff(gen_chain_30.indptr)
    assert degrees.max() <= kappa * (kappa - 1)
    assert (gen_chain_30.rates > 0).all()
    assert np.isfinite(gen_chain_30.rates).all()


def test_edge_reversibility_full_sweep(gen_chain_30):
    c, _ = gen_chain_30.conductance_matrix()
    ct = c.T.tocsr()
    ct.sort_indices()
    scale = np.maximum(c.data, ct.data)
    assert (np.abs(c.data - ct.data) <= 1e-10 * scale).all()


def test_stationarity(gen_chain_30):
    assert stationarity_residual(gen_chain_30) <= 1e-9


def test_measure_matches_brute_force(k3_complete):
    gen = make_generator(k3_complete, 8, 0.4)
    mu = brute_force_measure(gen)
    assert np.allclose(mu, np.exp(gen.log_mu), rtol=1e-12)
    assert abs(np.exp(gen.log_mu).sum() - 1.0) <= 1e-10


def test_dirichlet_form_constants(gen_chain_30, k2_sym):
    assert dirichlet_form(gen_chain_30, np.full(gen_chain_30.size, 3.7)) == 0.0
    gen = make_generator(k2_sym, 1, 0.5)
    f = np.zeros(gen.size)
    f[gen.space.rank([1, 0])] = 1.0
    assert np.isclose(dirichlet_form(gen, f), 0.25, rtol=1e-14)


def test_dirichlet_form_shift_invariance(gen_chain_30):
    rng = np.random.default_rng(5)
    f = rng.random(gen_chain_30.size)
    a = dirichlet_form(gen_chain_30, f)
    b = dirichlet_form(gen_chain_30, f + 123.25)
    assert np.isclose(a, b, rtol=1e-9)


def test_dirichlet_form_accepts_callables(gen_chain_30):
    occ0 = gen_chain_30.space.unrank(0)
    f_arr = gen_chain_30.space.occupancies()[:, 0].astype(float)
    f_call = lambda rank: float(gen_chain_30.space.unrank(rank)[0])
    assert np.isclose(
        dirichlet_form(gen_chain_30, f_arr),
        dirichlet_form(gen_chain_30, f_call),
        rtol=1e-12,
    )
    assert f_call(0) == occ0[0]


def test_apply_generator(gen_chain_30):
    const = apply_generator(gen_chain_30, np.ones(gen_chain_30.size))
    assert np.max(np.abs(const)) == 0.0
    rng = np.random.default_rng(11)
    f = rng.random(gen_chain_30.size)
    lf = apply_generator(gen_chain_30, f)
    mu = np.exp(gen_chain_30.log_mu)
    scale = np.max(mu * gen_chain_30.exit_rate) * np.max(np.abs(f))
    assert abs(float(mu @ lf)) <= 1e-9 * scale


def test_metastable_ranks(gen_chain_30):
    ranks = gen_chain_30.metastable_ranks()
    occ = gen_chain_30.space.occupancies()
    for x, rank in zip(gen_chain_30.kernel.s_star, ranks):
        assert occ[rank, x] == gen_chain_30.space.n


def test_edge_list_export(gen_chain_30):
    edges = gen_chain_30.edge_list()
    assert len(edges) == len(gen_chain_30.rates)
    k = 7
    assert edges["source"][k] == gen_chain_30.rows[k]
    assert edges["target"][k] == gen_chain_30.cols[k]
