import math

import numpy as np
import pytest

from conftest import make_generator, series_oracle_two_sites
from inclab.config_space import ConfigSpace
from inclab.errors import BadSets
from inclab.generator import dirichlet_form
from inclab.potential import (
    mean_hitting_time,
    occupation_time,
    series_capacity_birth_death,
    solve_equilibrium_potential,
    trace_rates,
)


def test_capacity_two_site_example(k2_sym):
    gen = make_generator(k2_sym, 2, 0.1)
    ranks = gen.space
    a = [ranks.rank([2, 0])]
    b = [ranks.rank([0, 2])]
    rep = solve_equilibrium_potential(gen, a, b)
    oracle = series_oracle_two_sites(k2_sym, 2, 0.1)
    assert np.isclose(rep.capacity, oracle, rtol=1e-12)
    assert np.isclose(rep.capacity, 4.583e-2, rtol=1e-3)
    assert np.isclose(rep.capacity, series_capacity_birth_death(gen), rtol=1e-10)


@pytest.mark.parametrize("n", [10, 50, 200])
@pytest.mark.parametrize("d", [0.5, 0.05])
def test_capacity_matches_series_oracle(k2_sym, n, d):
    gen = make_generator(k2_sym, n, d)
    ranks = gen.metastable_ranks()
    rep = solve_equilibrium_potential(gen, [ranks[0]], [ranks[1]])
    assert np.isclose(rep.capacity, series_oracle_two_sites(k2_sym, n, d), rtol=1e-8)


def test_no_interior_gives_indicator(k2_sym):
    gen = make_generator(k2_sym, 1, 0.5)
    a = [gen.space.rank([1, 0])]
    b = [gen.space.rank([0, 1])]
    rep = solve_equilibrium_potential(gen, a, b)
    assert rep.h.tolist() in ([1.0, 0.0], [0.0, 1.0])
    assert rep.residual == 0.0
    assert np.isclose(rep.capacity, 0.25, rtol=1e-14)


def test_mirror_symmetry(k2_sym):
    gen = make_generator(k2_sym, 12, 0.3)
    cs = gen.space
    rep = solve_equilibrium_potential(gen, [cs.rank([12, 0])], [cs.rank([0, 12])])
    for j in range(13):
        assert np.isclose(
            rep.h[cs.rank([j, 12 - j])] + rep.h[cs.rank([12 - j, j])],
            1.0,
            atol=1e-9,
        )


def test_maximum_principle(gen_chain_30):
    ranks = gen_chain_30.metastable_ranks()
    rep = solve_equilibrium_potential(gen_chain_30, [ranks[0]], [ranks[1]])
    assert rep.h.min() >= -1e-9
    assert rep.h.max() <= 1 + 1e-9
    assert rep.residual <= 1e-10


def test_capacity_symmetry_and_monotonicity(gen_chain_30):
    ranks = gen_chain_30.metastable_ranks()
    ab = solve_equilibrium_potential(gen_chain_30, [ranks[0]], [ranks[1]])
    ba = solve_equilibrium_potential(gen_chain_30, [ranks[1]], [ranks[0]])
    assert np.isclose(ab.capacity, ba.capacity, rtol=1e-9)
    # enlarging the target set cannot decrease the capacity
    occ = gen_chain_30.space.occupancies()
    near = int(np.nonzero((occ[:, 1] == 1) & (occ[:, 2] == 29))[0][0])
    bigger = solve_equilibrium_potential(gen_chain_30, [ranks[0]], [ranks[1], near])
    assert bigger.capacity >= ab.capacity * (1 - 1e-12)


def test_bad_sets(gen_chain_30):
    with pytest.raises(BadSets):
        solve_equilibrium_potential(gen_chain_30, [], [1])
    with pytest.raises(BadSets):
        solve_equilibrium_potential(gen_chain_30, [1, 2], [2])
    with pytest.raises(BadSets):
        mean_hitting_time(gen_chain_30, 3, [3])


def test_single_jump_hitting_time(k2_sym):
    gen = make_generator(k2_sym, 1, 0.5)
    a = gen.space.rank([1, 0])
    b = gen.space.rank([0, 1])
    assert np.isclose(mean_hitting_time(gen, a, [b]), 2.0, rtol=1e-12)


def test_full_exit_into_target(k3_complete):
    # from (1,0,0) every jump lands in B, so the answer is one holding time
    gen = make_generator(k3_complete, 1, 0.25)
    cs = gen.space
    start = cs.rank([1, 0, 0])
    b = [cs.rank([0, 1, 0]), cs.rank([0, 0, 1])]
    expected = 1.0 / gen.exit_rate[start]
    assert np.isclose(mean_hitting_time(gen, start, b), expected, rtol=1e-12)


def test_two_route_hitting_agreement(gen_chain_30):
    ranks = gen_chain_30.metastable_ranks()
    rep = solve_equilibrium_potential(gen_chain_30, [ranks[0]], [ranks[1]])
    direct = mean_hitting_time(gen_chain_30, ranks[0], [ranks[1]])
    assert np.isclose(direct, rep.mean_hitting_from_a, rtol=1e-8)


def test_equilibrium_potential_is_dirichlet_minimizer(gen_chain_30):
    ranks = gen_chain_30.metastable_ranks()
    rep = solve_equilibrium_potential(gen_chain_30, [ranks[0]], [ranks[1]])
    assert np.isclose(dirichlet_form(gen_chain_30, rep.h), rep.capacity, rtol=1e-9)
    # any perturbation respecting the boundary only increases the energy
    rng = np.random.default_rng(0)
    bump = rng.normal(0, 1e-3, gen_chain_30.size)
    bump[ranks[0]] = bump[ranks[1]] = 0.0
    assert dirichlet_form(gen_chain_30, rep.h + bump) >= rep.capacity


def test_trace_rates_symmetric_pair(k2_sym):
    gen = make_generator(k2_sym, 20, 0.2)
    rates = trace_rates(gen)
    assert rates.shape == (2, 2)
    assert np.isclose(rates[0, 1], rates[1, 0], rtol=1e-9)
    assert rates[0, 1] > 0
    ranks = gen.metastable_ranks()
    cap = solve_equilibrium_potential(gen, [ranks[0]], [ranks[1]]).capacity
    mu0 = math.exp(gen.log_mu[ranks[0]])
    assert np.isclose(rates[0, 1], cap / mu0, rtol=1e-9)


def test_trace_rates_nonnegative_complete(k3_complete):
    gen = make_generator(k3_complete, 15, 0.3)
    rates = trace_rates(gen)
    assert (rates >= 0).all()
    assert (np.diag(rates) == 0).all()


def test_occupation_time_splits_total(gen_chain_30):
    ranks = gen_chain_30.metastable_ranks()
    total = mean_hitting_time(gen_chain_30, ranks[0], [ranks[1]])
    inside = occupation_time(
        gen_chain_30, ranks[0], [ranks[1]], np.arange(gen_chain_30.size)
    )
    assert np.isclose(inside, total, rtol=1e-10)
    delta = np.setdiff1d(np.arange(gen_chain_30.size), ranks)
    t_delta = occupation_time(gen_chain_30, ranks[0], [ranks[1]], delta)
    t_meta = occupation_time(gen_chain_30, ranks[0], [ranks[1]], ranks)
    assert np.isclose(t_delta + t_meta, total, rtol=1e-10)


def test_deep_grading_uses_direct_solve(k3_chain):
    # N large enough that conductances span far beyond float64 Krylov reach
    gen = make_generator(k3_chain, 150, 1 / math.log(150) ** 2)
    ranks = gen.metastable_ranks()
    rep = solve_equilibrium_potential(gen, [ranks[0]], [ranks[1]])
    assert rep.iterations == 0  # direct path
    assert rep.residual <= 1e-10
    assert rep.h.min() >= -1e-9 and rep.h.max() <= 1 + 1e-9
