import numpy as np
import pytest

from inclab.config_space import ConfigSpace
from inclab.generator import build_generator
from inclab.measure import build_weights
from inclab.model import build_kernel


@pytest.fixture(scope="session")
def k2_sym():
    """Two symmetric sites; both maximal."""
    return build_kernel([[0, 1], [1, 0]])


@pytest.fixture(scope="session")
def k3_chain():
    """Three-site chain with m* = (1, 1/2, 1); endpoints maximal."""
    return build_kernel([[0, 1, 0], [2, 0, 2], [0, 1, 0]])


@pytest.fixture(scope="session")
def k3_complete():
    """Complete three-site graph, uniform measure, distinct symmetric rates."""
    return build_kernel([[0, 1, 2], [1, 0, 3], [2, 3, 0]])


@pytest.fixture(scope="session")
def k4_chain():
    """Four-site chain with m* = (1, 1/2, 1/2, 1)."""
    return build_kernel([[0, 1, 0, 0], [2, 0, 1, 0], [0, 1, 0, 2], [0, 0, 1, 0]])


def make_generator(kernel, n, d):
    return build_generator(kernel, build_weights(n, d), ConfigSpace(n, kernel.kappa))


@pytest.fixture(scope="session")
def gen_chain_30(k3_chain):
    """Small chain generator reused across modules (496 states)."""
    return make_generator(k3_chain, 30, 0.2)


def brute_force_measure(gen):
    """Independent stationary measure: normalize exp(log weights) directly."""
    return np.exp(gen.log_mu - gen.log_mu.max()) / np.exp(
        gen.log_mu - gen.log_mu.max()
    ).sum()


def series_oracle_two_sites(kernel, n, d):
    """Series-conductance capacity between the condensates of a two-site
    kernel, from first principles (weights and rates only; no solver)."""
    from inclab.measure import build_weights as _bw

    wt = _bw(n, d)
    w = np.exp(wt.log_w)
    z = sum(
        kernel.m_star[0] ** j * kernel.m_star[1] ** (n - j) * w[j] * w[n - j]
        for j in range(n + 1)
    )
    resistance = 0.0
    for ell in range(1, n + 1):
        mu = (
            kernel.m_star[0] ** ell
            * kernel.m_star[1] ** (n - ell)
            * w[ell]
            * w[n - ell]
            / z
        )
        c = mu * ell * (d + n - ell) * kernel.rates[0, 1]
        resistance += 1.0 / c
    return 1.0 / resistance
