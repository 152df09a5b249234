"""Stationary weights, partition function, and condensation masses.

The stationary measure of the particle process is a conditioned product
measure: each site x carries weight ``m_star(x)**k * w(k)`` for k particles,
with ``w(k) = Gamma(k + d) / (k! Gamma(d))``.  Everything here lives in log
space: for small d and large N the intermediate Gamma ratios span too many
orders of magnitude for linear arithmetic, even though the interesting
ratios (such as ``w(N) ~ d/N``) end up tame.

The partition function is computed two independent ways: a direct
log-sum-exp over the enumerated space, and a per-site convolution recursion
that never touches the space and is the default at scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .config_space import ConfigSpace, space_size
from .errors import BadParameter
from .model import SiteKernel

# Above this many states the enumeration route is skipped and the recursion
# stands alone (the two routes are cross-checked everywhere below it).
CROSS_CHECK_MAX_STATES = 10**5
CROSS_CHECK_LOG_RTOL = 1e-9


def default_dn(n_particles: int) -> float:
    """Default interaction-strength schedule, 1 / (log N)^2."""
    return 1.0 / math.log(n_particles) ** 2


DN_SCHEDULES: dict[str, Callable[[int], float]] = {
    "inverse-log-squared": default_dn,
    "inverse-log-cubed": lambda n: 1.0 / math.log(n) ** 3,
}


@dataclass(frozen=True)
class WeightTable:
    """Log-domain site weights ``log_w[k] = log w(k)`` for k = 0 .. N."""

    d: float
    log_w: np.ndarray

    def __post_init__(self):
        self.log_w.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.log_w) - 1


def build_weights(n_particles: int, d: float) -> WeightTable:
    """Tabulate log w(k) for k = 0 .. N via the ratio recurrence.

    w(0) = 1 and w(k+1) = w(k) (k + d) / (k + 1), which is exact in log
    space and avoids Gamma evaluations entirely.
    """
    if d <= 0 or not np.isfinite(d):
        raise BadParameter(f"d must be positive, got {d!r}")
    if n_particles < 1:
        raise BadParameter(f"need at least one particle, got {n_particles}")
    k = np.arange(n_particles, dtype=float)
    log_w = np.concatenate(([0.0], np.cumsum(np.log(k + d) - np.log(k + 1))))
    return WeightTable(d=float(d), log_w=log_w)


def log_stationary_weights(
    occ_matrix: np.ndarray, kernel: SiteKernel, weights: WeightTable
) -> np.ndarray:
    """Unnormalized log weight of each occupancy row: sum_x (eta_x log m*(x) + log w(eta_x))."""
    log_mstar = np.log(kernel.m_star)
    return occ_matrix @ log_mstar + weights.log_w[occ_matrix].sum(axis=1)


def log_partition_enumerated(
    kernel: SiteKernel, weights: WeightTable, space: Optional[ConfigSpace] = None
) -> float:
    """log Z by direct log-sum-exp over the full enumeration."""
    if space is None:
        space = ConfigSpace(weights.n, kernel.kappa)
    return float(logsumexp(log_stationary_weights(space.occupancies(), kernel, weights)))


def log_partition_profile_sites(m_star, log_w: np.ndarray) -> np.ndarray:
    """log Z_n for n = 0 .. N over sites with the given maximal-measure
    ratios (any positive vector, including a single site)."""
    m_star = np.asarray(m_star, dtype=float)
    n = len(log_w) - 1
    log_mstar = np.log(m_star)
    log_z = log_mstar[0] * np.arange(n + 1) + log_w
    for x in range(1, len(m_star)):
        site_term = log_mstar[x] * np.arange(n + 1) + log_w
        nxt = np.empty(n + 1)
        for m in range(n + 1):
            nxt[m] = logsumexp(site_term[: m + 1] + log_z[m::-1])
        log_z = nxt
    return log_z


def log_partition_profile(kernel: SiteKernel, weights: WeightTable) -> np.ndarray:
    """log Z_n for all n = 0 .. N by the per-site convolution recursion.

    Entry n is the log partition function of n particles on all sites, so a
    whole sweep over smaller particle numbers comes out of one O(kappa N^2)
    pass.  Sites enter one at a time:

        Z_{n, k} = sum_l m*(s_k)^l w(l) Z_{n-l, k-1},    Z_{n, 0} = [n == 0].
    """
    return log_partition_profile_sites(kernel.m_star, weights.log_w)


def partition_function(
    kernel: SiteKernel, weights: WeightTable, space: Optional[ConfigSpace] = None
) -> float:
    """log Z, cross-checked between the two routes when the space is small.

    The convolution recursion is the returned value; on spaces of at most
    10^5 states the enumerated sum must agree to 1e-9 in log space.
    """
    log_z = float(log_partition_profile(kernel, weights)[weights.n])
    if space_size(weights.n, kernel.kappa) <= CROSS_CHECK_MAX_STATES:
        log_z_enum = log_partition_enumerated(kernel, weights, space)
        if abs(log_z - log_z_enum) > CROSS_CHECK_LOG_RTOL * max(1.0, abs(log_z_enum)):
            raise AssertionError(
                f"partition-function routes disagree: {log_z} vs {log_z_enum}"
            )
    return log_z


@dataclass(frozen=True)
class MeasureReport:
    """Stationary measure summary for one (kernel, N, d) instance.

    ``mu`` maps a rank to its probability (computed on demand; the space is
    not materialized).  ``mass_on_metastable`` is aligned with
    ``kernel.s_star``; ``mass_on_delta`` is 1 minus its total by construction.
    """

    log_z: float
    mu: Callable[[int], float]
    mass_on_metastable: np.ndarray
    mass_on_delta: float


def measure_report(
    kernel: SiteKernel, weights: WeightTable, space: Optional[ConfigSpace] = None
) -> MeasureReport:
    """Normalized measure plus the masses of the condensate states."""
    if space is None:
        space = ConfigSpace(weights.n, kernel.kappa)
    log_z = partition_function(kernel, weights, space)

    def mu(rank: int) -> float:
        occ = space.unrank(rank)
        return float(
            np.exp(log_stationary_weights(occ[None, :], kernel, weights)[0] - log_z)
        )

    # all N particles on x in s_star: log weight is N log m*(x) + log w(N) = log w(N)
    mass = np.full(kernel.kappa_star, np.exp(weights.log_w[weights.n] - log_z))
    return MeasureReport(
        log_z=log_z,
        mu=mu,
        mass_on_metastable=mass,
        mass_on_delta=1.0 - float(mass.sum()),
    )


def weight_growth_ratios(weights: WeightTable) -> np.ndarray:
    """The ratios (k+1) w(k+1) / d for k = 0 .. N-1 (in linear space).

    These are O(N^d) and bounded below by 1; they quantify how far the
    weights are from their small-d limit w(k) ~ d/k.
    """
    n = weights.n
    k = np.arange(n, dtype=float)
    return np.exp(np.log(k + 1) + weights.log_w[1:] - math.log(weights.d))
