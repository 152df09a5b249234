"""Underlying random-walk kernel: rates, reversible measure, maximal sites.

A kernel is a finite set of sites with jump rates r(x, y) of an irreducible
continuous-time random walk that is reversible with respect to a probability
measure m.  The sites where m is maximal (the set ``s_star``) are the only
places where a condensate can sit, so everything downstream keys off the
normalized measure ``m_star = m / max(m)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BadDiagonal, NotIrreducible, NotReversible, ScenarioError

# Relative tolerance for detailed balance, and for deciding membership in the
# argmax set of the measure (looser: m may come from a linear solve).
DETAILED_BALANCE_RTOL = 1e-12
S_STAR_RTOL = 1e-10


@dataclass(frozen=True)
class SiteKernel:
    """Validated random-walk kernel with its reversible measure.

    Attributes
    ----------
    sites : tuple
        External site labels, in index order.
    rates : ndarray, shape (kappa, kappa)
        Jump rates r(x, y); zero diagonal.
    measure : ndarray, shape (kappa,)
        Reversible probability measure m, summing to 1.
    m_star : ndarray, shape (kappa,)
        m normalized by its maximum; equals 1 exactly on ``s_star``.
    s_star : tuple of int
        Indices of the sites where m is maximal.
    """

    sites: tuple
    rates: np.ndarray
    measure: np.ndarray
    m_star: np.ndarray
    s_star: tuple
    kappa_star: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kappa_star", len(self.s_star))
        for arr in (self.rates, self.measure, self.m_star):
            arr.setflags(write=False)

    @property
    def kappa(self) -> int:
        return len(self.sites)

    def index(self, site) -> int:
        """Map an external site label to its dense index."""
        return self.sites.index(site)


def _strongly_connected(adj: np.ndarray) -> bool:
    """Check strong connectivity of a boolean adjacency matrix by double BFS."""

    def reachable(a):
        seen = np.zeros(a.shape[0], dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for j in np.nonzero(a[i])[0]:
                    if not seen[j]:
                        seen[j] = True
                        nxt.append(j)
            frontier = nxt
        return seen.all()

    return reachable(adj) and reachable(adj.T)


def _stationary_measure(rates: np.ndarray) -> np.ndarray:
    """Solve m Q = 0, sum(m) = 1 for the rate matrix Q built from ``rates``."""
    kappa = rates.shape[0]
    q = rates.copy()
    np.fill_diagonal(q, -rates.sum(axis=1))
    # m Q = 0  <=>  Q^T m = 0; replace one balance equation by normalization.
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(kappa)
    b[-1] = 1.0
    m = np.linalg.solve(a, b)
    return m


def _check_detailed_balance(measure: np.ndarray, rates: np.ndarray) -> None:
    fwd = measure[:, None] * rates
    bwd = fwd.T
    scale = np.maximum(fwd, bwd)
    bad = np.abs(fwd - bwd) > DETAILED_BALANCE_RTOL * scale
    if bad.any():
        x, y = map(int, np.argwhere(bad)[0])
        raise NotReversible(
            f"detailed balance fails for pair ({x}, {y}): "
            f"m(x)r(x,y)={fwd[x, y]:.17g} vs m(y)r(y,x)={bwd[x, y]:.17g}"
        )


def build_kernel(
    rates,
    measure: Optional[Sequence[float]] = None,
    sites: Optional[Sequence] = None,
) -> SiteKernel:
    """Validate rates (and measure, if given) and derive the maximal set.

    If ``measure`` is omitted, the unique stationary distribution of the rate
    matrix is computed and detailed balance is then verified; non-reversible
    kernels are rejected, never symmetrized.

    Raises
    ------
    BadDiagonal, NotIrreducible, NotReversible
    """
    r = np.asarray(rates, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("rates must be a square matrix")
    kappa = r.shape[0]
    if kappa < 2:
        raise ValueError("a kernel needs at least two sites")
    if (r < 0).any() or not np.isfinite(r).all():
        raise ValueError("rates must be finite and nonnegative")
    diag = np.abs(np.diag(r))
    if (diag > 0).any():
        x = int(np.nonzero(diag)[0][0])
        raise BadDiagonal(f"r({x},{x}) = {r[x, x]:g} must be zero")
    if not _strongly_connected(r > 0):
        raise NotIrreducible("positive-rate graph is not strongly connected")

    if measure is None:
        m = _stationary_measure(r)
        if (m <= 0).any():
            raise NotIrreducible("stationary solve produced a nonpositive mass")
    else:
        m = np.asarray(measure, dtype=float)
        if m.shape != (kappa,):
            raise ValueError("measure must have one entry per site")
        if (m <= 0).any() or not np.isfinite(m).all():
            raise ValueError("measure entries must be finite and positive")
        m = m / m.sum()
    _check_detailed_balance(m, r)

    m_star = m / m.max()
    s_star = tuple(int(x) for x in np.nonzero(1.0 - m_star <= S_STAR_RTOL)[0])
    m_star = m_star.copy()
    m_star[list(s_star)] = 1.0  # exact 1 on the argmax set by construction

    site_labels = tuple(sites) if sites is not None else tuple(range(kappa))
    if len(site_labels) != kappa:
        raise ValueError("sites must have one label per row of rates")
    return SiteKernel(
        sites=site_labels,
        rates=r.copy(),
        measure=m,
        m_star=m_star,
        s_star=s_star,
    )


def chain_order(kernel: SiteKernel) -> Optional[list]:
    """Return site indices in path order if the support graph is a path.

    Returns None when the graph of positive rates is not a simple path
    (after identifying r(x,y)>0 with r(y,x)>0, which reversibility forces).
    """
    adj = kernel.rates > 0
    deg = adj.sum(axis=1)
    kappa = kernel.kappa
    if kappa == 2:
        return [0, 1] if adj[0, 1] else None
    ends = np.nonzero(deg == 1)[0]
    if len(ends) != 2 or not ((deg == 1) | (deg == 2)).all():
        return None
    order = [int(ends[0])]
    prev = -1
    while len(order) < kappa:
        nbrs = [int(j) for j in np.nonzero(adj[order[-1]])[0] if j != prev]
        if len(nbrs) != 1:
            return None
        prev = order[-1]
        order.append(nbrs[0])
    return order if order[-1] == int(ends[1]) else None


def is_linear_chain(kernel: SiteKernel) -> bool:
    """True iff sites form a nearest-neighbor path whose two endpoints are
    exactly the maximal sites of the measure."""
    order = chain_order(kernel)
    if order is None:
        return False
    return set(kernel.s_star) == {order[0], order[-1]}


def kernel_from_config(cfg: dict) -> SiteKernel:
    """Build a kernel from a parsed config mapping.

    Schema (unknown keys rejected)::

        sites:   [label, ...]                 # required, length kappa >= 2
        rates:   [[from, to, value], ...]     # required, labels from `sites`
        measure: [m, ...]                     # optional, length kappa

    """
    if not isinstance(cfg, dict):
        raise ScenarioError("kernel config must be a mapping")
    unknown = set(cfg) - {"sites", "rates", "measure"}
    if unknown:
        raise ScenarioError(f"unknown kernel config keys: {sorted(unknown)}")
    try:
        sites = list(cfg["sites"])
        triples = list(cfg["rates"])
    except KeyError as exc:
        raise ScenarioError(f"kernel config missing key: {exc}") from exc
    if len(set(sites)) != len(sites):
        raise ScenarioError("duplicate site labels")
    kappa = len(sites)
    index = {label: i for i, label in enumerate(sites)}
    rates = np.zeros((kappa, kappa))
    for entry in triples:
        if len(entry) != 3:
            raise ScenarioError(f"rate entry {entry!r} is not a (from, to, value) triple")
        src, dst, value = entry
        if src not in index or dst not in index:
            raise ScenarioError(f"rate entry {entry!r} names an unknown site")
        rates[index[src], index[dst]] = float(value)
    measure = cfg.get("measure")
    return build_kernel(rates, measure=measure, sites=sites)


def load_kernel(path) -> SiteKernel:
    """Read a kernel config file (YAML mapping, see ``kernel_from_config``)."""
    import yaml

    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    return kernel_from_config(cfg)
