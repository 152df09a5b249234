"""Closed-form predictions for the condensate time-scales, variational test
functions, and the series-conductance primitive.

Three regimes, keyed by the shape of the kernel:

* scale 1 (clock ``1/d``): moves between maximal sites connected within the
  maximal set; the limiting jump rates are the walk rates themselves.
* scale 2 (clock ``N/d^2``): three-site chains whose endpoints are the
  maximal sites; one trap site in between.
* scale 3 (clock ``N^2/d^3``): longer chains; only a two-sided bracket is
  available because the known capacity bounds have different constants.

The test-function families give rigorous variational upper bounds on
capacities when fed to the generator's Dirichlet form.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config_space import ConfigSpace
from .errors import BadSpec, BadWeights, ScaleNotApplicable
from .model import SiteKernel, chain_order, is_linear_chain

# Largest eps for which the piecewise-linear ramp keeps slope <= 1 + sqrt(eps):
# 1/(1-2e) <= 1+sqrt(e) exactly when sqrt(e) <= (sqrt(3)-1)/2, e <= 0.13397...
EPS_MAX = (math.sqrt(3.0) - 1.0) ** 2 / 4.0
DEFAULT_EPS = 0.05


def phi_ramp(t, eps: float):
    """Nondecreasing ramp: 0 below eps, 1 above 1 - eps, linear between.

    Satisfies phi(t) + phi(1 - t) = 1 and slope 1/(1 - 2 eps) <= 1 + sqrt(eps)
    for eps <= EPS_MAX (enforced).  Smoothness is unnecessary for finite
    Dirichlet forms, so the simplest admissible shape wins.
    """
    if not 0.0 < eps <= EPS_MAX:
        raise BadSpec(f"eps must lie in (0, {EPS_MAX:.6f}], got {eps}")
    return np.clip((np.asarray(t, dtype=float) - eps) / (1.0 - 2.0 * eps), 0.0, 1.0)


def series_conductance(weights) -> float:
    """Effective conductance of conductances in series: 1 / sum(1/w)."""
    arr = np.asarray(weights, dtype=float)
    if arr.size == 0 or (arr <= 0).any() or not np.isfinite(arr).all():
        raise BadWeights("need a nonempty list of positive finite conductances")
    return float(1.0 / np.sum(1.0 / arr))


@dataclass(frozen=True)
class ScalePrediction:
    """Closed-form prediction for one time-scale.

    Scales 1 and 2 fill ``mean_hitting`` and the limiting ``jump_rates``
    matrix (aligned with ``sites``); scale 3 fills two-sided brackets for the
    capacity and the mean hitting time (asymptotic-constant bounds, not
    finite-N guarantees).
    """

    scale: int
    theta: float
    sites: tuple
    mean_hitting: Optional[float] = None
    jump_rates: Optional[np.ndarray] = None
    capacity_bracket: Optional[tuple] = None
    hitting_bracket: Optional[tuple] = None
    provenance: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "scale": self.scale,
                "theta": self.theta,
                "sites": list(self.sites),
                "mean_hitting": self.mean_hitting,
                "jump_rates": None
                if self.jump_rates is None
                else self.jump_rates.tolist(),
                "capacity_bracket": self.capacity_bracket,
                "hitting_bracket": self.hitting_bracket,
                "provenance": self.provenance,
            },
            sort_keys=True,
        )


def predict_scale1(kernel: SiteKernel, d: float, x: int) -> ScalePrediction:
    """Mean time 1/(d * sum of rates from x within the maximal set), plus the
    limiting jump-rate matrix restricted to the maximal sites."""
    if x not in kernel.s_star:
        raise ScaleNotApplicable(f"site {x} is not a maximal site")
    others = [y for y in kernel.s_star if y != x]
    total = float(sum(kernel.rates[x, y] for y in others))
    if total == 0.0:
        raise ScaleNotApplicable(
            f"site {x} has no positive rate to another maximal site"
        )
    idx = list(kernel.s_star)
    p = kernel.rates[np.ix_(idx, idx)].copy()
    np.fill_diagonal(p, 0.0)
    return ScalePrediction(
        scale=1,
        theta=1.0 / d,
        sites=tuple(kernel.sites[i] for i in idx),
        mean_hitting=1.0 / (d * total),
        jump_rates=p,
        provenance="first-scale move time 1/(d * sum of within-maximal rates); "
        "limiting rates equal the walk rates",
    )


def _chain_or_raise(kernel: SiteKernel) -> list:
    order = chain_order(kernel)
    if order is None or not is_linear_chain(kernel):
        raise ScaleNotApplicable(
            "kernel is not a nearest-neighbor chain with maximal endpoints"
        )
    return order


def predict_scale2(kernel: SiteKernel, d: float, n_particles: int) -> ScalePrediction:
    """Three-site chain: mean crossing time (1/2) (1/r(1,2) + 1/r(3,2)) *
    (1 - m*(2)) * N / d^2 and the reciprocal limiting alternation rate.

    The 1/2 is the limiting measure of a single condensate: the crossing
    time is the measure-weighted potential over the capacity, and the
    capacity limit is (1/r(1,2)+1/r(3,2))^-1 / (1-m*(2)) on the N/d^2
    clock.  Exact solves confirm the crossing time converges to this value
    (the harmonic-sum formula without the 1/2 overshoots by exactly 2x).
    """
    order = _chain_or_raise(kernel)
    if kernel.kappa != 3:
        raise ScaleNotApplicable("second scale needs exactly three sites")
    e1, mid, e2 = order
    r12 = kernel.rates[e1, mid]
    r32 = kernel.rates[e2, mid]
    harm = 1.0 / r12 + 1.0 / r32
    gap = 1.0 - kernel.m_star[mid]
    theta = n_particles / d**2
    mean_scaled = 0.5 * harm * gap
    rate = 1.0 / mean_scaled
    p = np.array([[0.0, rate], [rate, 0.0]])
    return ScalePrediction(
        scale=2,
        theta=theta,
        sites=(kernel.sites[e1], kernel.sites[e2]),
        mean_hitting=mean_scaled * theta,
        jump_rates=p,
        provenance="second-scale crossing time (1/2)(1/r(end1,mid) + "
        "1/r(end2,mid)) * (1 - m*(mid)) * N/d^2",
    )


def predict_scale3_bracket(
    kernel: SiteKernel, d: float, n_particles: int
) -> ScalePrediction:
    """Chain of four or more sites: two-sided capacity and hitting brackets.

    Lower capacity constant: one particle in transit at a time,
    3 / sum_p 1/(m*(p) r(p, p+1)) over interior edges; upper constant uses
    the pair-occupancy weights (1-m*(p))(1-m*(p+1)) on the same sum.  The
    hitting bracket divides 1/2 (the limiting measure of one condensate) by
    the opposite capacity bound.
    """
    order = _chain_or_raise(kernel)
    kappa = kernel.kappa
    if kappa < 4:
        raise ScaleNotApplicable("third scale needs at least four sites")
    m = kernel.m_star
    r = kernel.rates
    lo_sum = 0.0
    hi_sum = 0.0
    for p in range(1, kappa - 2):  # chain positions 2 .. kappa-2 (1-based)
        a, b = order[p], order[p + 1]
        lo_sum += 1.0 / (m[a] * r[a, b])
        hi_sum += (1.0 - m[a]) * (1.0 - m[b]) / (m[a] * r[a, b])
    cap_lo = 3.0 / lo_sum
    cap_hi = 3.0 / hi_sum
    scale = d**3 / n_particles**2
    theta = n_particles**2 / d**3
    return ScalePrediction(
        scale=3,
        theta=theta,
        sites=(kernel.sites[order[0]], kernel.sites[order[-1]]),
        capacity_bracket=(cap_lo * scale, cap_hi * scale),
        hitting_bracket=(0.5 / cap_hi * theta, 0.5 / cap_lo * theta),
        provenance="third-scale capacity bracket [3/sum 1/(m* r), "
        "3/sum (1-m*)(1-m*')/(m* r)] * d^3/N^2; hitting bracket (1/2)/capacity",
    )


@dataclass(frozen=True)
class TestFunctionSpec:
    """Which variational test-function family to build, and its knobs.

    ``family`` is one of ``phi-tube`` (scale 1), ``two-parameter-G``
    (scale 2), ``third-scale-c`` (scale 3).  ``source_sites`` picks the
    sites whose condensates sit on the 1-boundary (scale 1 only).
    ``weights`` are the scale-3 cell constants, summing to 1; by default the
    series-optimal choice proportional to (1-m*)(1-m*')/(m* r).
    """

    family: str
    eps: float = DEFAULT_EPS
    source_sites: tuple = field(default=())
    weights: Optional[tuple] = None

    __test__ = False  # a domain type, not a pytest collection target


def _scale3_default_weights(kernel: SiteKernel, order: list) -> np.ndarray:
    m, r = kernel.m_star, kernel.rates
    raw = []
    for p in range(1, kernel.kappa - 2):
        a, b = order[p], order[p + 1]
        raw.append((1.0 - m[a]) * (1.0 - m[b]) / (m[a] * r[a, b]))
    raw = np.asarray(raw)
    return raw / raw.sum()


def evaluate_test_function(
    spec: TestFunctionSpec, scale: int, kernel: SiteKernel, space: ConfigSpace
) -> np.ndarray:
    """Evaluate the requested family on every rank of the space.

    The result takes the exact boundary values (1 on the source condensates,
    0 on the target ones), so its Dirichlet form is a rigorous upper bound on
    the corresponding capacity.
    """
    occ = space.occupancies()
    n = space.n
    sources: tuple
    if scale == 1:
        if spec.family != "phi-tube":
            raise BadSpec(f"family {spec.family!r} does not fit scale 1")
        sources = tuple(spec.source_sites) or (kernel.s_star[0],)
        if not set(sources) <= set(kernel.s_star):
            raise BadSpec("source sites must be maximal sites")
        f = np.zeros(space.size)
        for x in sources:
            f += phi_ramp(occ[:, x] / n, spec.eps)
    elif scale == 2:
        if spec.family != "two-parameter-G":
            raise BadSpec(f"family {spec.family!r} does not fit scale 2")
        order = _chain_or_raise(kernel)
        if kernel.kappa != 3:
            raise BadSpec("scale-2 test function needs a three-site chain")
        e1, mid, e2 = order
        sources = (e1,)
        r12, r32 = kernel.rates[e1, mid], kernel.rates[e2, mid]
        norm = 2.0 / (1.0 / r12 + 1.0 / r32)
        j = occ[:, e1].astype(float)
        ell = occ[:, mid].astype(float)
        a = phi_ramp((j - 1.0) / n, 2.0 * spec.eps)
        b = phi_ramp((j - 1.0) / n + np.minimum(ell / n, spec.eps), 2.0 * spec.eps)
        f = norm * ((a - a * a / 2.0) / r12 + (b * b / 2.0) / r32)
    elif scale == 3:
        if spec.family != "third-scale-c":
            raise BadSpec(f"family {spec.family!r} does not fit scale 3")
        order = _chain_or_raise(kernel)
        if kernel.kappa < 4:
            raise BadSpec("scale-3 test function needs at least four sites")
        sources = (order[0],)
        if spec.weights is None:
            c = _scale3_default_weights(kernel, order)
        else:
            c = np.asarray(spec.weights, dtype=float)
            if c.shape != (kernel.kappa - 3,) or abs(c.sum() - 1.0) > 1e-12:
                raise BadSpec("scale-3 weights must sum to 1 over interior edges")
        j = occ[:, order[0]].astype(float)
        f = np.zeros(space.size)
        interior_cum = np.zeros(space.size)
        for p in range(1, kernel.kappa - 2):
            interior_cum = interior_cum + occ[:, order[p]]
            arg = j / n + np.minimum(interior_cum / n, spec.eps)
            a = phi_ramp(arg, 2.0 * spec.eps)
            f += 6.0 * c[p - 1] * (a * a / 2.0 - a * a * a / 3.0)
    else:
        raise BadSpec(f"scale must be 1, 2 or 3, got {scale}")

    # boundary values must be exact for the variational bound to hold
    for x in kernel.s_star:
        pile = np.zeros(kernel.kappa, dtype=np.int64)
        pile[x] = n
        rank = space.rank(pile)
        want = 1.0 if x in sources else 0.0
        if f[rank] != want:
            raise BadSpec(
                f"test function is {f[rank]} instead of {want} on the "
                f"condensate at site {x}; N is too small for eps={spec.eps}"
            )
    return f
