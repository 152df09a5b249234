"""Dirichlet solves: equilibrium potentials, capacities, exact mean hitting
times, and trace-process jump rates between condensate states.

All solves run on the symmetric conductance Laplacian (SPD by
reversibility), normalized by the largest conductance, with
Jacobi-preconditioned conjugate gradient.  Capacity is reported from the
boundary-flux formula with the Dirichlet-form value as a mandatory
cross-check; the two agreeing is the strongest cheap correctness signal
available.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BadSets, SolverDiverged
from .generator import SparseGenerator, dirichlet_form

CG_RTOL = 1e-12
INTERIOR_RESIDUAL_RTOL = 1e-10
CAPACITY_CROSS_RTOL = 1e-6
ITERATION_CAP_FACTOR = 50
# Above this conductance grading (max/min row scale), Krylov iterations can
# no longer observe the weakest states in double precision: their computed
# potential comes out wildly off even though the global residual converges.
# Such systems go to a direct factorization of the symmetrically scaled
# Laplacian instead, which solves every row to local machine accuracy.
KRYLOV_GRADING_LIMIT = 1e14


@dataclass(frozen=True)
class PotentialReport:
    """Result of one equilibrium-potential solve between disjoint sets.

    ``h`` is 1 on A, 0 on B, harmonic in between; ``capacity`` comes from the
    boundary flux out of A and agrees with ``capacity_dirichlet`` to 1e-6.
    ``mean_hitting_from_a`` is mu(h)/capacity, exact when A is a singleton.
    """

    a_ranks: np.ndarray
    b_ranks: np.ndarray
    h: np.ndarray
    capacity: float
    capacity_dirichlet: float
    mu_h: float
    mean_hitting_from_a: Optional[float]
    residual: float
    iterations: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "a_ranks": self.a_ranks.tolist(),
                "b_ranks": self.b_ranks.tolist(),
                "capacity": self.capacity,
                "capacity_dirichlet": self.capacity_dirichlet,
                "mu_h": self.mu_h,
                "mean_hitting_from_a": self.mean_hitting_from_a,
                "residual": self.residual,
                "iterations": self.iterations,
            },
            sort_keys=True,
        )


def _as_rank_set(gen: SparseGenerator, ranks, name: str) -> np.ndarray:
    arr = np.unique(np.asarray(ranks, dtype=np.int64).ravel())
    if arr.size == 0:
        raise BadSets(f"{name} is empty")
    if (arr < 0).any() or (arr >= gen.size).any():
        raise BadSets(f"{name} contains ranks outside [0, {gen.size})")
    return arr


def _jacobi_cg(l_ii, b, size, res_rtol=INTERIOR_RESIDUAL_RTOL):
    """Jacobi-preconditioned conjugate gradient with a loud iteration cap.

    Converges until every state's residual is below ``res_rtol`` relative to
    its own row scale (diagonal times solution magnitude), not merely until
    the global norm drops: rows whose conductances are many orders below the
    maximum need a few iterative-refinement rounds beyond the norm-based
    stopping rule.
    """
    diag = l_ii.diagonal()
    m = spla.LinearOperator(l_ii.shape, matvec=lambda v: v / diag)
    cap = ITERATION_CAP_FACTOR * int(math.isqrt(size)) + 1
    count = {"n": 0}

    def _tick(_):
        count["n"] += 1

    x, _info = spla.cg(l_ii, b, rtol=CG_RTOL, atol=0.0, maxiter=cap, M=m,
                       callback=_tick)
    for _ in range(8):
        residual = b - l_ii @ x
        scale = diag * max(1.0, float(np.max(np.abs(x))))
        if float(np.max(np.abs(residual) / scale)) <= res_rtol:
            return x, count["n"]
        left = cap - count["n"]
        if left <= 0:
            break
        delta, _info = spla.cg(l_ii, residual, rtol=CG_RTOL, atol=0.0,
                               maxiter=left, M=m, callback=_tick)
        x = x + delta
    raise SolverDiverged(
        f"per-state residual above {res_rtol} after {count['n']} iterations "
        f"(cap {cap})"
    )


def _scaled_direct(l_ii, b, res_rtol=INTERIOR_RESIDUAL_RTOL):
    """Sparse LU of the symmetrically scaled Laplacian D^-1/2 (D-C) D^-1/2.

    The scaled matrix has unit diagonal regardless of how graded the
    conductances are, so elimination resolves every state relative to its
    own row scale; the minimum-degree ordering keeps fill manageable on
    these lattice-of-compositions graphs.
    """
    diag = l_ii.diagonal()
    s = 1.0 / np.sqrt(diag)
    a_hat = (sp.diags(s) @ l_ii @ sp.diags(s)).tocsc()
    lu = spla.splu(a_hat, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options={"SymmetricMode": True})
    x = s * lu.solve(s * b)
    residual = b - l_ii @ x
    scale = diag * max(1.0, float(np.max(np.abs(x))))
    worst = float(np.max(np.abs(residual) / scale))
    if worst > res_rtol:
        raise SolverDiverged(
            f"direct solve left per-state residual {worst:.3e} above {res_rtol}"
        )
    return x, 0


def _solve_interior(l_ii, b, size, res_rtol=INTERIOR_RESIDUAL_RTOL):
    """Route between conjugate gradient and the scaled direct solve."""
    diag = l_ii.diagonal()
    grading = float(diag.max() / diag.min())
    if grading <= KRYLOV_GRADING_LIMIT:
        return _jacobi_cg(l_ii, b, size, res_rtol)
    return _scaled_direct(l_ii, b, res_rtol)


def solve_equilibrium_potential(
    gen: SparseGenerator, a_ranks, b_ranks
) -> PotentialReport:
    """Solve the boundary-value problem h = 1 on A, h = 0 on B, harmonic
    elsewhere; return potential, capacity (two formulas), and mu(h)."""
    a = _as_rank_set(gen, a_ranks, "A")
    b = _as_rank_set(gen, b_ranks, "B")
    if np.intersect1d(a, b).size:
        raise BadSets("A and B overlap")

    c, shift = gen.conductance_matrix()
    degree = np.asarray(c.sum(axis=1)).ravel()
    h = np.zeros(gen.size)
    h[a] = 1.0

    interior = np.ones(gen.size, dtype=bool)
    interior[a] = False
    interior[b] = False
    iterations = 0
    if interior.any():
        idx = np.nonzero(interior)[0]
        c_int = c[idx]
        l_ii = sp.diags(degree[idx]) - c_int[:, idx]
        rhs = np.asarray(c_int[:, a].sum(axis=1)).ravel()
        x, iterations = _solve_interior(l_ii.tocsr(), rhs, gen.size)
        h[idx] = x
        flow = c[idx] @ h
        residual = float(np.max(np.abs(flow - degree[idx] * h[idx]) / degree[idx]))
        if residual > INTERIOR_RESIDUAL_RTOL:
            raise SolverDiverged(
                f"interior residual {residual:.3e} exceeds {INTERIOR_RESIDUAL_RTOL}"
            )
    else:
        residual = 0.0

    # boundary flux out of A, rescaled to physical units
    flux = float(np.sum(degree[a] - (c[a] @ h)))
    capacity = math.exp(shift) * flux
    cap_dirichlet = dirichlet_form(gen, h)
    if abs(capacity - cap_dirichlet) > CAPACITY_CROSS_RTOL * max(
        abs(capacity), abs(cap_dirichlet)
    ):
        raise SolverDiverged(
            f"capacity formulas disagree: flux {capacity:.12e} vs "
            f"Dirichlet {cap_dirichlet:.12e}"
        )

    mu_h = float(np.exp(gen.log_mu) @ h)
    mean_hit = mu_h / capacity if a.size == 1 else None
    return PotentialReport(
        a_ranks=a,
        b_ranks=b,
        h=h,
        capacity=capacity,
        capacity_dirichlet=cap_dirichlet,
        mu_h=mu_h,
        mean_hitting_from_a=mean_hit,
        residual=residual,
        iterations=iterations,
    )


def mean_hitting_time(gen: SparseGenerator, start: int, b_ranks) -> float:
    """E_start[time to reach B], from the linear system L u = -1 off B.

    Solved in symmetrized form: (D - C) u = mu on the complement of B, with
    u = 0 on B; u recovered directly since the conductance weighting already
    absorbed mu.
    """
    b = _as_rank_set(gen, b_ranks, "B")
    start = int(start)
    if start in set(b.tolist()):
        raise BadSets("start lies in the target set")

    c, shift = gen.conductance_matrix()
    degree = np.asarray(c.sum(axis=1)).ravel()
    interior = np.ones(gen.size, dtype=bool)
    interior[b] = False
    idx = np.nonzero(interior)[0]
    l_ii = (sp.diags(degree[idx]) - c[idx][:, idx]).tocsr()
    rhs = np.exp(gen.log_mu[idx] - shift)
    u, _ = _solve_interior(l_ii, rhs, gen.size)
    full = np.zeros(gen.size)
    full[idx] = u
    return float(full[start])


def expected_events(gen: SparseGenerator, start: int, b_ranks) -> float:
    """E_start[number of jumps before reaching B] (L v = -exit_rate off B)."""
    b = _as_rank_set(gen, b_ranks, "B")
    c, shift = gen.conductance_matrix()
    degree = np.asarray(c.sum(axis=1)).ravel()
    interior = np.ones(gen.size, dtype=bool)
    interior[b] = False
    idx = np.nonzero(interior)[0]
    l_ii = (sp.diags(degree[idx]) - c[idx][:, idx]).tocsr()
    rhs = np.exp(gen.log_mu[idx] - shift) * gen.exit_rate[idx]
    v, _ = _solve_interior(l_ii, rhs, gen.size)
    full = np.zeros(gen.size)
    full[idx] = v
    return float(full[int(start)])


def occupation_time(gen: SparseGenerator, start: int, b_ranks, in_set) -> float:
    """E_start[time spent in ``in_set`` before reaching B]."""
    b = _as_rank_set(gen, b_ranks, "B")
    mask = np.zeros(gen.size, dtype=bool)
    mask[np.asarray(in_set, dtype=np.int64)] = True
    c, shift = gen.conductance_matrix()
    degree = np.asarray(c.sum(axis=1)).ravel()
    interior = np.ones(gen.size, dtype=bool)
    interior[b] = False
    idx = np.nonzero(interior)[0]
    l_ii = (sp.diags(degree[idx]) - c[idx][:, idx]).tocsr()
    rhs = np.exp(gen.log_mu[idx] - shift) * mask[idx]
    v, _ = _solve_interior(l_ii, rhs, gen.size)
    full = np.zeros(gen.size)
    full[idx] = v
    return float(full[int(start)])


def trace_rates(
    gen: SparseGenerator, metastable_ranks: Optional[Sequence[int]] = None
) -> np.ndarray:
    """Jump rates of the process watched only on the condensate states.

    Entry (i, j) is the trace rate from condensate i to condensate j,
    recovered from capacities between singletons:

        rate(x -> y) = [Cap(x, rest-of-x) + Cap(y, rest-of-y)
                        - Cap({x,y}, rest-of-both)] / (2 mu(x)),

    with the third term zero when {x, y} is the whole metastable set.
    """
    ranks = (
        gen.metastable_ranks()
        if metastable_ranks is None
        else np.asarray(metastable_ranks, dtype=np.int64)
    )
    k = len(ranks)
    if k < 2:
        raise BadSets("need at least two metastable singletons")
    singleton_cap = np.empty(k)
    for i in range(k):
        rest = np.delete(ranks, i)
        singleton_cap[i] = solve_equilibrium_potential(gen, [ranks[i]], rest).capacity
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            rest = np.delete(ranks, [i, j])
            pair_cap = 0.0
            if rest.size:
                pair_cap = solve_equilibrium_potential(
                    gen, [ranks[i], ranks[j]], rest
                ).capacity
            numer = singleton_cap[i] + singleton_cap[j] - pair_cap
            out[i, j] = numer / (2.0 * math.exp(gen.log_mu[ranks[i]]))
            out[j, i] = numer / (2.0 * math.exp(gen.log_mu[ranks[j]]))
    return out


def series_capacity_birth_death(gen: SparseGenerator) -> float:
    """Closed-form capacity between the two condensates of a two-site kernel.

    The state space is a single path in eta_0, so the capacity is the series
    law over edge conductances; used as an oracle column next to the solver.
    """
    if gen.kernel.kappa != 2:
        raise BadSets("series oracle applies to two-site kernels only")
    n = gen.space.n
    # state ell has eta_0 = ell; edge ell -> ell+1 moves a particle 1 -> 0
    occ = np.zeros((n, 2), dtype=np.int64)
    occ[:, 0] = np.arange(n)
    occ[:, 1] = n - occ[:, 0]
    ranks = gen.space.rank_many(occ)
    log_rate = np.log(occ[:, 1] * (gen.d + occ[:, 0]) * gen.kernel.rates[1, 0])
    log_c = gen.log_mu[ranks] + log_rate
    shift = log_c.max()
    return math.exp(shift) / float(np.sum(np.exp(shift - log_c)))
