"""Indexed enumeration of N particles on kappa sites.

A configuration is a length-kappa vector of nonnegative occupation numbers
summing to N, represented as a plain integer ndarray.  ``ConfigSpace`` gives
the bijection between configurations and ranks ``0 .. size-1``; the ordering
is lexicographic on occupation vectors and is a stable external contract
(exported vectors are indexed by this rank).

The space is never materialized as Python objects; bulk work uses the
occupancy matrix produced once by ``occupancies`` and vectorized ranking.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import EmptySite, OutOfRange, SameSite, SpaceOverflow

# Dense solvers and int64 edge indexing stay exact and feasible below this.
MAX_STATES = 2**40


def space_size(n_particles: int, kappa: int) -> int:
    """Number of configurations of ``n_particles`` on ``kappa`` sites.

    Stars and bars: binom(n + kappa - 1, kappa - 1), computed exactly
    (Python integers cannot overflow silently).
    """
    if n_particles < 0 or kappa < 1:
        raise ValueError("need n_particles >= 0 and kappa >= 1")
    return math.comb(n_particles + kappa - 1, kappa - 1)


def move(occ: np.ndarray, x: int, y: int) -> np.ndarray:
    """Move one particle from site x to site y, returning a new vector."""
    if x == y:
        raise SameSite(f"x = y = {x}")
    if occ[x] <= 0:
        raise EmptySite(f"site {x} is empty in {occ.tolist()}")
    out = np.array(occ, copy=True)
    out[x] -= 1
    out[y] += 1
    return out


class ConfigSpace:
    """Rank/unrank bijection for the configurations of N particles on kappa sites.

    Parameters
    ----------
    n_particles : int
        Total particle number N (conserved by the dynamics).
    kappa : int
        Number of sites.

    Raises
    ------
    SpaceOverflow
        If the space exceeds the exact-indexing guard of 2**40 states.
    """

    def __init__(self, n_particles: int, kappa: int):
        if n_particles < 0 or kappa < 1:
            raise ValueError("need n_particles >= 0 and kappa >= 1")
        self.n = int(n_particles)
        self.kappa = int(kappa)
        self.size = space_size(self.n, self.kappa)
        if self.size > MAX_STATES:
            raise SpaceOverflow(
                f"{self.size} states exceeds the 2**40 exact-indexing guard"
            )
        # choose[m, k] = binom(m + k, k) = number of configurations of at most
        # m particles on k + 1 sites; used by the hockey-stick rank formula.
        table = np.ones((self.n + 1, self.kappa), dtype=np.int64)
        for k in range(1, self.kappa):
            table[:, k] = np.cumsum(table[:, k - 1])
        self._choose = table

    def _cum(self, m, k):
        """binom(m + k, k) with m possibly an array; zero for m < 0."""
        m = np.asarray(m)
        out = np.where(m >= 0, self._choose[np.clip(m, 0, self.n), k], 0)
        return out

    def rank(self, occ) -> int:
        """Lexicographic rank of a configuration; inverse of ``unrank``."""
        occ = np.asarray(occ)
        if occ.shape != (self.kappa,) or (occ < 0).any() or occ.sum() != self.n:
            raise OutOfRange(f"{np.asarray(occ).tolist()} is not in this space")
        return int(self.rank_many(occ[None, :])[0])

    def rank_many(self, occ_matrix: np.ndarray) -> np.ndarray:
        """Vectorized rank of each row; rows are assumed valid."""
        occ = np.asarray(occ_matrix, dtype=np.int64)
        rem = self.n - (np.cumsum(occ, axis=1) - occ)  # particles left at col i
        ranks = np.zeros(occ.shape[0], dtype=np.int64)
        for i in range(self.kappa - 1):
            k = self.kappa - 1 - i
            ranks += self._cum(rem[:, i], k) - self._cum(rem[:, i] - occ[:, i], k)
        return ranks

    def unrank(self, idx: int) -> np.ndarray:
        """Configuration with lexicographic rank ``idx``."""
        if not 0 <= idx < self.size:
            raise OutOfRange(f"rank {idx} outside [0, {self.size})")
        occ = np.zeros(self.kappa, dtype=np.int64)
        rem = self.n
        left = int(idx)
        for i in range(self.kappa - 1):
            k = self.kappa - 1 - i
            # largest v with cum(rem,k) - cum(rem-v,k) <= left, by bisection
            lo, hi = 0, rem
            total = int(self._cum(rem, k))
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if total - int(self._cum(rem - mid, k)) <= left:
                    lo = mid
                else:
                    hi = mid - 1
            occ[i] = lo
            left -= total - int(self._cum(rem - lo, k))
            rem -= lo
        occ[-1] = rem
        return occ

    def occupancies(self) -> np.ndarray:
        """The full (size, kappa) occupancy matrix in rank order.

        Built in one pass; this is the only place the space is materialized.
        """
        out = np.zeros((self.size, self.kappa), dtype=np.int64)
        self._fill(out, 0, self.n)
        return out

    def _fill(self, block, col, n):
        if self.kappa - col == 1:
            block[:, col] = n
            return
        if self.kappa - col == 2:
            block[:, col] = np.arange(n + 1)
            block[:, col + 1] = n - block[:, col]
            return
        row = 0
        k = self.kappa - 1 - col
        for v in range(n + 1):
            rows = int(self._cum(n - v, k - 1))
            block[row : row + rows, col] = v
            self._fill(block[row : row + rows], col + 1, n - v)
            row += rows

    def __repr__(self):
        return f"ConfigSpace(n={self.n}, kappa={self.kappa}, size={self.size})"
