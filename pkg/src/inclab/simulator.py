"""Event-driven kinetic Monte Carlo for the particle process.

Exact continuous-time jump chain: exponential holding time from the state's
total exit rate, jump chosen proportionally to edge rates; no tau-leaping,
no state aggregation.  Randomness comes from counter-based Philox streams
keyed by (seed, trial), so trials are order-independent and reproducible
under any scheduling; every trajectory is bit-identical across the
compiled and pure-Python backends.

The inner loop lives in ``_kmc`` (Cython) with ``_kmc_py`` as an equivalent
fallback selected at import.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadSets, HorizonExceeded
from .generator import SparseGenerator
from . import _kmc_py

try:
    from . import _kmc
except ImportError:  # extension not built; the pure loop is ~50x slower
    _kmc = None

DEFAULT_EVENT_CAP = 10**10
RANDOM_CHUNK = 1 << 16  # even, so events never straddle a refill
JUMP_CHUNK = 1 << 12


def available_backends() -> tuple:
    return ("compiled", "python") if _kmc is not None else ("python",)


def default_backend() -> str:
    return "compiled" if _kmc is not None else "python"


def _kernel_module(backend: Optional[str]):
    name = backend or default_backend()
    if name == "compiled":
        if _kmc is None:
            raise ValueError("compiled backend requested but not built")
        return _kmc, "compiled"
    if name == "python":
        return _kmc_py, "python"
    raise ValueError(f"unknown backend {name!r}")


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, trial], dtype=np.uint64))
    )


@dataclass(frozen=True)
class TrajectorySummary:
    """Sample statistics from one simulation command.

    For hitting runs, ``hitting_times`` and ``event_counts`` have one entry
    per trial.  For condensate-path runs, ``jump_sites``/``jump_times`` give
    the projected walk on the trace clock (divided by theta) and
    ``delta_time_fraction`` the share of real time spent off the condensate
    states.  ``wall_seconds`` is diagnostic only and excluded from exported
    artifacts, which must be byte-deterministic.
    """

    kind: str
    seed: int
    trials: int
    backend: str
    hitting_times: Optional[np.ndarray] = None
    event_counts: Optional[np.ndarray] = None
    jump_sites: Optional[np.ndarray] = None
    jump_times: Optional[np.ndarray] = None
    delta_time_fraction: Optional[float] = None
    real_duration: Optional[float] = None
    trace_duration: Optional[float] = None
    wall_seconds: float = 0.0

    @property
    def mean_hitting(self) -> Optional[float]:
        if self.hitting_times is None:
            return None
        return float(self.hitting_times.mean())

    @property
    def stderr_hitting(self) -> Optional[float]:
        if self.hitting_times is None or len(self.hitting_times) < 2:
            return None
        return float(self.hitting_times.std(ddof=1) / np.sqrt(len(self.hitting_times)))

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "seed": self.seed,
            "trials": self.trials,
            "backend": self.backend,
        }
        if self.hitting_times is not None:
            out["mean_hitting"] = self.mean_hitting
            out["stderr_hitting"] = self.stderr_hitting
            out["total_events"] = int(self.event_counts.sum())
        if self.jump_sites is not None:
            out["jumps"] = [
                [int(s), float(t)] for s, t in zip(self.jump_sites, self.jump_times)
            ]
            out["delta_time_fraction"] = self.delta_time_fraction
            out["real_duration"] = self.real_duration
            out["trace_duration"] = self.trace_duration
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _run_hit_trial(kern, gen, in_target, start, seed, trial, event_cap):
    rng = _trial_rng(seed, trial)
    rank, t, events, pos = start, 0.0, 0, RANDOM_CHUNK
    u = np.empty(RANDOM_CHUNK)
    while True:
        if pos >= RANDOM_CHUNK:
            rng.random(out=u)
            pos = 0
        rank, t, events, pos, status = kern.hit_chunk(
            gen.indptr, gen.cols, gen.rates, gen.exit_rate, in_target,
            rank, t, events, event_cap, u, pos,
        )
        if status == _kmc_py.HIT:
            return t, events
        if status == _kmc_py.CAP_EXCEEDED:
            raise HorizonExceeded(
                f"trial {trial} passed {event_cap} events before hitting"
            )
        # NEED_RANDOMS: refill and resume


def simulate_hitting(
    gen: SparseGenerator,
    start: int,
    b_ranks,
    trials: int,
    seed: int,
    event_cap: int = DEFAULT_EVENT_CAP,
    backend: Optional[str] = None,
    workers: int = 1,
) -> TrajectorySummary:
    """Sample the first entry time into B from ``start``, one exact
    trajectory per trial."""
    if trials < 1:
        raise ValueError("need at least one trial")
    b = np.unique(np.asarray(b_ranks, dtype=np.int64))
    if b.size == 0:
        raise BadSets("target set is empty")
    if int(start) in set(b.tolist()):
        raise BadSets("start lies in the target set")
    kern, backend_name = _kernel_module(backend)
    in_target = np.zeros(gen.size, dtype=np.int8)
    in_target[b] = 1

    times = np.empty(trials)
    counts = np.empty(trials, dtype=np.int64)
    t0 = time.perf_counter()

    def run_range(lo, hi):
        for trial in range(lo, hi):
            times[trial], counts[trial] = _run_hit_trial(
                kern, gen, in_target, int(start), seed, trial, event_cap
            )

    if workers <= 1 or trials == 1:
        run_range(0, trials)
    else:
        step = -(-trials // workers)
        bounds = [(i, min(i + step, trials)) for i in range(0, trials, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda se: run_range(*se), bounds))

    return TrajectorySummary(
        kind="hitting",
        seed=seed,
        trials=trials,
        backend=backend_name,
        hitting_times=times,
        event_counts=counts,
        wall_seconds=time.perf_counter() - t0,
    )


def simulate_condensate_path(
    gen: SparseGenerator,
    start_site: int,
    horizon_t: float,
    theta: float,
    seed: int,
    event_cap: int = DEFAULT_EVENT_CAP,
    backend: Optional[str] = None,
    trial: int = 0,
) -> TrajectorySummary:
    """Run the full process until the trace clock (time accumulated on the
    condensate states) reaches ``horizon_t * theta``.

    Returns the jump sequence of the projected condensate walk with
    timestamps on the trace clock divided by theta, plus the fraction of
    real time spent away from the condensate states.
    """
    kernel = gen.kernel
    if start_site not in kernel.s_star:
        raise BadSets(f"start site {start_site} is not a maximal site")
    if horizon_t <= 0 or theta <= 0:
        raise ValueError("horizon and theta must be positive")
    kern, backend_name = _kernel_module(backend)

    site_of = np.full(gen.size, -1, dtype=np.int64)
    ranks = gen.metastable_ranks()
    for x, rank in zip(kernel.s_star, ranks):
        site_of[rank] = x
    target_local = float(horizon_t) * float(theta)

    rng = _trial_rng(seed, trial)
    u = np.empty(RANDOM_CHUNK)
    pos = RANDOM_CHUNK
    rank = int(ranks[list(kernel.s_star).index(start_site)])
    t = local_t = 0.0
    cur_site = int(start_site)
    events = 0
    jump_sites = np.empty(JUMP_CHUNK, dtype=np.int64)
    jump_times = np.empty(JUMP_CHUNK)
    njumps = 0
    site_chunks, time_chunks = [], []
    t0 = time.perf_counter()
    while True:
        if pos >= RANDOM_CHUNK:
            rng.random(out=u)
            pos = 0
        rank, t, local_t, cur_site, events, pos, njumps, status = kern.trace_chunk(
            gen.indptr, gen.cols, gen.rates, gen.exit_rate, site_of,
            rank, t, local_t, cur_site, target_local, events, event_cap,
            u, pos, jump_sites, jump_times, njumps,
        )
        if status == _kmc_py.DONE:
            break
        if status == _kmc_py.CAP_EXCEEDED:
            raise HorizonExceeded(f"passed {event_cap} events before the horizon")
        if status == _kmc_py.JUMPBUF_FULL:
            site_chunks.append(jump_sites.copy())
            time_chunks.append(jump_times.copy())
            njumps = 0
        # NEED_RANDOMS falls through to a refill

    site_chunks.append(jump_sites[:njumps].copy())
    time_chunks.append(jump_times[:njumps].copy())
    all_sites = np.concatenate(site_chunks)
    all_times = np.concatenate(time_chunks) / theta
    return TrajectorySummary(
        kind="condensate-path",
        seed=seed,
        trials=1,
        backend=backend_name,
        jump_sites=all_sites,
        jump_times=all_times,
        delta_time_fraction=(t - local_t) / t if t > 0 else 0.0,
        real_duration=t,
        trace_duration=local_t,
        wall_seconds=time.perf_counter() - t0,
    )
