"""Pure-Python event loop for the kinetic Monte Carlo simulator.

Reference implementation of the compiled kernel in ``_kmc.pyx``: the two
must consume the random stream identically, operation for operation, so a
given seed produces bit-identical trajectories on either backend.  Each
event consumes exactly two uniforms: one for the exponential holding time,
one for the jump choice (linear scan of the row's cumulative rates, last
edge absorbing the final rounding).
"""
from math import log

# chunk-driver status codes shared with the compiled backend
HIT = 0
NEED_RANDOMS = 1
CAP_EXCEEDED = 2
DONE = 3
JUMPBUF_FULL = 4

COMPILED = False


def hit_chunk(indptr, cols, rates, exit_rate, in_target,
              rank, t, events, cap, u, pos):
    """Advance one trajectory until it hits the target set, exhausts the
    random buffer, or reaches the event cap.

    Returns (rank, t, events, pos, status).
    """
    n = u.shape[0]
    while True:
        if pos + 2 > n:
            return rank, t, events, pos, NEED_RANDOMS
        total = exit_rate[rank]
        dt = -log(1.0 - u[pos]) / total
        threshold = u[pos + 1] * total
        pos += 2
        k = indptr[rank]
        hi = indptr[rank + 1]
        acc = 0.0
        while k < hi - 1:
            acc = acc + rates[k]
            if threshold < acc:
                break
            k += 1
        t = t + dt
        events += 1
        rank = cols[k]
        if in_target[rank]:
            return rank, t, events, pos, HIT
        if events >= cap:
            return rank, t, events, pos, CAP_EXCEEDED


def trace_chunk(indptr, cols, rates, exit_rate, site_of,
                rank, t, local_t, cur_site, target_local, events, cap,
                u, pos, jump_sites, jump_times, njumps):
    """Advance the full process while accumulating local time on the
    condensate states, recording the jump sequence of the projected walk.

    Stops when the local (trace) clock reaches ``target_local``; also yields
    on buffer exhaustion, a full jump buffer, or the event cap.  Returns
    (rank, t, local_t, cur_site, events, pos, njumps, status).
    """
    n = u.shape[0]
    cap_jumps = jump_sites.shape[0]
    while True:
        if pos + 2 > n:
            return rank, t, local_t, cur_site, events, pos, njumps, NEED_RANDOMS
        total = exit_rate[rank]
        dt = -log(1.0 - u[pos]) / total
        threshold = u[pos + 1] * total
        pos += 2
        if site_of[rank] >= 0:
            if local_t + dt >= target_local:
                t = t + (target_local - local_t)
                local_t = target_local
                return rank, t, local_t, cur_site, events, pos, njumps, DONE
            local_t = local_t + dt
        t = t + dt
        events += 1
        k = indptr[rank]
        hi = indptr[rank + 1]
        acc = 0.0
        while k < hi - 1:
            acc = acc + rates[k]
            if threshold < acc:
                break
            k += 1
        rank = cols[k]
        new_site = site_of[rank]
        if new_site >= 0 and new_site != cur_site:
            jump_sites[njumps] = new_site
            jump_times[njumps] = local_t
            njumps += 1
            cur_site = new_site
            if njumps == cap_jumps:
                return rank, t, local_t, cur_site, events, pos, njumps, JUMPBUF_FULL
        if events >= cap:
            return rank, t, local_t, cur_site, events, pos, njumps, CAP_EXCEEDED
