# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event loop for the kinetic Monte Carlo simulator.

Mirror of ``_kmc_py.py``; both consume the random stream identically so a
seed gives bit-identical trajectories on either backend.  See that module
for the contract; keep the arithmetic order in the two files in lockstep.
"""
from libc.math cimport log

HIT = 0
NEED_RANDOMS = 1
CAP_EXCEEDED = 2
DONE = 3
JUMPBUF_FULL = 4

COMPILED = True


def hit_chunk(const long long[::1] indptr, const long long[::1] cols,
              const double[::1] rates, const double[::1] exit_rate,
              const signed char[::1] in_target,
              long long rank, double t, long long events, long long cap,
              const double[::1] u, long long pos):
    cdef long long n = u.shape[0]
    cdef double total, dt, threshold, acc
    cdef long long k, hi
    cdef int status = -1
    with nogil:
        while True:
            if pos + 2 > n:
                status = 1  # NEED_RANDOMS
                break
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
            if in_target[rank] != 0:
                status = 0  # HIT
                break
            if events >= cap:
                status = 2  # CAP_EXCEEDED
                break
    return rank, t, events, pos, status


def trace_chunk(const long long[::1] indptr, const long long[::1] cols,
                const double[::1] rates, const double[::1] exit_rate,
                const long long[::1] site_of,
                long long rank, double t, double local_t, long long cur_site,
                double target_local, long long events, long long cap,
                const double[::1] u, long long pos,
                long long[::1] jump_sites, double[::1] jump_times,
                long long njumps):
    cdef long long n = u.shape[0]
    cdef long long cap_jumps = jump_sites.shape[0]
    cdef double total, dt, threshold, acc
    cdef long long k, hi, new_site
    cdef int status = -1
    with nogil:
        while True:
            if pos + 2 > n:
                status = 1  # NEED_RANDOMS
                break
            total = exit_rate[rank]
            dt = -log(1.0 - u[pos]) / total
            threshold = u[pos + 1] * total
            pos += 2
            if site_of[rank] >= 0:
                if local_t + dt >= target_local:
                    t = t + (target_local - local_t)
                    local_t = target_local
                    status = 3  # DONE
                    break
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
                    status = 4  # JUMPBUF_FULL
                    break
            if events >= cap:
                status = 2  # CAP_EXCEEDED
                break
    return rank, t, local_t, cur_site, events, pos, njumps, status
