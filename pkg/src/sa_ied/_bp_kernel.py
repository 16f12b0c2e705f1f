"""Compiled flooding-schedule syndrome belief propagation."""
from __future__ import annotations

import math

import numba as nb
import numpy as np

STATUS_CONVERGED = 0
STATUS_FAILURE = 1
STATUS_MAX_ITER = 2


@nb.njit(cache=True, error_model="numpy")
def bp_flood(indptr, indices, var_edges_ptr, var_edges, synd, prior,
             max_iter, clamp, sig_threshold, sig_count, warmup, stall,
             use_heuristics, stop_on_converged, posterior, hard):
    """Run BP in place; returns (status, iterations).

    ``indptr``/``indices`` give the check-to-variable structure (edge ``e``
    is the ``e``-th stored entry); ``var_edges`` lists the edges of each
    variable. ``posterior`` and ``hard`` are written on exit.
    """
    m = indptr.size - 1
    n = prior.size
    E = indices.size
    v2c = np.empty(E)
    c2v = np.zeros(E)
    th = np.empty(E)
    for e in range(E):
        v2c[e] = prior[indices[e]]
    best_sat = -1
    since_best = 0
    status = STATUS_MAX_ITER
    it = 0
    lim = 1.0 - 1e-16
    while it < max_iter:
        it += 1
        # check nodes: c2v = 2 atanh((1 - 2 s) prod_{others} tanh(v2c / 2))
        for j in range(m):
            a = indptr[j]
            b = indptr[j + 1]
            sign = -1.0 if synd[j] else 1.0
            nzero = 0
            zpos = -1
            prod = 1.0
            for e in range(a, b):
                # tanh(v / 2); exp/log are much cheaper than expm1/log1p and
                # the absolute error stays near machine epsilon
                ex = math.exp(-v2c[e])
                t = (1.0 - ex) / (1.0 + ex)
                th[e] = t
                if t == 0.0:
                    nzero += 1
                    zpos = e
                else:
                    prod *= t
            for e in range(a, b):
                if nzero == 0:
                    u = prod / th[e]
                elif nzero == 1 and e == zpos:
                    u = prod
                else:
                    u = 0.0
                u *= sign
                if u > lim:
                    u = lim
                elif u < -lim:
                    u = -lim
                msg = math.log((1.0 + u) / (1.0 - u))
                if msg > clamp:
                    msg = clamp
                elif msg < -clamp:
                    msg = -clamp
                c2v[e] = msg
        # variable nodes
        nsig = 0
        for v in range(n):
            tot = prior[v]
            for k in range(var_edges_ptr[v], var_edges_ptr[v + 1]):
                tot += c2v[var_edges[k]]
            posterior[v] = tot
            hard[v] = 0 if tot >= 0.0 else 1
            if abs(tot) > sig_threshold:
                nsig += 1
            for k in range(var_edges_ptr[v], var_edges_ptr[v + 1]):
                e = var_edges[k]
                msg = tot - c2v[e]
                if msg > clamp:
                    msg = clamp
                elif msg < -clamp:
                    msg = -clamp
                v2c[e] = msg
        # satisfied checks under the hard decision
        sat = 0
        for j in range(m):
            par = 0
            for e in range(indptr[j], indptr[j + 1]):
                par ^= hard[indices[e]]
            if par == synd[j]:
                sat += 1
        if sat == m and stop_on_converged:
            return STATUS_CONVERGED, it
        if use_heuristics:
            if it == warmup and nsig < sig_count:
                return STATUS_FAILURE, it
            if sat > best_sat:
                best_sat = sat
                since_best = 0
            else:
                since_best += 1
                if since_best >= stall:
                    return STATUS_FAILURE, it
    if m == 0 or best_sat == m:
        return STATUS_CONVERGED, it
    # final check when heuristics were off
    sat = 0
    for j in range(m):
        par = 0
        for e in range(indptr[j], indptr[j + 1]):
            par ^= hard[indices[e]]
        if par == synd[j]:
            sat += 1
    if sat == m:
        return STATUS_CONVERGED, it
    return status, it
