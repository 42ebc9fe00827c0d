# cython: language_level=3
"""Compiled hot kernels: thinned-law threshold probabilities, mean-field
orbit iteration, and synchronous graph transduction.

Signatures and return conventions match ``itad._pycore``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, fabs

cnp.import_array()

DIRAC = 0
BINOMIAL = 1
POISSON = 2
NEGBIN = 3

cdef double TAIL_REL = 1e-17
cdef long MAX_TERMS = 1000000


cdef inline void _thinned(int code, long n, double param, double a,
                          int* kind, long* nn, double* prm) noexcept nogil:
    if code == 0:
        kind[0] = 1
        nn[0] = n
        prm[0] = a
    elif code == 1:
        kind[0] = 1
        nn[0] = n
        prm[0] = a * param
    elif code == 2:
        kind[0] = 2
        nn[0] = 0
        prm[0] = a * param
    else:
        kind[0] = 3
        nn[0] = n
        prm[0] = a * param / (1.0 - (1.0 - a) * param)


cdef inline double _log_ratio(int kind, long n, double prm, long j) noexcept nogil:
    if kind == 2:
        return log(prm) - log(j + 1.0)
    if kind == 1:
        return log(<double>(n - j)) - log(j + 1.0) + log(prm) - log1p(-prm)
    return log(<double>(j + n)) - log(j + 1.0) + log(prm)


cdef inline double _ratio(int kind, long n, double prm, double odds, long j) noexcept nogil:
    if kind == 2:
        return prm / (j + 1.0)
    if kind == 1:
        return (n - j) / (j + 1.0) * odds
    return (j + n) / (j + 1.0) * prm


cdef void _pmf_tail(int kind, long n, double prm, long k,
                    double* pmf_km1, double* tail) noexcept nogil:
    cdef double lp, lower, upper, term, ratio, p, odds = 0.0
    cdef long j
    if prm <= 0.0 or (kind == 1 and n == 0):
        pmf_km1[0] = 1.0 if k == 1 else 0.0
        tail[0] = 0.0
        return
    if kind == 1:
        if prm >= 1.0:
            pmf_km1[0] = 1.0 if k - 1 == n else 0.0
            tail[0] = 1.0 if n >= k else 0.0
            return
        if n == 1:
            if k == 1:
                pmf_km1[0] = 1.0 - prm
                tail[0] = prm
            elif k == 2:
                pmf_km1[0] = prm
                tail[0] = 0.0
            else:
                pmf_km1[0] = 0.0
                tail[0] = 0.0
            return
        if k - 1 > n:
            pmf_km1[0] = 0.0
            tail[0] = 0.0
            return
        odds = prm / (1.0 - prm)

    if kind == 2:
        lp = -prm
    else:
        lp = n * log1p(-prm)
    lower = 0.0
    if lp > -700.0:
        # linear recurrence while pmf(0) is representable
        p = exp(lp)
        for j in range(k - 1):
            lower += p
            p *= _ratio(kind, n, prm, odds, j)
        pmf_km1[0] = p
        lower += p
        if lower <= 0.5:
            tail[0] = 1.0 - lower if lower < 1.0 else 0.0
            return
        if kind == 1 and k > n:
            tail[0] = 0.0
            return
        term = p * _ratio(kind, n, prm, odds, k - 1)
        upper = 0.0
        j = k
        while j - k < MAX_TERMS:
            upper += term
            if kind == 1 and j >= n:
                break
            ratio = _ratio(kind, n, prm, odds, j)
            if ratio < 1.0 and term <= TAIL_REL * upper:
                break
            term *= ratio
            j += 1
        tail[0] = upper
        return

    for j in range(k - 1):
        lower += exp(lp)
        lp += _log_ratio(kind, n, prm, j)
    pmf_km1[0] = exp(lp)
    lower += pmf_km1[0]
    if lower <= 0.5:
        tail[0] = 1.0 - lower if lower < 1.0 else 0.0
        return
    if kind == 1 and k > n:
        tail[0] = 0.0
        return
    lp += _log_ratio(kind, n, prm, k - 1)
    upper = 0.0
    j = k
    while j - k < MAX_TERMS:
        term = exp(lp)
        upper += term
        if kind == 1 and j >= n:
            break
        ratio = _log_ratio(kind, n, prm, j)
        if ratio < 0.0 and term <= TAIL_REL * upper:
            break
        lp += ratio
        j += 1
    tail[0] = upper


def thinned(int code, long n, double param, double a):
    cdef int kind
    cdef long nn
    cdef double prm
    _thinned(code, n, param, a, &kind, &nn, &prm)
    return kind, nn, prm


def pmf_tail(int kind, long n, double prm, long k):
    cdef double pm, tl
    _pmf_tail(kind, n, prm, k, &pm, &tl)
    return pm, tl


cdef inline double _flux_one(int code, long n, double param, double a,
                             long k, double w) noexcept nogil:
    cdef int kind
    cdef long nn
    cdef double prm, pm, tl
    _thinned(code, n, param, a, &kind, &nn, &prm)
    _pmf_tail(kind, nn, prm, k, &pm, &tl)
    return tl + w * pm


def threshold_flux(int code, long n, double param, thin, long k, selfw):
    cdef const double[::1] th = np.ascontiguousarray(thin, dtype=np.float64)
    cdef const double[::1] sw = np.ascontiguousarray(selfw, dtype=np.float64)
    cdef Py_ssize_t size = th.shape[0]
    out = np.zeros(size, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    if k == 0:
        return out
    with nogil:
        for i in range(size):
            o[i] = _flux_one(code, n, param, th[i], k, sw[i])
    return out


cdef double _mean_flux(int code, long n, double param, const double[::1] marg,
                       const double[::1] diag, const double[::1] weights,
                       double u, long k) noexcept nogil:
    cdef double total = 0.0
    cdef Py_ssize_t i
    if k == 0:
        return 0.0
    for i in range(marg.shape[0]):
        total += weights[i] * _flux_one(code, n, param, marg[i] * u, k, diag[i])
    return total


def orbit_iterate(int code, long n, double param, marg, diag, weights,
                  long l, long m, double s, double r, double scale,
                  bint renormalize, double xi0, long n_steps, double tol,
                  bint stop_on_converge):
    cdef const double[::1] mg = np.ascontiguousarray(marg, dtype=np.float64)
    cdef const double[::1] dg = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    xi_arr = np.empty(n_steps + 1, dtype=np.float64)
    gain_arr = np.empty(n_steps, dtype=np.float64)
    loss_arr = np.empty(n_steps, dtype=np.float64)
    cdef double[::1] xi = xi_arr
    cdef double[::1] gain = gain_arr
    cdef double[::1] loss = loss_arr
    cdef double x = xi0, q, rr, g, d, nxt
    cdef long t, steps = 0
    cdef bint converged = False
    xi[0] = x
    with nogil:
        for t in range(n_steps):
            q = _mean_flux(code, n, param, mg, dg, wt, x, l)
            if renormalize:
                g = scale * q * (1.0 - x)
                d = x
                nxt = g
            else:
                rr = _mean_flux(code, n, param, mg, dg, wt, 1.0 - x, m)
                g = (q + s) * (1.0 - x)
                d = (rr + r) * x
                nxt = x + g - d
            if nxt < 0.0:
                nxt = 0.0
            elif nxt > 1.0:
                nxt = 1.0
            gain[t] = g
            loss[t] = d
            xi[t + 1] = nxt
            steps = t + 1
            converged = fabs(nxt - x) < tol
            x = nxt
            if converged and stop_on_converge:
                break
    return (xi_arr[:steps + 1].copy(), gain_arr[:steps].copy(),
            loss_arr[:steps].copy(), bool(converged))


def transduce_sync(adjacency, cnp.uint8_t[::1] active, long l):
    cdef const cnp.uint8_t[:, ::1] adj = np.ascontiguousarray(adjacency, dtype=np.uint8)
    cdef Py_ssize_t K = adj.shape[0], i, j
    cdef long pressure, total = 0
    cdef cnp.uint8_t[::1] flips = np.zeros(K, dtype=np.uint8)
    cdef bint changed
    for i in range(K):
        total += active[i]
    counts = [total]
    while True:
        changed = False
        with nogil:
            for i in range(K):
                flips[i] = 0
                if active[i]:
                    continue
                pressure = 0
                for j in range(K):
                    if adj[i, j] and active[j]:
                        pressure += 1
                if pressure >= l:
                    flips[i] = 1
                    changed = True
            if changed:
                for i in range(K):
                    if flips[i]:
                        active[i] = 1
                        total += 1
        if not changed:
            break
        counts.append(total)
    return counts
