"""Pure-Python (numpy) implementation of the hot kernels.

Mirrors ``itad._core`` function for function.  Used when the compiled
extension is unavailable or ``ITAD_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np

DIRAC = 0
BINOMIAL = 1
POISSON = 2
NEGBIN = 3

_TAIL_REL = 1e-17
_MAX_TERMS = 1_000_000


def thinned(code, n, param, a):
    """Return ``(kind, n, param)`` of the law ``code`` thinned by mass ``a``."""
    if code == DIRAC:
        return BINOMIAL, n, a
    if code == BINOMIAL:
        return BINOMIAL, n, a * param
    if code == POISSON:
        return POISSON, 0, a * param
    return NEGBIN, n, a * param / (1.0 - (1.0 - a) * param)


def _log_pmf0(kind, n, prm):
    if kind == POISSON:
        return -prm
    return n * math.log1p(-prm)


def _log_ratio(kind, n, prm, j):
    # log pmf(j+1) - log pmf(j)
    if kind == POISSON:
        return math.log(prm) - math.log(j + 1.0)
    if kind == BINOMIAL:
        return (math.log(n - j) - math.log(j + 1.0)
                + math.log(prm) - math.log1p(-prm))
    return math.log(j + n) - math.log(j + 1.0) + math.log(prm)


def pmf_tail(kind, n, prm, k):
    """``(P(D = k-1), P(D >= k))`` for the law ``(kind, n, prm)``, ``k >= 1``."""
    if prm <= 0.0 or (kind == BINOMIAL and n == 0):
        return (1.0 if k == 1 else 0.0), 0.0
    if kind == BINOMIAL:
        if prm >= 1.0:
            return (1.0 if k - 1 == n else 0.0), (1.0 if n >= k else 0.0)
        if n == 1:
            # Bernoulli: exact closed form
            if k == 1:
                return 1.0 - prm, prm
            if k == 2:
                return prm, 0.0
            return 0.0, 0.0
        if k - 1 > n:
            return 0.0, 0.0

    lp = _log_pmf0(kind, n, prm)
    lower = 0.0
    for j in range(k - 1):
        lower += math.exp(lp)
        lp += _log_ratio(kind, n, prm, j)
    pmf_km1 = math.exp(lp)
    lower += pmf_km1
    if lower <= 0.5:
        return pmf_km1, max(0.0, 1.0 - lower)

    # upper sum from k on; lp currently holds log pmf(k-1)
    if kind == BINOMIAL and k > n:
        return pmf_km1, 0.0
    lp += _log_ratio(kind, n, prm, k - 1)
    upper = 0.0
    j = k
    while j - k < _MAX_TERMS:
        term = math.exp(lp)
        upper += term
        if kind == BINOMIAL and j >= n:
            break
        ratio = _log_ratio(kind, n, prm, j)
        if ratio < 0.0 and term <= _TAIL_REL * upper:
            break
        lp += ratio
        j += 1
    return pmf_km1, upper


def _log_ratio_vec(kind, n, prm, j):
    if kind == POISSON:
        return np.log(prm) - math.log(j + 1.0)
    if kind == BINOMIAL:
        return (math.log(n - j) - math.log(j + 1.0)
                + np.log(prm) - np.log1p(-prm))
    return math.log(j + n) - math.log(j + 1.0) + np.log(prm)


def threshold_flux(code, n, param, thin, k, selfw):
    """Vector of ``P(D_i >= k) + selfw_i * P(D_i = k-1)`` with ``D_i`` the
    law thinned by ``thin[i]``.  ``k == 0`` encodes an infinite threshold."""
    thin = np.asarray(thin, dtype=np.float64)
    selfw = np.asarray(selfw, dtype=np.float64)
    size = thin.shape[0]
    out = np.zeros(size, dtype=np.float64)
    if k == 0 or size == 0:
        return out
    if code == DIRAC:
        kind, prm = BINOMIAL, thin.copy()
    elif code == BINOMIAL:
        kind, prm = BINOMIAL, thin * param
    elif code == POISSON:
        kind, prm = POISSON, thin * param
    else:
        kind, prm = NEGBIN, thin * param / (1.0 - (1.0 - thin) * param)

    pm = np.zeros(size)
    tl = np.zeros(size)
    degenerate = (prm <= 0.0) | (kind == BINOMIAL and n == 0)
    pm[degenerate] = 1.0 if k == 1 else 0.0
    general = ~degenerate
    if kind == BINOMIAL:
        full = general & (prm >= 1.0)
        pm[full] = 1.0 if k - 1 == n else 0.0
        tl[full] = 1.0 if n >= k else 0.0
        general &= ~full
        if n == 1:
            if k == 1:
                pm[general] = 1.0 - prm[general]
                tl[general] = prm[general]
            elif k == 2:
                pm[general] = prm[general]
            general[:] = False
        elif k - 1 > n:
            general[:] = False

    idx = np.flatnonzero(general)
    if idx.size:
        p = prm[idx]
        lp = -p if kind == POISSON else n * np.log1p(-p)
        lower = np.zeros(idx.size)
        for j in range(k - 1):
            lower += np.exp(lp)
            lp = lp + _log_ratio_vec(kind, n, p, j)
        pk = np.exp(lp)
        lower += pk
        pm[idx] = pk
        small = lower <= 0.5
        tl[idx[small]] = np.maximum(0.0, 1.0 - lower[small])
        big = ~small
        if big.any() and not (kind == BINOMIAL and k > n):
            sel = idx[big]
            p = prm[sel]
            lp = lp[big] + _log_ratio_vec(kind, n, p, k - 1)
            upper = np.zeros(sel.size)
            live = np.ones(sel.size, dtype=bool)
            j = k
            while live.any() and j - k < _MAX_TERMS:
                term = np.exp(lp)
                upper[live] += term[live]
                if kind == BINOMIAL and j >= n:
                    break
                ratio = _log_ratio_vec(kind, n, p, j)
                live &= ~((ratio < 0.0) & (term <= _TAIL_REL * upper))
                lp = lp + ratio
                j += 1
            tl[sel] = upper
    out[:] = tl + selfw * pm
    return out


def _mean_flux(code, n, param, marg, diag, weights, u, k):
    if k == 0:
        return 0.0
    vals = threshold_flux(code, n, param, marg * u, k, diag)
    return float(np.dot(weights, vals))


def orbit_iterate(code, n, param, marg, diag, weights, l, m, s, r,
                  scale, renormalize, xi0, n_steps, tol, stop_on_converge):
    """Iterate the mean-field activation map.

    Returns ``(xi, gain, loss, converged)`` with ``xi`` of length
    ``steps + 1`` where ``steps <= n_steps``.
    """
    marg = np.asarray(marg, dtype=np.float64)
    diag = np.asarray(diag, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    xi = np.empty(n_steps + 1, dtype=np.float64)
    gain = np.empty(n_steps, dtype=np.float64)
    loss = np.empty(n_steps, dtype=np.float64)
    x = float(xi0)
    xi[0] = x
    converged = False
    steps = 0
    for t in range(n_steps):
        q = _mean_flux(code, n, param, marg, diag, weights, x, l)
        if renormalize:
            g = scale * q * (1.0 - x)
            d = x
            nxt = g
        else:
            rr = _mean_flux(code, n, param, marg, diag, weights, 1.0 - x, m)
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
        converged = abs(nxt - x) < tol
        x = nxt
        if converged and stop_on_converge:
            break
    return xi[:steps + 1].copy(), gain[:steps].copy(), loss[:steps].copy(), converged


def transduce_sync(adjacency, active, l):
    """Synchronous threshold transduction on a 0/1 adjacency matrix.

    ``active`` is modified in place; returns the list of active counts
    (initial count first) until no point flips.
    """
    adj = np.asarray(adjacency, dtype=np.int64)
    act = active
    counts = [int(act.sum())]
    while True:
        pressure = adj @ act.astype(np.int64)
        flips = (act == 0) & (pressure >= l)
        if not flips.any():
            break
        act[flips] = 1
        counts.append(int(act.sum()))
    return counts
