"""Scalar special functions used across the package."""

import numpy as np

_SERIES_CUTOFF = 1e-4


def phi_uniform(alpha):
    """Laplace transform of Uniform[0, 1]: ``(1 - exp(-alpha)) / alpha``.

    Continuous at zero with value 1; a short Taylor series is used for
    ``|alpha| < 1e-4`` to avoid cancellation.  Accepts scalars or arrays.
    """
    a = np.asarray(alpha, dtype=np.float64)
    small = np.abs(a) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, a)
    direct = -np.expm1(-safe) / safe
    series = 1.0 - a / 2.0 + a * a / 6.0 - a ** 3 / 24.0
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def gauss_legendre(n):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_gauss_legendre(breaks, n=64):
    """Gauss-Legendre nodes/weights on [0, 1] split at interior ``breaks``."""
    edges = sorted({0.0, 1.0, *(b for b in breaks if 0.0 < b < 1.0)})
    x0, w0 = gauss_legendre(n)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(lo + (hi - lo) * x0)
        ws.append((hi - lo) * w0)
    return np.concatenate(xs), np.concatenate(ws)
