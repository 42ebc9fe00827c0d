"""Degree-field statistics, induction probability and transduction fluxes.

Thresholds are positive integers or ``math.inf``; an infinite threshold
gives an identically zero flux.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import core
from .counting import CountingLaw, DomainError, kernel_params
from .kernels import Kernel
from .special import composite_gauss_legendre

INF = math.inf
GL_NODES = 64


class FluxSpecError(ValueError):
    """Forcing/overloading pair violates its sup-constraint."""


def _threshold_code(t) -> int:
    if t == INF or t is None:
        return 0
    if int(t) != t or t < 1:
        raise DomainError(f"threshold must be an integer >= 1 or inf, got {t}")
    return int(t)


def parse_threshold(value):
    """JSON-friendly threshold: integer, ``"inf"`` or ``None`` (infinite)."""
    if value is None or (isinstance(value, str) and value.lower() in ("inf", "infinity")):
        return INF
    if isinstance(value, float) and math.isinf(value):
        return INF
    return int(value)


def threshold_to_json(value):
    return "inf" if value == INF else int(value)


def threshold_flux(law: CountingLaw, thin, k, selfw):
    """``P(D >= k) + selfw P(D = k - 1)`` with ``D`` the law thinned by
    ``thin`` (arrays broadcast together)."""
    thin, selfw = np.broadcast_arrays(np.asarray(thin, float), np.asarray(selfw, float))
    shape = thin.shape
    kind, n, prm = kernel_params(law)
    flat = np.clip(thin.ravel(), 0.0, 1.0)
    vals = core.threshold_flux(kind, n, prm, flat, _threshold_code(k), selfw.ravel())
    out = np.reshape(vals, shape)
    return float(out) if out.ndim == 0 else out


def _selfw(kernel, x, self_interaction):
    return kernel.diag(x) if self_interaction else np.zeros(np.shape(x))


def induction_p(law, kernel, k, x, self_interaction=True):
    """Initial activation probability ``p_k(x)``."""
    return threshold_flux(law, kernel.marginal(x), k, _selfw(kernel, x, self_interaction))


def flux_q(law, kernel, l, x, u, self_interaction=True):
    """Activating flux ``q_l(x, u)``: threshold exceedance of the degree
    towards active points when a fraction ``u`` is active."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise DomainError("activation probability u must lie in [0, 1]")
    return threshold_flux(law, kernel.marginal(x) * u, l, _selfw(kernel, x, self_interaction))


def flux_r(law, kernel, m, x, u, self_interaction=True):
    """Deactivating flux ``r_m(x, u)``; mirror of :func:`flux_q` with the
    inactive fraction ``1 - u``."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise DomainError("activation probability u must lie in [0, 1]")
    return threshold_flux(law, kernel.marginal(x) * (1.0 - u), m,
                          _selfw(kernel, x, self_interaction))


@dataclass(frozen=True)
class MeanFieldNodes:
    """Quadrature nodes over [0, 1] with precomputed marginals and self
    weights; a single node of weight one for x-independent kernels."""

    xs: np.ndarray
    weights: np.ndarray
    marg: np.ndarray
    diag: np.ndarray

    @classmethod
    def build(cls, kernel: Kernel, self_interaction=True, n=GL_NODES):
        if kernel.x_independent:
            xs = np.array([0.5])
            w = np.array([1.0])
        else:
            xs, w = composite_gauss_legendre(kernel.breakpoints(), n)
        return cls(xs, w, np.asarray(kernel.marginal(xs), float),
                   np.asarray(_selfw(kernel, xs, self_interaction), float))

    def integrate(self, law, threshold, thin_scale):
        """``sum_i w_i flux(marg_i * thin_scale)``."""
        vals = threshold_flux(law, self.marg * thin_scale, threshold, self.diag)
        return float(np.dot(self.weights, vals))


def mean_flux(law, kernel, threshold, u=1.0, self_interaction=True, kind="q", n=GL_NODES):
    """Spatial average of a flux.

    ``kind="q"`` averages ``q_l(., u)``, ``kind="r"`` averages ``r_m(., u)``;
    ``u=1`` with ``kind="q"`` gives the mean induction probability
    ``nu(g_k)``.
    """
    if kind not in ("q", "r"):
        raise DomainError(f"kind must be 'q' or 'r', got {kind!r}")
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u must lie in [0, 1], got {u}")
    if threshold == INF:
        return 0.0
    nodes = MeanFieldNodes.build(kernel, self_interaction, n)
    return nodes.integrate(law, threshold, u if kind == "q" else 1.0 - u)


def mean_induction(law, kernel, k, self_interaction=True):
    """``nu(g_k)``: expected fraction of ``k``-active points."""
    return mean_flux(law, kernel, k, 1.0, self_interaction, "q")


@dataclass(frozen=True)
class DegreeStats:
    mean: float
    variance: float
    covariance: float
    correlation: float
    degenerate: bool = False


def degree_stats(law: CountingLaw, kernel: Kernel, x: float, y: float) -> DegreeStats:
    """Moments of the degree field at ``x`` and its dependence with ``y``.

    A zero variance at either location reports correlation 0 with
    ``degenerate=True``.
    """
    c, d2 = law.mean(), law.variance()
    nx, ny = kernel.marginal(x), kernel.marginal(y)
    var_x = c * nx + (d2 - c) * nx * nx
    var_y = c * ny + (d2 - c) * ny * ny
    if x == y:
        cov = var_x
    else:
        cov = c * kernel.product_marginal(x, y) + (d2 - c) * nx * ny
    if var_x <= 0.0 or var_y <= 0.0:
        return DegreeStats(c * nx, max(var_x, 0.0), cov, 0.0, True)
    corr = 1.0 if x == y else cov / math.sqrt(var_x * var_y)
    return DegreeStats(c * nx, var_x, cov, corr)


@dataclass(frozen=True)
class FluxSpec:
    """Thresholds, forcings and overloadings of the field equation.

    Fluxes enter as ``alpha * q_l + a`` (activation) and
    ``beta * r_m + b`` (deactivation).
    """

    k: int = 1
    l: float = 1
    m: float = INF
    a: float = 0.0
    b: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0
    self_interaction: bool = True

    def __post_init__(self):
        _threshold_code(self.k)
        if self.k == INF:
            raise DomainError("induction threshold k must be finite")
        _threshold_code(self.l)
        _threshold_code(self.m)
        for name in ("a", "b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"forcing {name} must lie in [0, 1], got {v}")
        for name in ("alpha", "beta"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"overloading {name} must be >= 0")

    def check(self, law: CountingLaw, kernel: Kernel, grid: int = 101, tol: float = 1e-12):
        """Verify ``sup (alpha q + a) <= 1`` and ``sup (beta r + b) <= 1`` on a
        ``grid x grid`` lattice of ``(x, u)``."""
        xs = np.linspace(0.0, 1.0, grid)
        X, U = np.meshgrid(xs, xs, indexing="ij")
        q = flux_q(law, kernel, self.l, X, U, self.self_interaction)
        r = flux_r(law, kernel, self.m, X, U, self.self_interaction)
        sup_q = float(np.max(self.alpha * q + self.a))
        sup_r = float(np.max(self.beta * r + self.b))
        if sup_q > 1.0 + tol:
            raise FluxSpecError(f"sup(alpha*q_l + a) = {sup_q:.6g} exceeds 1")
        if sup_r > 1.0 + tol:
            raise FluxSpecError(f"sup(beta*r_m + b) = {sup_r:.6g} exceeds 1")
        return sup_q, sup_r

    def to_dict(self):
        return {
            "k": int(self.k), "l": threshold_to_json(self.l), "m": threshold_to_json(self.m),
            "a": self.a, "b": self.b, "alpha": self.alpha, "beta": self.beta,
            "self_interaction": self.self_interaction,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            k=int(d.get("k", 1)), l=parse_threshold(d.get("l", 1)),
            m=parse_threshold(d.get("m", "inf")), a=float(d.get("a", 0.0)),
            b=float(d.get("b", 0.0)), alpha=float(d.get("alpha", 1.0)),
            beta=float(d.get("beta", 1.0)),
            self_interaction=bool(d.get("self_interaction", True)),
        )
