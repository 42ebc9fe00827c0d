"""Mean-field orbits of the activation probability in discrete time.

The one-step map is

    xi' = xi + (nu(q_l(xi)) + s) (1 - xi) - (nu(r_m(xi)) + r) xi

with ``nu`` the spatial average of a flux.  The renormalized (chaos) map is
``xi' = scale * nu(q_l(xi)) (1 - xi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar
from scipy.special import lambertw

from ._backend import core
from .counting import CountingLaw, Dirac, DomainError, Poisson, kernel_params
from .fluxes import INF, MeanFieldNodes, _threshold_code, mean_induction
from .kernels import Decentral, Kernel

CONVERGENCE_TOL = 1e-12
SWEEP_MAX_STEPS = 100_000
PERIOD_WINDOW = 1000
PERIOD_MAX = 100
PERIOD_TOL = 1e-10
VALIDITY_GRID = 1001


class OrbitConfigError(ValueError):
    """Orbit configuration violates a validity constraint."""


class ChaosFactorError(ValueError):
    """Activation flux is identically zero, so the chaos factor is undefined."""


@dataclass(frozen=True)
class OrbitConfig:
    """Mean-field orbit setup.

    ``xi0`` defaults to the mean induction probability ``nu(g_k)`` when only
    ``k`` is given.  ``m = inf`` (default) switches density deactivation
    off; ``r`` and ``s`` are external deactivation and activation.
    ``scale`` fixes the renormalization factor; ``None`` computes it.
    """

    law: CountingLaw
    kernel: Kernel
    l: float = 1
    m: float = INF
    r: float = 0.0
    s: float = 0.0
    self_interaction: bool = True
    renormalize: bool = False
    xi0: float | None = None
    k: int | None = None
    n_steps: int = 1000
    scale: float | None = None

    def __post_init__(self):
        for name in ("l", "m"):
            try:
                _threshold_code(getattr(self, name))
            except DomainError as exc:
                raise OrbitConfigError(str(exc)) from None
        for name in ("r", "s"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise OrbitConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.xi0 is None and self.k is None:
            raise OrbitConfigError("give xi0 or an induction threshold k")
        if self.xi0 is not None and not 0.0 <= self.xi0 <= 1.0:
            raise OrbitConfigError(f"xi0 must lie in [0, 1], got {self.xi0}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise OrbitConfigError("n_steps must be a non-negative integer")
        if self.scale is not None and not self.scale >= 1.0:
            raise OrbitConfigError("scale must be >= 1")
        if not self.renormalize:
            self.check()

    @property
    def initial(self) -> float:
        if self.xi0 is not None:
            return float(self.xi0)
        return mean_induction(self.law, self.kernel, self.k, self.self_interaction)

    def nodes(self) -> MeanFieldNodes:
        return MeanFieldNodes.build(self.kernel, self.self_interaction)

    def check(self, grid: int = VALIDITY_GRID):
        """``sup_u nu(q_l(u)) + s <= 1`` and ``sup_u nu(r_m(u)) + r <= 1``."""
        us = np.linspace(0.0, 1.0, grid)
        gain, loss = mean_fluxes(self, us)
        sup_g = float(np.max(gain)) + self.s
        sup_d = float(np.max(loss)) + self.r
        if sup_g > 1.0 + 1e-12:
            raise OrbitConfigError(f"sup nu(q_l) + s = {sup_g:.6g} exceeds 1")
        if sup_d > 1.0 + 1e-12:
            raise OrbitConfigError(f"sup nu(r_m) + r = {sup_d:.6g} exceeds 1")
        return sup_g, sup_d

    def to_dict(self):
        return {
            "law": self.law.to_dict(), "kernel": self.kernel.to_dict(),
            "l": "inf" if self.l == INF else int(self.l),
            "m": "inf" if self.m == INF else int(self.m),
            "r": self.r, "s": self.s, "self_interaction": self.self_interaction,
            "renormalize": self.renormalize, "xi0": self.xi0, "k": self.k,
            "n_steps": int(self.n_steps), "scale": self.scale,
        }


def mean_fluxes(config: OrbitConfig, u):
    """``nu(q_l(u))`` and ``nu(r_m(u))`` on an array of activation levels."""
    from .fluxes import threshold_flux

    nodes = config.nodes()
    u = np.atleast_1d(np.asarray(u, float))
    gain = np.zeros(u.shape)
    loss = np.zeros(u.shape)
    if config.l != INF:
        vals = threshold_flux(config.law, np.outer(u, nodes.marg), config.l, nodes.diag[None, :])
        gain = vals @ nodes.weights
    if config.m != INF:
        vals = threshold_flux(config.law, np.outer(1.0 - u, nodes.marg), config.m,
                              nodes.diag[None, :])
        loss = vals @ nodes.weights
    return gain, loss


@dataclass
class OrbitTrace:
    xi: np.ndarray
    gain: np.ndarray
    loss: np.ndarray
    converged: bool
    fixed_point: float | None = None
    period: int | None = None
    scale: float | None = None

    @property
    def fluxes(self):
        return np.column_stack([self.gain, self.loss])


def _run(config: OrbitConfig, xi0, n_steps, stop_on_converge, scale=1.0):
    kind, n, prm = kernel_params(config.law)
    nodes = config.nodes()
    return core.orbit_iterate(
        kind, n, prm, nodes.marg, nodes.diag, nodes.weights,
        _threshold_code(config.l), _threshold_code(config.m),
        float(config.s), float(config.r), float(scale), bool(config.renormalize),
        float(xi0), int(n_steps), CONVERGENCE_TOL, bool(stop_on_converge))


def detect_period(xi, window=PERIOD_WINDOW, max_period=PERIOD_MAX, tol=PERIOD_TOL):
    """Smallest period ``p <= max_period`` of the last ``window`` iterates,
    or ``None``."""
    tail = np.asarray(xi[-window:], float)
    for p in range(1, min(max_period, tail.size - 1) + 1):
        if np.max(np.abs(tail[p:] - tail[:-p])) <= tol:
            return p
    return None


def orbit(config: OrbitConfig, stop_on_converge: bool = False) -> OrbitTrace:
    """Iterate the activation map ``n_steps`` times from ``xi0``.

    Convergence is declared when ``|xi_{n+1} - xi_n| < 1e-12``; with
    ``stop_on_converge`` the iteration stops there.
    """
    scale = 1.0
    if config.renormalize:
        scale = config.scale if config.scale is not None else chaos_factor(
            config.law, config.kernel, config.l, config.self_interaction)
    xi, gain, loss, conv = _run(config, config.initial, config.n_steps, stop_on_converge, scale)
    return OrbitTrace(xi, gain, loss, bool(conv), float(xi[-1]) if conv else None,
                      scale=scale if config.renormalize else None)


def deactivation_orbit(config: OrbitConfig) -> np.ndarray:
    """Orbit of the inactive fraction ``1 - xi`` iterated directly.

    Uses the mirrored recursion ``d' = d - (nu(q_l) + s) d + (nu(r_m) + r)(1 - d)``
    with fluxes evaluated at the activation level ``1 - d``.
    """
    d = 1.0 - config.initial
    out = [d]
    for _ in range(int(config.n_steps)):
        g, lo = mean_fluxes(config, 1.0 - d)
        d = d - (g[0] + config.s) * d + (lo[0] + config.r) * (1.0 - d)
        d = min(max(d, 0.0), 1.0)
        out.append(d)
    return np.array(out)


@dataclass
class SweepEntry:
    value: float
    fixed_point: float | None
    last: float
    converged: bool
    steps: int
    period: int | None = None

    @property
    def status(self):
        if self.converged:
            return "converged"
        return "periodic" if self.period else "oscillatory"


def fixed_point_sweep(config: OrbitConfig, parameter: str, values, warm_start: bool = False,
                      max_steps: int = SWEEP_MAX_STEPS) -> list[SweepEntry]:
    """Terminal activation for each value of ``parameter`` (r, s, m or l).

    Each run iterates to convergence (at most ``max_steps``).  With
    ``warm_start`` a run starts at the previous run's terminal state, so
    sweeping up and then down exposes hysteresis.  Runs that do not settle
    are scanned for a cycle of period at most 100.
    """
    if parameter not in ("r", "s", "m", "l"):
        raise DomainError(f"sweep parameter must be one of r, s, m, l; got {parameter!r}")
    out = []
    xi0 = config.initial
    for v in values:
        if parameter in ("m", "l"):
            v = INF if v == INF or v is None else int(v)
        cfg = replace(config, **{parameter: v})
        xi, _, _, conv = _run(cfg, xi0, max_steps, True)
        last = float(xi[-1])
        period = None if conv else detect_period(xi)
        out.append(SweepEntry(v, last if conv else None, last, bool(conv), xi.size - 1, period))
        if warm_start:
            xi0 = last
    return out


def hysteresis_loop(config: OrbitConfig, parameter: str, values):
    """Warm up-sweep and warm down-sweep over ``values``.

    Returns ``(values, up, down, area)`` with ``area`` the trapezoid
    integral of ``up - down`` over the parameter grid.
    """
    values = np.asarray(sorted(values), float)
    up = fixed_point_sweep(config, parameter, values, warm_start=True)
    start = replace(config, xi0=up[-1].last)
    down = fixed_point_sweep(start, parameter, values[::-1], warm_start=True)[::-1]
    up_v = np.array([e.last for e in up])
    down_v = np.array([e.last for e in down])
    area = float(trapezoid(up_v - down_v, values))
    return values, up_v, down_v, area


def _renormalized_profile(law, kernel, l, self_interaction):
    probe = OrbitConfig(law, kernel, l=l, xi0=0.0, self_interaction=self_interaction,
                        renormalize=True, n_steps=0)

    def f(u):
        g, _ = mean_fluxes(probe, u)
        return g * (1.0 - np.atleast_1d(u))

    return f


def chaos_factor_closed_form(c: float, p: float, self_weight: float) -> float:
    """Chaos factor for Poisson(c) points, a constant kernel ``p`` and
    threshold 1.

    Maximizes ``(1 - (1 - w) exp(-c p u)) (1 - u)`` in closed form with the
    principal product logarithm; ``w`` is the self-interaction weight.
    """
    cp = c * p
    w = float(lambertw(math.exp(cp + 1.0) / (1.0 - self_weight)).real)
    return cp * w / (w - 1.0) ** 2


def chaos_factor(law, kernel, l=1, self_interaction=True, scan_points=10_000,
                 tol=1e-10, check_closed_form=True) -> float:
    """Reciprocal of ``sup_{u in (0, 1]} nu(q_l(u)) (1 - u)``.

    Coarse scan on ``scan_points`` levels, refined by golden-section search
    around the best scan point.  For Poisson points on a constant kernel with
    ``l = 1`` the closed form is evaluated as well and must agree to 1e-9.

    Raises
    ------
    ChaosFactorError
        If the activation flux vanishes on the whole scan.
    """
    if l == INF:
        raise ChaosFactorError("infinite threshold gives zero activation flux")
    f = _renormalized_profile(law, kernel, l, self_interaction)
    us = np.linspace(0.0, 1.0, scan_points + 1)[1:]
    vals = f(us)
    i = int(np.argmax(vals))
    if vals[i] <= 0.0:
        raise ChaosFactorError("activation flux is identically zero")
    best = vals[i]
    if 0 < i < us.size - 1:
        res = minimize_scalar(lambda u: -float(f(u)[0]), bracket=(us[i - 1], us[i], us[i + 1]),
                              method="golden", tol=tol)
        best = max(best, -float(res.fun))
    factor = 1.0 / best
    if (check_closed_form and isinstance(law, Poisson) and isinstance(kernel, Decentral)
            and l == 1):
        w = kernel.p if self_interaction else 0.0
        closed = chaos_factor_closed_form(law.c, kernel.p, w)
        if abs(closed - factor) > 1e-9:
            raise ArithmeticError(
                f"chaos factor scan {factor!r} disagrees with closed form {closed!r}")
    return factor


@dataclass
class ChaoticOrbit:
    trace: OrbitTrace
    scale: float
    map_u: np.ndarray
    map_values: np.ndarray


def chaotic_orbit(config: OrbitConfig, grid: int = 1001) -> ChaoticOrbit:
    """Iterate the renormalized map and sample it on ``grid`` levels for
    cobweb plots."""
    if not config.renormalize:
        config = replace(config, renormalize=True)
    scale = config.scale if config.scale is not None else chaos_factor(
        config.law, config.kernel, config.l, config.self_interaction)
    config = replace(config, scale=scale)
    trace = orbit(config)
    us = np.linspace(0.0, 1.0, grid)
    g, _ = mean_fluxes(config, us)
    values = np.clip(scale * g * (1.0 - us), 0.0, 1.0)
    return ChaoticOrbit(trace, scale, us, values)


@dataclass
class ToleranceEntry:
    xi0: float
    n_required: int | None
    flagged: bool = False


def iterations_to_tolerance(config: OrbitConfig, epsilon: float, initial_grid,
                            cap: int = 1_000_000, chunk: int = 4096) -> list[ToleranceEntry]:
    """Smallest ``n`` with ``1 - xi_n < epsilon`` for each start in
    ``initial_grid``; entries that stall or hit ``cap`` are flagged."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    out = []
    for x0 in initial_grid:
        x, n, found = float(x0), 0, None
        while n <= cap:
            if 1.0 - x < epsilon:
                found = n
                break
            xi, _, _, conv = _run(config, x, min(chunk, cap - n + 1), False)
            hit = np.flatnonzero(1.0 - xi < epsilon)
            if hit.size:
                found = n + int(hit[0])
                break
            n += xi.size - 1
            x = float(xi[-1])
            if conv:
                break
        if found is not None and found > cap:
            found = None
        out.append(ToleranceEntry(float(x0), found, found is None))
    return out


def sis_step(xi, beta, r):
    """Discrete SIS recursion ``xi + beta xi (1 - xi) - r xi``."""
    return xi + beta * xi * (1.0 - xi) - r * xi


def sis_config(beta: float, r: float, xi0: float, n_steps: int) -> OrbitConfig:
    """Orbit setup that reduces to the SIS recursion: one point per draw,
    constant kernel ``beta``, unit threshold, no self-interaction."""
    return OrbitConfig(Dirac(1), Decentral(beta), l=1, r=r, self_interaction=False,
                       xi0=xi0, n_steps=n_steps)


def logistic_config(xi0: float, n_steps: int) -> OrbitConfig:
    """Renormalized SIS setup with complete deactivation; the chaos factor is
    exactly 4 and the map is the logistic map ``4 xi (1 - xi)``."""
    return OrbitConfig(Dirac(1), Decentral(1.0), l=1, self_interaction=False,
                       renormalize=True, xi0=xi0, n_steps=n_steps)
