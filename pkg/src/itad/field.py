"""Solvers for the activation field equation on a grid over [0, 1].

Continuous time uses classical fixed-step RK4 applied node by node.  The
transport variant adds first-order upwind advection stepped with explicit
Euler; ``scheme="rk4"`` switches it to the RK4 stepper (method of lines),
which is also what ``C1 = 0`` falls back to, so the zero-velocity limit
reproduces the reaction-only solver exactly.  Discrete time iterates the map
``P' = P + q (1 - P) - r P``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .counting import CountingLaw, DomainError
from .fluxes import INF, FluxSpec, MeanFieldNodes, threshold_flux
from .kernels import Kernel, snap_grid_points

CLAMP_TOL = 1e-9
BLOWUP_LEVEL = 2.0
MAX_SAVED_ROWS = 1000


class ConfigError(ValueError):
    """Invalid solver configuration."""


class IntegrationError(RuntimeError):
    """A step left [0, 1] by more than the clamp tolerance."""


@dataclass
class FieldConfig:
    law: CountingLaw
    kernel: Kernel
    flux: FluxSpec
    grid_points: int = 201
    t_end: float = 10.0
    dt: float = 1e-3
    mode: str = "continuous"
    C1: float = 0.0
    C2: float = 1.0
    C3: float = 1.0
    initial: object = None
    save_every: int | None = None
    snap_grid: bool = True
    scheme: str = "auto"

    def __post_init__(self):
        if self.scheme not in ("auto", "euler", "rk4"):
            raise ConfigError(f"scheme must be 'auto', 'euler' or 'rk4', got {self.scheme!r}")
        if self.mode not in ("continuous", "discrete"):
            raise ConfigError(f"mode must be 'continuous' or 'discrete', got {self.mode!r}")
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise ConfigError("grid_points must be an integer >= 2")
        if self.snap_grid:
            self.grid_points = snap_grid_points(int(self.grid_points), self.kernel)
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.mode == "discrete":
            if int(self.t_end) != self.t_end:
                raise ConfigError("discrete mode takes an integer iteration count as t_end")
            self.dt = 1.0
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.dt > self.t_end:
            raise ConfigError("dt must not exceed t_end")
        if self.C1 < 0:
            raise ConfigError("C1 must be >= 0")
        if self.C2 <= 0 or self.C3 <= 0:
            raise ConfigError("C2 and C3 must be positive")
        if self.C1 > 0 and self.cfl > 1.0 + 1e-12:
            raise ConfigError(f"CFL ratio C1*dt/dx = {self.cfl:.4g} exceeds 1")
        if self.save_every is not None and self.save_every < 1:
            raise ConfigError("save_every must be >= 1")
        try:
            self.flux.check(self.law, self.kernel)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def dx(self) -> float:
        return 1.0 / (self.grid_points - 1)

    @property
    def cfl(self) -> float:
        return self.C1 * self.dt / self.dx

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def stride(self) -> int:
        if self.save_every is not None:
            return int(self.save_every)
        return max(1, math.ceil(self.n_steps / MAX_SAVED_ROWS))

    def xs(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_points)

    def to_dict(self) -> dict:
        init = self.initial
        if isinstance(init, np.ndarray):
            init = init.tolist()
        return {
            "law": self.law.to_dict(), "kernel": self.kernel.to_dict(),
            "flux": self.flux.to_dict(),
            "solver": {
                "mode": self.mode, "dt": self.dt, "t_end": self.t_end,
                "grid_points": self.grid_points, "C1": self.C1, "C2": self.C2,
                "C3": self.C3, "initial": init, "save_every": self.stride,
                "scheme": self.scheme,
            },
        }


@dataclass
class FieldSolution:
    times: np.ndarray
    xs: np.ndarray
    P: np.ndarray
    Q: np.ndarray | None = None
    G: np.ndarray | None = None
    H: np.ndarray | None = None
    frontier: list | None = None
    clamped: int = 0
    blowup_time: float | None = None
    info: dict = field(default_factory=dict)


class _Reaction:
    """Right-hand side ``(alpha q + a)(1 - P) - (beta r + b) P`` at fixed nodes."""

    def __init__(self, law, marg, selfw, spec: FluxSpec):
        self.law = law
        self.marg = np.asarray(marg, float)
        self.selfw = np.asarray(selfw, float)
        self.spec = spec

    def fluxes(self, P):
        s = self.spec
        u = np.clip(P, 0.0, 1.0)
        q = np.full_like(u, s.a)
        r = np.full_like(u, s.b)
        if s.l != INF and s.alpha != 0.0:
            q += s.alpha * threshold_flux(self.law, self.marg * u, s.l, self.selfw)
        if s.m != INF and s.beta != 0.0:
            r += s.beta * threshold_flux(self.law, self.marg * (1.0 - u), s.m, self.selfw)
        return q, r

    def __call__(self, P):
        q, r = self.fluxes(P)
        return q * (1.0 - P) - r * P


def _node_data(config: FieldConfig, xs):
    marg = np.asarray(config.kernel.marginal(xs), float)
    if config.flux.self_interaction:
        selfw = np.asarray(config.kernel.diag(xs), float)
    else:
        selfw = np.zeros_like(xs)
    return marg, selfw


def initial_field(config: FieldConfig, xs=None) -> np.ndarray:
    """``P(0, x)``: the induction probability ``p_k(x)`` unless overridden."""
    xs = config.xs() if xs is None else xs
    if config.initial is not None:
        return np.broadcast_to(np.asarray(config.initial, float), xs.shape).copy()
    marg, selfw = _node_data(config, xs)
    return np.asarray(threshold_flux(config.law, marg, config.flux.k, selfw), float)


def _clamp(P, t, counter):
    lo, hi = P.min(), P.max()
    if lo < -CLAMP_TOL or hi > 1.0 + CLAMP_TOL:
        raise IntegrationError(f"P left [0, 1] at t={t:.6g}: range [{lo:.3g}, {hi:.3g}]")
    out = (P < 0.0) | (P > 1.0)
    if out.any():
        counter[0] += int(out.sum())
        np.clip(P, 0.0, 1.0, out=P)


def _rk4(rhs, P, dt):
    k1 = rhs(P)
    k2 = rhs(P + 0.5 * dt * k1)
    k3 = rhs(P + 0.5 * dt * k2)
    k4 = rhs(P + dt * k3)
    return P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _euler(rhs, P, dt):
    return P + dt * rhs(P)


def _march(config, rhs, P0, check, stepper=_rk4):
    n = config.n_steps
    stride = config.stride
    rows = [P0.copy()]
    times = [0.0]
    P = P0.copy()
    counter = [0]
    blowup = None
    for step in range(1, n + 1):
        P = stepper(rhs, P, config.dt)
        t = step * config.dt
        if check == "strict":
            _clamp(P, t, counter)
        else:
            if not np.all(np.isfinite(P)) or np.max(np.abs(P)) > BLOWUP_LEVEL:
                blowup = t
                rows.append(P.copy())
                times.append(t)
                break
            near = (P < 0.0) & (P >= -CLAMP_TOL) | (P > 1.0) & (P <= 1.0 + CLAMP_TOL)
            if near.any():
                counter[0] += int(near.sum())
                P[near] = np.clip(P[near], 0.0, 1.0)
        if step % stride == 0 or step == n:
            rows.append(P.copy())
            times.append(t)
    return np.array(times), np.array(rows), counter[0], blowup


def solve_spatiotemporal(config: FieldConfig) -> FieldSolution:
    """Integrate ``dP/dt = q_l(x, P)(1 - P) - r_m(x, P) P`` independently at
    every grid node with RK4."""
    if config.C1 != 0:
        raise ConfigError("solve_spatiotemporal requires C1 = 0; use solve_transport")
    if config.mode == "discrete":
        return solve_discrete(config)
    xs = config.xs()
    marg, selfw = _node_data(config, xs)
    rhs = _Reaction(config.law, marg, selfw, config.flux)
    times, P, clamped, _ = _march(config, rhs, initial_field(config, xs), "strict")
    return FieldSolution(times, xs, P, clamped=clamped)


def solve_discrete(config: FieldConfig) -> FieldSolution:
    """Iterate ``P(t+1) = q (1 - P) + (1 - r) P`` for ``t_end`` steps."""
    if config.mode != "discrete":
        config = replace(config, mode="discrete", t_end=max(1, int(round(config.t_end))))
    xs = config.xs()
    marg, selfw = _node_data(config, xs)
    react = _Reaction(config.law, marg, selfw, config.flux)
    P = initial_field(config, xs)
    n = int(config.t_end)
    stride = config.stride
    rows, times = [P.copy()], [0.0]
    counter = [0]
    for t in range(1, n + 1):
        q, r = react.fluxes(P)
        P = q * (1.0 - P) + (1.0 - r) * P
        _clamp(P, t, counter)
        if t % stride == 0 or t == n:
            rows.append(P.copy())
            times.append(float(t))
    return FieldSolution(np.array(times), xs, np.array(rows), clamped=counter[0])


def solve_transport(config: FieldConfig) -> FieldSolution:
    """ITAD wave equation ``P_t + C1 P_x = reaction`` with upwind differences.

    Node ``x = 0`` is the inflow boundary and follows the reaction-only
    equation.  Integration stops when ``|P|`` exceeds 2; the solution then
    carries ``blowup_time``.  ``scheme="auto"`` steps with explicit Euler
    when ``C1 > 0`` and with RK4 when ``C1 = 0``.
    """
    if config.mode != "continuous":
        raise ConfigError("solve_transport requires continuous mode")
    xs = config.xs()
    marg, selfw = _node_data(config, xs)
    react = _Reaction(config.law, marg, selfw, config.flux)
    v_dx = config.C1 / config.dx

    def rhs(P):
        out = react(P)
        if v_dx:
            out[1:] -= v_dx * (P[1:] - P[:-1])
        return out

    scheme = config.scheme
    if scheme == "auto":
        scheme = "rk4" if config.C1 == 0 else "euler"
    stepper = _rk4 if scheme == "rk4" else _euler
    check = "strict" if config.C1 == 0 else "transport"
    times, P, clamped, blowup = _march(config, rhs, initial_field(config, xs), check, stepper)
    return FieldSolution(times, xs, P, clamped=clamped, blowup_time=blowup)


def solve(config: FieldConfig) -> FieldSolution:
    """Dispatch on mode and transport velocity."""
    if config.mode == "discrete":
        return solve_discrete(config)
    if config.C1 > 0:
        return solve_transport(config)
    return solve_spatiotemporal(config)


@dataclass
class TemporalSolution:
    times: np.ndarray
    P: np.ndarray


def solve_temporal(config: FieldConfig) -> TemporalSolution:
    """Marginal (space-averaged) field equation for a scalar ``P(t)``."""
    s = config.flux
    nodes = MeanFieldNodes.build(config.kernel, s.self_interaction)

    def fluxes(u):
        u = min(max(u, 0.0), 1.0)
        q = s.a + (s.alpha * nodes.integrate(config.law, s.l, u) if s.l != INF else 0.0)
        r = s.b + (s.beta * nodes.integrate(config.law, s.m, 1.0 - u) if s.m != INF else 0.0)
        return q, r

    def rhs(u):
        q, r = fluxes(u)
        return q * (1.0 - u) - r * u

    if config.initial is not None:
        P = float(np.mean(config.initial))
    else:
        P = nodes.integrate(config.law, s.k, 1.0)
    out = [P]
    if config.mode == "discrete":
        for _ in range(int(config.t_end)):
            q, r = fluxes(P)
            P = min(max(q * (1.0 - P) + (1.0 - r) * P, 0.0), 1.0)
            out.append(P)
        return TemporalSolution(np.arange(len(out), dtype=float), np.array(out))
    dt = config.dt
    for _ in range(config.n_steps):
        k1 = rhs(P)
        k2 = rhs(P + 0.5 * dt * k1)
        k3 = rhs(P + 0.5 * dt * k2)
        k4 = rhs(P + dt * k3)
        P = P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if P < -CLAMP_TOL or P > 1.0 + CLAMP_TOL:
            raise IntegrationError(f"temporal P left [0, 1]: {P}")
        P = min(max(P, 0.0), 1.0)
        out.append(P)
    return TemporalSolution(dt * np.arange(len(out)), np.array(out))


def entropy(P):
    """``P log(1/P)`` with the limit 0 at ``P = 0``."""
    P = np.asarray(P, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = -P * np.log(P)
    return np.where(P > 0.0, H, 0.0)


def frontier(times, xs, P, level=0.5, atol=1e-12):
    """Crossings of ``P = level`` per time row.

    Returns a list of ``(t, x_cross, branch_index)`` tuples.  Nodes within
    ``atol`` of the level count as crossings; sign changes between nodes
    are located by linear interpolation.
    """
    out = []
    for t, row in zip(times, P):
        d = row - level
        on = np.abs(d) <= atol
        crossings = [float(x) for x in xs[on]]
        s = np.where(on, 0.0, np.sign(d))
        idx = np.flatnonzero(s[:-1] * s[1:] < 0)
        for j in idx:
            x0, x1 = xs[j], xs[j + 1]
            crossings.append(float(x0 + (x1 - x0) * d[j] / (d[j] - d[j + 1])))
        crossings.sort()
        out.extend((float(t), x, b) for b, x in enumerate(crossings))
    return out


def derived_fields(solution: FieldSolution, config: FieldConfig) -> FieldSolution:
    """Attach wave ``Q``, energy ``G``, entropy ``H`` and the activation
    frontier to a solved field."""
    t, xs, P = solution.times, solution.xs, solution.P
    dPdx = np.gradient(P, xs, axis=1, edge_order=1)
    Qt = config.C1 * dPdx
    if len(t) > 1:
        Q = cumulative_trapezoid(Qt, t, axis=0, initial=0.0)
    else:
        Q = np.zeros_like(P)
    Qx = np.gradient(Q, xs, axis=1, edge_order=1)
    energy_rate = 0.5 * config.C2 * Qt ** 2 + 0.5 * config.C3 * Qx ** 2
    if len(t) > 1:
        G = cumulative_trapezoid(energy_rate, t, axis=0, initial=0.0)
    else:
        G = np.zeros_like(P)
    solution.Q = Q
    solution.G = G
    solution.H = entropy(P)
    solution.frontier = frontier(t, xs, P)
    return solution


def telegrapher_residuals(solution: FieldSolution, a: float, v: float):
    """Interior residuals of the telegrapher relations on a solved field.

    First order: ``P_t + v P_x + a (2P - 1)``; second order:
    ``P_tt - v^2 P_xx + 2 a P_t``.  Central differences in both
    directions over interior rows and columns; returns the two max-norms.
    """
    t, xs, P = solution.times, solution.xs, solution.P
    if len(t) < 3 or len(xs) < 3:
        raise DomainError("need at least three rows and columns")
    dt = t[1] - t[0]
    dx = xs[1] - xs[0]
    Pc = P[1:-1, 1:-1]
    Pt = (P[2:, 1:-1] - P[:-2, 1:-1]) / (2 * dt)
    Px = (P[1:-1, 2:] - P[1:-1, :-2]) / (2 * dx)
    first = Pt + v * Px + a * (2.0 * Pc - 1.0)
    Ptt = (P[2:, 1:-1] - 2 * Pc + P[:-2, 1:-1]) / dt ** 2
    Pxx = (P[1:-1, 2:] - 2 * Pc + P[1:-1, :-2]) / dx ** 2
    second = Ptt - v * v * Pxx + 2 * a * Pt
    return float(np.max(np.abs(first))), float(np.max(np.abs(second)))



@dataclass
class SteadyState:
    xs: np.ndarray
    P: np.ndarray
    residual: float
    steps: int
    converged: bool


def _reaction_for(config):
    xs = config.xs()
    marg, selfw = _node_data(config, xs)
    return xs, _Reaction(config.law, marg, selfw, config.flux)


def march_to_steady(config: FieldConfig, tol: float = 1e-11, max_steps: int = 100_000,
                    P0=None) -> SteadyState:
    """March the reaction equation (RK4 or the discrete map) until the
    flux residual ``max |q (1 - P) - r P|`` drops to ``tol``."""
    xs, react = _reaction_for(config)
    P = initial_field(config, xs) if P0 is None else np.array(P0, float)
    counter = [0]
    res = float(np.max(np.abs(react(P))))
    step = 0
    while res > tol and step < max_steps:
        step += 1
        if config.mode == "discrete":
            q, r = react.fluxes(P)
            P = q * (1.0 - P) + (1.0 - r) * P
        else:
            P = _rk4(react, P, config.dt)
        _clamp(P, step * config.dt, counter)
        res = float(np.max(np.abs(react(P))))
    return SteadyState(xs, P, res, step, res <= tol)


def omega_limit(config: FieldConfig, scan_points: int = 16385) -> SteadyState:
    """Limit of the continuous reaction equation as ``t -> inf`` per node.

    Each node obeys an autonomous scalar ODE ``dP/dt = R(P)``, so its limit
    is the first zero of ``R`` met from ``P(0)`` in the direction of
    ``sign R(P(0))``.  Zeros are bracketed on a uniform scan of [0, 1] and
    refined with Brent's method.
    """
    from scipy.optimize import brentq

    xs, react = _reaction_for(config)
    P0 = initial_field(config, xs)
    grid = np.linspace(0.0, 1.0, scan_points)
    out = P0.copy()
    for j in range(xs.size):
        one = _Reaction(react.law, react.marg[j:j + 1], react.selfw[j:j + 1], react.spec)

        def R(p):
            return float(one(np.array([p]))[0])

        start = R(P0[j])
        if start == 0.0:
            continue
        sign = 1.0 if start > 0 else -1.0
        path = grid[grid > P0[j]] if sign > 0 else grid[grid < P0[j]][::-1]
        vals = one(path)
        hit = np.flatnonzero(sign * vals <= 0.0)
        if hit.size == 0:
            out[j] = 1.0 if sign > 0 else 0.0
            continue
        i = hit[0]
        hi = path[i]
        lo = P0[j] if i == 0 else path[i - 1]
        if vals[i] == 0.0:
            out[j] = hi
        else:
            out[j] = brentq(R, min(lo, hi), max(lo, hi), xtol=1e-16, rtol=1e-15, maxiter=200)
    res = float(np.max(np.abs(react(out))))
    return SteadyState(xs, out, res, 0, True)


@dataclass
class TelegrapherLevel:
    grid_points: int
    dx: float
    dt: float
    residual_first: float
    residual_second: float

    @property
    def ratio_to_dx(self) -> float:
        return self.residual_first / self.dx


def telegrapher_check(law, kernel, k, a, v, grids=(51, 101, 201, 401), t_end=1.0, cfl=1.0,
                      self_interaction=True):
    """Telegrapher reduction on successively refined grids.

    Runs the transport solver with both thresholds infinite, equal forcings
    ``a = b`` and velocity ``C1 = v`` at ``dt = cfl * dx / v``, and returns
    the interior residual of both telegrapher relations per grid.
    """
    if not 0.0 < a <= 1.0:
        raise ConfigError("telegrapher forcing a must lie in (0, 1]")
    if not v > 0.0:
        raise ConfigError("telegrapher velocity v must be positive")
    spec = FluxSpec(k=k, l=INF, m=INF, a=a, b=a, self_interaction=self_interaction)
    out = []
    for g in grids:
        dx = 1.0 / (g - 1)
        dt = cfl * dx / v
        cfg = FieldConfig(law, kernel, spec, grid_points=int(g), t_end=t_end, dt=dt, C1=v,
                          save_every=1, snap_grid=False)
        sol = solve_transport(cfg)
        if sol.blowup_time is not None:
            raise IntegrationError(f"transport blew up at t={sol.blowup_time:.6g}")
        r1, r2 = telegrapher_residuals(sol, a, v)
        out.append(TelegrapherLevel(int(g), dx, dt, r1, r2))
    return out
