"""Symmetric density kernels on the unit square.

Each kernel gives the Bernoulli edge probability ``f(x, y)`` between two
point locations in [0, 1] and exposes the integrals the field equations
need: the marginal ``int f(x, z) dz``, the product marginal
``int f(x, z) f(y, z) dz`` and the total mass ``int int f``.
"""
from __future__ import annotations

import inspect

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .counting import DomainError
from .special import phi_uniform

_QUAD_TOL = 1e-13


class CalibrationError(ValueError):
    """Requested kernel mass is outside what the family can attain."""


def _as_unit(name, v):
    arr = np.asarray(v, dtype=np.float64)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _quad(fn, lo=0.0, hi=1.0, points=None):
    val, _ = integrate.quad(fn, lo, hi, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL,
                            limit=200, points=points)
    return val


@dataclass(frozen=True)
class Kernel:
    """Base class; concrete kernels override the ``_f``/``_marg`` hooks."""

    family = "kernel"
    x_independent = False

    def eval(self, x, y):
        """Edge probability ``f(x, y)``."""
        x = _as_unit("x", x)
        y = _as_unit("y", y)
        return _out(self._f(x, y))

    def diag(self, x):
        """Self-interaction probability ``f(x, x)``."""
        x = _as_unit("x", x)
        return _out(self._f(x, x))

    def marginal(self, x):
        x = _as_unit("x", x)
        return _out(self._marg(x))

    def product_marginal(self, x, y):
        x = _as_unit("x", x)
        y = _as_unit("y", y)
        return _out(self._prod(x, y))

    def total_mass(self) -> float:
        a = getattr(self, "a", 0.0)
        # steep marginals near x = 0 for large a
        points = [v for v in (1.0 / a, 10.0 / a) if v < 1.0] if a > 1.0 else None
        return _quad(lambda t: float(self._marg(np.float64(t))), points=points)

    def breakpoints(self) -> tuple[float, ...]:
        """Locations in (0, 1) where the marginal has a kink."""
        return ()

    def _prod(self, x, y):
        xs, ys = np.broadcast_arrays(x, y)
        vals = [
            _quad(lambda z, a=a, b=b: float(self._f(a, z) * self._f(b, z)))
            for a, b in zip(xs.ravel(), ys.ravel())
        ]
        return np.reshape(vals, xs.shape)

    def to_dict(self) -> dict:
        params = {k: getattr(self, k) for k in self.__dataclass_fields__}
        return {"family": self.family, "params": params}


@dataclass(frozen=True)
class Central(Kernel):
    """``f(x, y) = exp(-a x y)``."""

    a: float
    family = "central"

    def __post_init__(self):
        if not self.a >= 0.0:
            raise DomainError(f"central a must be >= 0, got {self.a}")

    def _f(self, x, y):
        return np.exp(-self.a * (x * y))

    def _marg(self, x):
        return phi_uniform(self.a * x)

    def _prod(self, x, y):
        return phi_uniform(self.a * (x + y))


@dataclass(frozen=True)
class CentralRational(Kernel):
    """``f(x, y) = (1 + a x y)**(-d)``."""

    a: float
    d: int = 1
    family = "central_rational"

    def __post_init__(self):
        if not self.a >= 0.0:
            raise DomainError(f"central_rational a must be >= 0, got {self.a}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"central_rational d must be an integer >= 1, got {self.d}")

    def _f(self, x, y):
        return (1.0 + self.a * (x * y)) ** (-self.d)

    def _marg(self, x):
        t = np.asarray(self.a * x, dtype=np.float64)
        safe = np.where(t == 0.0, 1.0, t)
        if self.d == 1:
            val = np.log1p(safe) / safe
        else:
            # int_0^1 (1 + t z)^-d dz = (1 - (1 + t)^(1 - d)) / ((d - 1) t)
            val = -np.expm1((1 - self.d) * np.log1p(safe)) / ((self.d - 1) * safe)
        return np.where(t == 0.0, 1.0, val)


@dataclass(frozen=True)
class Subcentral(Kernel):
    """``f(x, y) = exp(-a (x + y))``."""

    a: float
    family = "subcentral"

    def __post_init__(self):
        if not self.a >= 0.0:
            raise DomainError(f"subcentral a must be >= 0, got {self.a}")

    def _f(self, x, y):
        return np.exp(-self.a * (x + y))

    def _marg(self, x):
        return np.exp(-self.a * x) * phi_uniform(self.a)

    def _prod(self, x, y):
        return np.exp(-self.a * (x + y)) * phi_uniform(2.0 * self.a)

    def total_mass(self):
        return phi_uniform(self.a) ** 2


@dataclass(frozen=True)
class SubcentralRational(Kernel):
    """``f(x, y) = (1 + a x)**-2 (1 + a y)**-2``."""

    a: float
    family = "subcentral_rational"

    def __post_init__(self):
        if not self.a >= 0.0:
            raise DomainError(f"subcentral_rational a must be >= 0, got {self.a}")

    def _f(self, x, y):
        return (1.0 + self.a * x) ** -2 * (1.0 + self.a * y) ** -2

    def _marg(self, x):
        return 1.0 / ((1.0 + self.a) * (1.0 + self.a * x) ** 2)


@dataclass(frozen=True)
class Decentral(Kernel):
    """Constant kernel ``f(x, y) = p``."""

    p: float
    family = "decentral"
    x_independent = True

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"decentral p must lie in [0, 1], got {self.p}")

    def _f(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.p)

    def _marg(self, x):
        return np.full(np.shape(x), self.p)

    def _prod(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.p * self.p)

    def total_mass(self):
        return self.p


@dataclass(frozen=True)
class Local(Kernel):
    """``f(x, y) = q 1(|x - y| <= r)``."""

    q: float
    r: float
    family = "local"

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"local q must lie in [0, 1], got {self.q}")
        if not 0.0 <= self.r <= 1.0:
            raise DomainError(f"local r must lie in [0, 1], got {self.r}")

    def _f(self, x, y):
        return np.where(np.abs(x - y) <= self.r, self.q, 0.0)

    def _window(self, x):
        return np.maximum(0.0, x - self.r), np.minimum(1.0, x + self.r)

    def _marg(self, x):
        lo, hi = self._window(x)
        return self.q * (hi - lo)

    def _prod(self, x, y):
        lo_x, hi_x = self._window(x)
        lo_y, hi_y = self._window(y)
        overlap = np.minimum(hi_x, hi_y) - np.maximum(lo_x, lo_y)
        return self.q * self.q * np.maximum(0.0, overlap)

    def total_mass(self):
        return self.q * (2.0 * self.r - self.r * self.r)

    def breakpoints(self):
        return tuple(b for b in (self.r, 1.0 - self.r) if 0.0 < b < 1.0)


FAMILIES = {
    "central": Central,
    "central_rational": CentralRational,
    "subcentral": Subcentral,
    "subcentral_rational": SubcentralRational,
    "decentral": Decentral,
    "local": Local,
}

_A_BRACKET = (1e-8, 1e6)


def _bisect(mass_of, lo, hi, target, decreasing, tol=1e-12, max_iter=200):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        m = mass_of(mid)
        if abs(m - target) <= tol or mid in (lo, hi):
            return mid
        if (m > target) == decreasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate(family: str, target_mass: float, **fixed) -> Kernel:
    """Kernel of ``family`` whose total mass equals ``target_mass``.

    The free parameter is ``a`` for the central and subcentral families,
    ``r`` for ``local`` (given ``q``) and ``p`` for ``decentral``.

    Raises
    ------
    CalibrationError
        If the target is outside the attainable range of the family.
    """
    if family not in FAMILIES:
        raise DomainError(f"unknown kernel family {family!r}")
    allowed = {"decentral": set(), "local": {"q"}}.get(family)
    if allowed is None:
        allowed = set(inspect.signature(FAMILIES[family]).parameters) - {"a"}
    if set(fixed) - allowed:
        raise DomainError(f"{family} calibration cannot fix {sorted(set(fixed) - allowed)}")
    if family == "decentral":
        if not 0.0 < target_mass <= 1.0:
            raise CalibrationError(f"decentral mass must lie in (0, 1], got {target_mass}")
        return Decentral(target_mass)
    if family == "local":
        q = float(fixed.get("q", 1.0))
        if not 0.0 < target_mass <= q:
            raise CalibrationError(
                f"local kernel with q={q} attains masses in (0, {q}], got {target_mass}")
        r = _bisect(lambda r: Local(q, r).total_mass(), 0.0, 1.0, target_mass,
                    decreasing=False)
        return Local(q, r)

    cls = FAMILIES[family]

    def build(a):
        return cls(a, **fixed)

    lo, hi = _A_BRACKET
    m_hi, m_lo = build(lo).total_mass(), build(hi).total_mass()
    if not m_lo <= target_mass <= m_hi:
        raise CalibrationError(
            f"{family} kernel attains masses in [{m_lo:.6g}, {m_hi:.6g}] for a in "
            f"[{lo:g}, {hi:g}], got {target_mass}")
    a = _bisect(lambda a: build(a).total_mass(), lo, hi, target_mass, decreasing=True)
    return build(a)


def kernel_from_dict(spec: dict) -> Kernel:
    """Kernel from ``{"family", "params"}`` or a calibration request
    ``{"family", "fixed", "target_mass"}``."""
    family = spec["family"].lower()
    if "target_mass" in spec:
        return calibrate(family, float(spec["target_mass"]), **spec.get("fixed", {}))
    if family not in FAMILIES:
        raise DomainError(f"unknown kernel family {family!r}")
    params = dict(spec.get("params", {}))
    if family == "central_rational" and "d" in params:
        params["d"] = int(params["d"])
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {family}: {exc}") from None


def snap_grid_points(n: int, kernel: Kernel, tol: float = 0.1) -> int:
    """Smallest grid size ``>= n`` whose uniform nodes put every kernel
    breakpoint within ``tol`` cells of a node (searched up to ``2 n``)."""
    bps = kernel.breakpoints()
    if not bps:
        return n
    for m in range(n, 2 * n + 1):
        cells = [b * (m - 1) for b in bps]
        if all(abs(c - round(c)) <= tol for c in cells):
            return m
    return n

