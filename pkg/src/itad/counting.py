"""Poisson-type counting laws: pgf, pmf, tail, binomial thinning closure."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import BINOMIAL, NEGBIN, POISSON, core


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


def _check_prob(name, value, lo_open=False):
    if not (0.0 <= value <= 1.0) or (lo_open and value == 0.0):
        bound = "(0, 1]" if lo_open else "[0, 1]"
        raise DomainError(f"{name} must lie in {bound}, got {value}")


@dataclass(frozen=True)
class CountingLaw:
    """Base class for cardinality laws; use the concrete variants."""

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def pgf(self, z: float) -> float:
        return pgf_eval(self, z)

    def pmf(self, j: int) -> float:
        return pmf(self, j)

    def tail(self, j: int) -> float:
        return tail(self, j)

    def thin(self, a: float) -> "CountingLaw":
        return thin(self, a)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Dirac(CountingLaw):
    """Fixed number ``n`` of points.  ``n = 0`` is the empty-count sentinel
    produced by thinning with mass 0."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"Dirac n must be a non-negative integer, got {self.n}")


    def mean(self):
        return float(self.n)

    def variance(self):
        return 0.0

    def to_dict(self):
        return {"family": "dirac", "n": self.n}


@dataclass(frozen=True)
class Binomial(CountingLaw):
    n: int
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"Binomial n must be a positive integer, got {self.n}")
        _check_prob("Binomial p", self.p, lo_open=True)


    def mean(self):
        return self.n * self.p

    def variance(self):
        return self.n * self.p * (1.0 - self.p)

    def to_dict(self):
        return {"family": "binomial", "n": self.n, "p": self.p}


@dataclass(frozen=True)
class Poisson(CountingLaw):
    c: float

    def __post_init__(self):
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise DomainError(f"Poisson c must be positive and finite, got {self.c}")


    def mean(self):
        return self.c

    def variance(self):
        return self.c

    def to_dict(self):
        return {"family": "poisson", "c": self.c}


@dataclass(frozen=True)
class NegativeBinomial(CountingLaw):
    """Counts with pgf ``((1 - p) / (1 - p z))**r`` and mean ``r p / (1 - p)``.

    ``p = 1`` is excluded (infinite mean).
    """

    r: int
    p: float

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise DomainError(f"NegativeBinomial r must be a positive integer, got {self.r}")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"NegativeBinomial p must lie in (0, 1), got {self.p}")


    def mean(self):
        return self.r * self.p / (1.0 - self.p)

    def variance(self):
        return self.r * self.p / (1.0 - self.p) ** 2

    def to_dict(self):
        return {"family": "negative_binomial", "r": self.r, "p": self.p}


def law_from_dict(spec: dict) -> CountingLaw:
    """Build a law from ``{"family": ..., <params>}``."""
    family = spec["family"].lower()
    if family == "dirac":
        return Dirac(int(spec["n"]))
    if family == "binomial":
        return Binomial(int(spec["n"]), float(spec["p"]))
    if family == "poisson":
        return Poisson(float(spec["c"]))
    if family in ("negative_binomial", "negbin"):
        return NegativeBinomial(int(spec["r"]), float(spec["p"]))
    raise DomainError(f"unknown counting law family {spec['family']!r}")


def pgf_eval(law: CountingLaw, z: float) -> float:
    """Probability generating function ``E z**K`` on ``z`` in [0, 1]."""
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"pgf argument must lie in [0, 1], got {z}")
    if isinstance(law, Dirac):
        return z ** law.n
    if isinstance(law, Binomial):
        return (1.0 - law.p + law.p * z) ** law.n
    if isinstance(law, Poisson):
        return math.exp(law.c * (z - 1.0))
    return ((1.0 - law.p) / (1.0 - law.p * z)) ** law.r


def thin(law: CountingLaw, a: float) -> CountingLaw:
    """Law of the count left after keeping each point independently with
    probability ``a``.  Mass 0 gives the ``Dirac(0)`` sentinel."""
    _check_prob("thinning mass a", a)
    if a == 0.0:
        return Dirac(0)
    if a == 1.0:
        return law
    if isinstance(law, Dirac):
        return Dirac(0) if law.n == 0 else Binomial(law.n, a)
    if isinstance(law, Binomial):
        family, n, prm = Binomial, law.n, a * law.p
    elif isinstance(law, Poisson):
        family, n, prm = Poisson, None, a * law.c
    else:
        family, n, prm = NegativeBinomial, law.r, a * law.p / (1.0 - (1.0 - a) * law.p)
    if prm == 0.0:
        # a subnormal mass can underflow the product
        return Dirac(0)
    return family(prm) if n is None else family(n, prm)


def kernel_params(law: CountingLaw):
    if isinstance(law, Dirac):
        return BINOMIAL, law.n, 1.0
    if isinstance(law, Binomial):
        return BINOMIAL, law.n, law.p
    if isinstance(law, Poisson):
        return POISSON, 0, law.c
    return NEGBIN, law.r, law.p


def pmf(law: CountingLaw, j: int) -> float:
    """``P(K = j)`` by a log-space multiplicative recurrence."""
    if j < 0:
        raise DomainError(f"pmf index must be non-negative, got {j}")
    kind, n, prm = kernel_params(law)
    return core.pmf_tail(kind, n, prm, j + 1)[0]


def tail(law: CountingLaw, j: int) -> float:
    """``P(K >= j)``."""
    if j < 0:
        raise DomainError(f"tail index must be non-negative, got {j}")
    if j == 0:
        return 1.0
    kind, n, prm = kernel_params(law)
    return core.pmf_tail(kind, n, prm, j)[1]


def gaussian_approx(law: CountingLaw, a: float) -> tuple[float, float]:
    """Mean and variance of the Gaussian approximation to the ``a``-thinned
    count."""
    _check_prob("thinning mass a", a)
    mean = a * law.mean()
    if isinstance(law, (Dirac, Binomial)):
        p = 1.0 if isinstance(law, Dirac) else law.p
        return mean, law.n * a * p * (1.0 - a * p)
    if isinstance(law, Poisson):
        return mean, a * law.c
    r, p = law.r, law.p
    return mean, r * a * p * (1.0 - (1.0 - a) * p) / (1.0 - p) ** 2


@lru_cache(maxsize=64)
def support_pmf(law: CountingLaw, mass: float = 1.0 - 1e-14,
                cap: int = 1_000_000) -> np.ndarray:
    """pmf values ``P(K = 0), P(K = 1), ...`` until the cumulative mass
    reaches ``mass`` (at most ``cap`` terms)."""
    if isinstance(law, Dirac):
        out = np.zeros(law.n + 1)
        out[-1] = 1.0
        return out
    kind, n, prm = kernel_params(law)
    last = n if kind == BINOMIAL else cap - 1
    vals = []
    cum = 0.0
    for j in range(last + 1):
        v = core.pmf_tail(kind, n, prm, j + 1)[0]
        vals.append(v)
        cum += v
        if cum >= mass and j >= law.mean():
            break
    return np.array(vals)


def sample_count(law: CountingLaw, u: float) -> int:
    """Inverse-CDF draw of ``K`` from a uniform variate ``u``."""
    cdf = np.cumsum(support_pmf(law))
    return int(min(np.searchsorted(cdf, u, side="left"), cdf.size - 1))
