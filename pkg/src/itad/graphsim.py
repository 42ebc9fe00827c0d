"""Monte Carlo random graphs over thrown points.

A realization draws a point count ``K`` from a counting law, places ``K``
uniform locations on [0, 1] and links every unordered pair ``{i, j}``
(``i <= j``, so self-loops included) with probability ``f(X_i, X_j)``.

Random streams come from a counter-based Philox generator.  A 64-bit seed
is expanded with ``SeedSequence`` into independent child streams for the
graph, the induction labels, times of arrival and deactivation flags.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import core
from .counting import CountingLaw, DomainError, sample_count, support_pmf
from .kernels import Kernel

MAX_DENSE_POINTS = 10_000
GRAPH, LABELS, TOAS, DEACTIVATION = range(4)


class SimulationError(RuntimeError):
    """Realization too large for dense pair sampling."""


def streams(seed: int, n: int = 4) -> list[np.random.Generator]:
    """Independent Philox generators spawned from one 64-bit seed."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def replicate_seeds(master: int, n: int) -> np.ndarray:
    """``n`` per-replicate 64-bit seeds derived from a master seed."""
    return np.random.SeedSequence(int(master)).generate_state(n, dtype=np.uint64)


@dataclass
class PointSystem:
    """One realization: locations, symmetric adjacency with self-loops,
    optional labels (1 = active) and times of arrival."""

    locations: np.ndarray
    adjacency: np.ndarray
    seed: int
    labels: np.ndarray | None = None
    toas: np.ndarray | None = None

    @property
    def K(self) -> int:
        return int(self.locations.size)

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1, dtype=np.int64)

    def edges(self):
        """Upper-triangle edge list ``(i, j)`` with ``i <= j``."""
        i, j = np.nonzero(np.triu(self.adjacency))
        return np.column_stack([i, j])


def sample_graph(law: CountingLaw, kernel: Kernel, seed: int, horizon: float | None = None
                 ) -> PointSystem:
    """Draw a point count, locations and Bernoulli edges.

    ``horizon`` additionally draws iid times of arrival on [0, horizon]
    from the TOA stream.
    """
    gens = streams(seed)
    g = gens[GRAPH]
    K = sample_count(law, g.random())
    if K > MAX_DENSE_POINTS:
        raise SimulationError(f"K = {K} exceeds the dense limit {MAX_DENSE_POINTS}")
    X = g.random(K)
    iu, ju = np.triu_indices(K)
    u = g.random(iu.size)
    linked = u < np.asarray(kernel.eval(X[iu], X[ju]), float) if K else np.zeros(0, bool)
    adj = np.zeros((K, K), dtype=bool)
    adj[iu, ju] = linked
    adj[ju, iu] = linked
    toas = gens[TOAS].uniform(0.0, horizon, K) if horizon is not None else None
    return PointSystem(X, adj, int(seed), toas=toas)


def count_active(system: PointSystem, k: int) -> int:
    """``V_k``: number of points with degree at least ``k``."""
    if k < 1:
        raise DomainError("threshold k must be >= 1")
    return int(np.count_nonzero(system.degrees() >= k))


def induce(system: PointSystem, k: int) -> np.ndarray:
    """Initial labels: active iff degree >= ``k``."""
    if k < 1:
        raise DomainError("threshold k must be >= 1")
    system.labels = (system.degrees() >= k).astype(np.uint8)
    return system.labels


def simulate_transduction(system: PointSystem, l: int, k: int | None = None) -> list[int]:
    """Synchronous threshold spreading until no label changes.

    An inactive point activates when it has at least ``l`` edges to active
    points.  Labels are induced with threshold ``k`` if given, otherwise
    the existing labels are used.  Returns active counts per iteration,
    initial count first.
    """
    if l < 1:
        raise DomainError("threshold l must be >= 1")
    if k is not None:
        induce(system, k)
    if system.labels is None:
        raise DomainError("labels not assigned; pass k or call induce first")
    active = np.ascontiguousarray(system.labels, dtype=np.uint8)
    adj = np.ascontiguousarray(system.adjacency, dtype=np.uint8)
    counts = core.transduce_sync(adj, active, int(l))
    system.labels = active
    return [int(c) for c in counts]


def activation_process(system: PointSystem, k: int, time_grid) -> np.ndarray:
    """``V_k^t`` on ``time_grid``: points arrived by ``t`` whose count of
    arrived neighbours (self-loop included) is at least ``k``."""
    if system.toas is None:
        raise DomainError("system has no times of arrival")
    t = np.asarray(time_grid, float)
    arrived = system.toas[None, :] <= t[:, None]
    deg = arrived.astype(np.int64) @ system.adjacency.astype(np.int64)
    return np.count_nonzero(arrived & (deg >= k), axis=1)


def count_deactivations(system: PointSystem, r: float, seed: int | None = None) -> int:
    """Number of active points flagged independently with probability ``r``.

    Draws from the deactivation stream of ``seed`` (default: the system's
    seed)."""
    if not 0.0 <= r <= 1.0:
        raise DomainError("r must lie in [0, 1]")
    if system.labels is None:
        raise DomainError("labels not assigned")
    g = streams(system.seed if seed is None else seed)[DEACTIVATION]
    u = g.random(system.K)
    return int(np.count_nonzero((system.labels == 1) & (u < r)))


def sample_degree_field(law: CountingLaw, kernel: Kernel, points, n: int, seed: int
                        ) -> np.ndarray:
    """Degrees ``d(x)`` at fixed locations over ``n`` independent point
    throws; returns an ``(n, len(points))`` integer array."""
    xs = np.atleast_1d(np.asarray(points, float))
    g = streams(seed)[GRAPH]
    cdf = np.cumsum(support_pmf(law))
    Ks = np.minimum(np.searchsorted(cdf, g.random(n), side="left"), cdf.size - 1)
    total = int(Ks.sum())
    X = g.random(total)
    owner = np.repeat(np.arange(n), Ks)
    out = np.empty((n, xs.size), dtype=np.int64)
    for c, x in enumerate(xs):
        hit = g.random(total) < np.asarray(kernel.eval(np.full(total, x), X), float)
        out[:, c] = np.bincount(owner, weights=hit, minlength=n).astype(np.int64)
    return out


@dataclass
class ReplicateRow:
    replicate: int
    seed: int
    K: int
    V_k: int
    iterations: int
    terminal: int


def run_replicates(law: CountingLaw, kernel: Kernel, k: int, n: int, master_seed: int,
                   l: int | None = None) -> list[ReplicateRow]:
    """Independent realizations with seeds derived from ``master_seed``.

    Each row records ``V_k`` and, when ``l`` is given, the number of
    transduction iterations and the terminal active count.
    """
    rows = []
    for i, s in enumerate(replicate_seeds(master_seed, n)):
        system = sample_graph(law, kernel, int(s))
        v = count_active(system, k)
        if l is None:
            iters, term = 0, v
        else:
            seq = simulate_transduction(system, l, k)
            iters, term = len(seq) - 1, seq[-1]
        rows.append(ReplicateRow(i, int(s), system.K, v, iters, term))
    return rows


def summarize(values) -> dict:
    """Sample mean, unbiased variance and standard error."""
    v = np.asarray(values, float)
    var = float(v.var(ddof=1)) if v.size > 1 else 0.0
    return {"n": int(v.size), "mean": float(v.mean()), "variance": var,
            "stderr": float(np.sqrt(var / v.size)) if v.size else 0.0}
