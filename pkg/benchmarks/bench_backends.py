"""Compare the compiled core with the numpy fallback.

Run ``python3 benchmarks/bench_backends.py``.  Each kernel is timed with
``timeit`` on identical inputs and the outputs are checked for agreement.
"""
import timeit

import numpy as np

from itad import _pycore
from itad._backend import BINOMIAL, POISSON
from itad.fluxes import MeanFieldNodes
from itad.kernels import Central, Decentral

try:
    from itad import _core
except ImportError:
    _core = None


def cases():
    rng = np.random.default_rng(0)
    thin = rng.random(20_000) * 0.2
    selfw = rng.random(20_000) * 0.1
    nodes = MeanFieldNodes.build(Central(43.4997))
    dnodes = MeanFieldNodes.build(Decentral(0.1))
    adj = (rng.random((400, 400)) < 0.02).astype(np.uint8)
    adj = np.triu(adj)
    adj = adj | adj.T
    act = (rng.random(400) < 0.05).astype(np.uint8)
    return {
        "threshold_flux poisson 2e4": lambda m: m.threshold_flux(POISSON, 0, 50.0, thin, 8, selfw),
        "threshold_flux binomial 2e4": lambda m: m.threshold_flux(BINOMIAL, 100, 0.5, thin, 8,
                                                                  selfw),
        "orbit_iterate central 200 steps": lambda m: m.orbit_iterate(
            POISSON, 0, 50.0, nodes.marg, nodes.diag, nodes.weights, 3, 5, 0.0, 0.1, 1.0,
            False, 0.2, 200, 1e-12, False)[0],
        "orbit_iterate decentral 1e4 steps": lambda m: m.orbit_iterate(
            POISSON, 0, 50.0, dnodes.marg, dnodes.diag, dnodes.weights, 3, 0, 0.0, 0.29, 1.0,
            False, 0.1438, 10_000, 1e-12, False)[0],
        "transduce_sync K=400": lambda m: np.array(m.transduce_sync(adj, act.copy(), 2)),
    }


def main(repeat=5):
    if _core is None:
        print("compiled core not built; only the fallback is available")
    print(f"{'kernel':36s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases().items():
        tp = min(timeit.repeat(lambda: fn(_pycore), number=1, repeat=repeat)) * 1e3
        if _core is None:
            print(f"{name:36s} {tp:10.3f}")
            continue
        tc = min(timeit.repeat(lambda: fn(_core), number=1, repeat=repeat)) * 1e3
        diff = float(np.max(np.abs(np.asarray(fn(_pycore)) - np.asarray(fn(_core)))))
        print(f"{name:36s} {tp:10.3f} {tc:10.3f} {tp / tc:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
