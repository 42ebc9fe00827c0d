import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itad import _pycore
from itad._backend import BACKEND, BINOMIAL, DIRAC, NEGBIN, POISSON
from itad.fluxes import MeanFieldNodes
from itad.kernels import Central, Decentral, Subcentral

_core = pytest.importorskip("itad._core", reason="compiled core not built")

LAWS = [(DIRAC, 50, 0.0), (DIRAC, 1, 0.0), (BINOMIAL, 100, 0.5), (BINOMIAL, 1, 0.7),
        (POISSON, 0, 50.0), (POISSON, 0, 1200.0), (NEGBIN, 5, 50 / 55)]


def test_backend_selection():
    forced = os.environ.get("ITAD_PURE_PYTHON") == "1"
    assert BACKEND == ("python" if forced else "cython")


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(LAWS), st.integers(0, 40),
       st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0, 1))
def test_threshold_flux_parity(law, k, thin, w):
    code, n, prm = law
    thin = np.array(thin)
    selfw = np.full(thin.size, w)
    a = _pycore.threshold_flux(code, n, prm, thin, k, selfw)
    b = _core.threshold_flux(code, n, prm, thin, k, selfw)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-15)


@pytest.mark.parametrize("law", LAWS)
@pytest.mark.parametrize("a", [0.0, 0.3, 1.0])
def test_thinned_parity(law, a):
    assert _pycore.thinned(law[0], law[1], law[2], a) == _core.thinned(law[0], law[1], law[2], a)


@pytest.mark.parametrize("kernel", [Central(43.4997), Subcentral(3.0057), Decentral(0.1)],
                         ids=repr)
@pytest.mark.parametrize("renormalize", [False, True])
def test_orbit_iterate_parity(kernel, renormalize):
    nodes = MeanFieldNodes.build(kernel)
    args = (POISSON, 0, 50.0, nodes.marg, nodes.diag, nodes.weights, 1 if renormalize else 3,
            0 if renormalize else 5, 0.0, 0.0 if renormalize else 0.1, 1.7849, renormalize,
            0.1438, 300, 1e-12, False)
    xa, ga, la, ca = _pycore.orbit_iterate(*args)
    xb, gb, lb, cb = _core.orbit_iterate(*args)
    assert xa.shape == xb.shape and ca == cb
    # chaotic runs amplify round-off, so compare the first steps tightly
    span = 20 if renormalize else xa.size
    np.testing.assert_allclose(xa[:span], xb[:span], rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(ga[:span], gb[:span], rtol=1e-10, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.floats(0, 0.3), st.floats(0, 0.5), st.integers(1, 4),
       st.integers(0, 2 ** 32 - 1))
def test_transduce_sync_parity(size, density, seed_frac, l, seed):
    rng = np.random.default_rng(seed)
    adj = np.triu(rng.random((size, size)) < density)
    adj = (adj | adj.T).astype(np.uint8)
    act = (rng.random(size) < seed_frac).astype(np.uint8)
    a, b = act.copy(), act.copy()
    assert _pycore.transduce_sync(adj, a, l) == list(_core.transduce_sync(adj, b, l))
    assert np.array_equal(a, b)


def test_pure_python_fallback_selected_by_environment():
    code = ("from itad import BACKEND, mean_induction, Poisson, Decentral;"
            "print(BACKEND, repr(mean_induction(Poisson(50.0), Decentral(0.1), 8)))")
    env = dict(os.environ, ITAD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out[0] == "python"
    assert float(out[1]) == pytest.approx(0.14381616036571251, rel=1e-13)
