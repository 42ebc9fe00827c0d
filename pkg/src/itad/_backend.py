"""Select the kernel backend at import.

The compiled ``itad._core`` extension is used when it imports; otherwise
the numpy implementation in ``itad._pycore``.  Setting the environment
variable ``ITAD_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pycore

if os.environ.get("ITAD_PURE_PYTHON", "") == "1":
    core = _pycore
    BACKEND = "python"
else:
    try:
        from . import _core as core

        BACKEND = "cython"
    except ImportError:  # extension not built
        core = _pycore
        BACKEND = "python"

DIRAC = _pycore.DIRAC
BINOMIAL = _pycore.BINOMIAL
POISSON = _pycore.POISSON
NEGBIN = _pycore.NEGBIN
