import sys

import numpy as np
import pytest

from itad.counting import Binomial, NegativeBinomial, Poisson
from itad.kernels import Central, Decentral, Local, Subcentral

# common-mass reference kernels (total mass 1/10)
CENTRAL_A = 43.49969618756
SUBCENTRAL_A = 3.00573792057
LOCAL_R = 1.0 - np.sqrt(0.9)


@pytest.fixture
def poisson50():
    return Poisson(50.0)


def reference_kernels():
    return {
        "central": Central(CENTRAL_A),
        "subcentral": Subcentral(SUBCENTRAL_A),
        "decentral": Decentral(0.1),
        "local": Local(1.0, LOCAL_R),
    }


def reference_laws():
    # all with mean 50
    return {
        "poisson": Poisson(50.0),
        "binomial": Binomial(100, 0.5),
        "negbin": NegativeBinomial(5, 50.0 / 55.0),
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
