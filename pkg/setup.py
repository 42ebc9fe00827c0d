import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    USE_CYTHON = True
except ImportError:
    USE_CYTHON = False

# ITAD_NO_EXT=1 builds the pure-Python package only.
SKIP_EXT = os.environ.get("ITAD_NO_EXT", "") == "1"

extensions = []
if USE_CYTHON and not SKIP_EXT:
    extensions = cythonize(
        [
            Extension(
                "itad._core",
                ["src/itad/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=extensions)
