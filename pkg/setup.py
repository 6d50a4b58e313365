"""Build script: compiles the optional Cython hot-loop kernels.

The package works without the extension (a pure-Python twin is selected at
import time), so any build failure here is non-fatal by design: run
`pip install -e . --no-build-isolation` and check `wattwise.kernels.BACKEND`.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/wattwise/kernels/_core.pyx"],
        language_level=3,
        # No fast-math: the compiled kernels must be bit-identical to the
        # pure-Python reference or deterministic replay breaks.
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
