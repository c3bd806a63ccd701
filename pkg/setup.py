"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time); the extension only accelerates the hot loops.
"""

from setuptools import Extension, setup

# fp-contract is pinned off so the compiled core stays bit-comparable with
# the pure-Python fallback (same rounding of every step)
ext = Extension(
    "sipdyn._kernels._core",
    sources=["src/sipdyn/_kernels/_core.pyx"],
    extra_compile_args=["-O3", "-ffp-contract=off"],
)
# A missing compiler must not break installation.
ext.optional = True

try:
    from Cython.Build import cythonize

    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
