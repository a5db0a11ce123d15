"""Build script for the optional compiled integrator core.

The package works without the extension (a pure-Python fallback is
selected at import time), so the build degrades gracefully when no
C toolchain or Cython is available.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "lanedep._kernels",
                ["src/lanedep/_kernels.pyx"],
                # keep scalar FP order identical to the Python fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
