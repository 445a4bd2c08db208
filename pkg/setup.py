"""Builds the optional compiled kernel core.

The package works without the extension (pure NumPy fallback in
dtx.kernels.ref); the extension only accelerates the assignment solver
and the rasterizer inner loops.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dtx.kernels._core",
                ["src/dtx/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
