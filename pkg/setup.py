"""Build script for the optional compiled kernels.

The Cython extension is skipped when Cython is unavailable; the package then
runs on the NumPy fallback in ``gaussbath._kernels_py``.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "gaussbath._kernels",
                ["src/gaussbath/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
