"""Build script for the optional compiled kernels.

The package runs without the extension; ``latticeid._kernels`` falls back to
the pure-Python implementations in ``latticeid._pycore`` when ``_core`` is
missing.
"""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # build the pure-Python package only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "latticeid._core",
                ["src/latticeid/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
