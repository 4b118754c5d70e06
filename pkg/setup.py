"""Build the optional Cython kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes per-trajectory integration ~10-100x
faster.  `pip install -e . --no-build-isolation` compiles it in place.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "qherald._reduced_kernel",
                ["src/qherald/_reduced_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
