"""Build script for the optional Cython kernels.

The package works without them: ``cocoonnet._backend`` falls back to the
numpy implementations in ``cocoonnet._pure`` when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("COCOONNET_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "cocoonnet._kernels",
                    ["src/cocoonnet/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives=dict(
                language_level="3",
                boundscheck=False,
                wraparound=False,
                cdivision=True,
            ),
        )

setup(ext_modules=ext_modules)
