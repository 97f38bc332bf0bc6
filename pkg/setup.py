"""Build hook for the optional compiled kernels.

The package works without them; a failed or skipped build leaves the NumPy
fallback in place.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("HDMR_ADP_NO_EXT", "") != "1":
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
                    "hdmr_adp._ckernels",
                    ["src/hdmr_adp/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3", "-fno-fast-math", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
