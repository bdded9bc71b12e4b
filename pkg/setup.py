"""Build the optional compiled convolution kernels.

The package works without the extension (a numpy backend is selected at
import time), so a missing Cython toolchain only costs speed.
"""

import os

from setuptools import Extension, setup

PYX = "src/gaitkin/tcn/kernels/_cconv.pyx"

try:
    from Cython.Build import cythonize

    ext_modules = (
        cythonize(
            [
                Extension(
                    "gaitkin.tcn.kernels._cconv",
                    sources=[PYX],
                    extra_compile_args=["-O3", "-fopenmp"],
                    extra_link_args=["-fopenmp"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        if os.path.exists(PYX)
        else []
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
