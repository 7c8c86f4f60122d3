"""Build the optional Cython kernels; the package also works without them."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("SMLAB_NO_EXTENSION") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            Extension(
                "smlab.kernels._ckernels",
                ["src/smlab/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            ),
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
