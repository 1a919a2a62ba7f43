import os
import sys

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CIFS_NO_EXTENSION"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available; installing the pure-Python kernels only", file=sys.stderr)
    else:
        extensions = [
            Extension(
                "cifs._kernels._ckernels",
                ["src/cifs/_kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # bit-identical results with the Python fallback need plain IEEE mul/add
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
