"""Build script for the optional compiled kernel extension.

The package works without the extension: noise_lab.kernels falls back to a
numpy/scipy implementation at import time.  Building is attempted here and
skipped with a warning if Cython or a C compiler is unavailable.
"""

import sys

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "noise_lab.kernels._core",
                sources=["src/noise_lab/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover
    print(f"warning: compiled kernels skipped ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
