"""Builds the optional compiled split-scan kernel.

The package is pure Python plus one Cython extension for the GBDT split
search. When Cython or a C compiler is unavailable (or SLAMAUDIT_SKIP_EXTENSION
is set) the build falls back to the numpy kernel selected at import time.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("SLAMAUDIT_SKIP_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        # No -ffast-math: the compiled kernel must be bit-identical to the
        # numpy fallback.
        ext_modules = cythonize(
            [
                Extension(
                    "slamaudit.gbdt._scan_cython",
                    ["src/slamaudit/gbdt/_scan_cython.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
