"""Build script for the compiled walk kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), but the compiled kernel is what makes grid-scale solves usable.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if not os.path.exists("src/wosbench/wos/_kernel.pyx"):
    cythonize = None
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "wosbench.wos._kernel",
                ["src/wosbench/wos/_kernel.pyx"],
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

setup(ext_modules=extensions)
