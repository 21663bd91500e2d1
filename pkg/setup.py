"""Build shim for the optional Cython clique kernel.

The package is fully functional without the extension (a pure-Python
bitset kernel is selected at import time), so a failed compile only
costs speed. ``pip install -e . --no-build-isolation`` builds it when
Cython and a C compiler are present.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/ramsphere/_cliquecore.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"ramsphere: building without compiled kernel ({exc})\n")

setup(ext_modules=ext_modules)
