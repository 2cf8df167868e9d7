"""Build script: compiles the optional Cython fast path.

The package works without the extension (a numpy fallback is selected at
import time); the build therefore tolerates a missing compiler or Cython.
"""

import os

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "wairsim.fastpath._speedups",
                ["src/wairsim/fastpath/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    if os.environ.get("WAIRSIM_REQUIRE_EXT"):
        raise
    print(f"wairsim: building without compiled fast path ({exc})")

setup(ext_modules=ext_modules)
