import os

from setuptools import Extension, setup

# The compiled kernel is optional: set OVERCDMA_SKIP_EXT=1 to install the
# pure-numpy build (the package falls back automatically at import time).
ext_modules = []
if os.environ.get("OVERCDMA_SKIP_EXT", "0") not in ("1", "true", "yes"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "overcdma._speedup",
                    ["src/overcdma/_speedup.pyx"],
                    include_dirs=[np.get_include()],
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
