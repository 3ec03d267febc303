"""Build script for the optional Cython fast path.

The package is fully functional without the extension (``cesradon._backend``
falls back to the vectorized numpy implementation), so a failed compile only
costs speed.  ``CESRADON_NO_EXT=1`` skips the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CESRADON_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cesradon._fastpath",
                    ["src/cesradon/_fastpath.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
