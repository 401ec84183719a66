"""Build script for the optional compiled factorization kernels.

The package works without the extension (a pure NumPy backend is selected at
import time); compiling it makes the LDL' inner loops roughly two orders of
magnitude faster.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: compiled kernels not built ({exc}); "
            "falling back to the pure Python backend",
            file=sys.stderr,
        )


def make_extensions():
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "proxip._ldlkern",
        ["src/proxip/_ldlkern.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
