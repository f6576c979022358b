"""Build script: compiles the optional Cython enumeration kernels.

The package is fully functional without the extension (a pure-NumPy
fallback is selected at import time), so a failed compile downgrades to
a warning instead of aborting the install.  Set QPMETRICS_NO_EXT=1 to
skip the extension build entirely.
"""

import os
import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("QPMETRICS_NO_EXT") == "1":
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn(f"Cython/NumPy unavailable ({exc}); building without the compiled kernels.")
        return []
    return cythonize(
        ["src/qpmetrics/_enum_kernels.pyx"],
        language_level=3,
        include_path=[numpy.get_include()],
    )


class OptionalBuildExt(build_ext):
    """Build extensions, degrading to the pure-Python fallback on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"Compiled kernels skipped ({exc}); pure-NumPy fallback will be used.")

    def build_extension(self, ext):
        try:
            import numpy

            ext.include_dirs.append(numpy.get_include())
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"Failed to build {ext.name} ({exc}); pure-NumPy fallback will be used.")


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
