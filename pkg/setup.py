"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any compiler failure downgrades to a warning
instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"skipping accelerator extension build: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping accelerator extension {ext.name}: {exc}")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; installing with pure-python kernels")
        return []
    ext = Extension(
        "monosum._kernels._speedups",
        ["src/monosum/_kernels/_speedups.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
