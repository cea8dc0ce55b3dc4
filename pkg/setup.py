"""Build script: compiles the optional Cython kernel.

The extension is a pure speedup; when Cython or a C compiler is missing the
install falls back to the pure-Python kernel (selected at import time by
jetcat._kernel).
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Best-effort extension build: failures degrade to the pure backend."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            sys.stderr.write(
                "warning: compiled kernel not built (%s); "
                "falling back to the pure-Python kernel\n" % exc
            )

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            sys.stderr.write(
                "warning: %s failed to compile (%s); "
                "falling back to the pure-Python kernel\n" % (ext.name, exc)
            )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - build environment dependent
        sys.stderr.write("warning: Cython unavailable; building without the compiled kernel\n")
        return []
    return cythonize(
        ["src/jetcat/_kernel_c.pyx"],
        compiler_directives={"language_level": "3"},
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
