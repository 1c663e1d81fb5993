"""Build script.

The package is pure Python plus one optional Cython extension
(``dbcat._satcore._speedups``) that accelerates the view-saturation inner
loops.  If Cython or a C compiler is unavailable the build silently falls
back to the pure-Python kernel; everything still works, just slower.

Set ``DBCAT_NO_EXT=1`` to skip the extension on purpose.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the speedup module if we can, keep going if we can't."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping optional extension ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  f"the pure-Python kernel will be used")


def extensions():
    if os.environ.get("DBCAT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not installed; building without the speedup kernel")
        return []
    ext = Extension(
        "dbcat._satcore._speedups",
        sources=["src/dbcat/_satcore/_speedups.pyx"],
        language="c++",
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
