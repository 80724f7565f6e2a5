"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time); the extension only accelerates the recurrent sequence kernels.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, install pure-Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"WARNING: compiled kernels not built ({exc}); "
                  "falling back to the pure numpy backend.")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to compile {ext.name} ({exc}); "
                  "falling back to the pure numpy backend.")


def get_extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("WARNING: Cython not available; building without compiled kernels.")
        return []

    # -ffast-math lets the compiler vectorize the exp/tanh gate loops through
    # libmvec; kernels tolerate the relaxed semantics (finiteness is enforced
    # by the training loop, not inside the kernels).
    extensions = [
        Extension(
            "braindec._native",
            sources=["src/braindec/_native.pyx"],
            extra_compile_args=["-O3", "-march=native", "-ffast-math"],
            libraries=["m"],  # pulls in libmvec for the vectorized exp/tanh
        )
    ]
    return cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=get_extensions(), cmdclass={"build_ext": optional_build_ext})
