import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and not os.environ.get("MPLPX_SKIP_EXT"):
    extensions = cythonize(
        [
            Extension(
                "mplpx._kernels",
                ["src/mplpx/_kernels.pyx"],
                # -ffp-contract=off keeps per-operation IEEE semantics so the
                # compiled kernels agree with the numpy fallback bit for bit.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=extensions)
