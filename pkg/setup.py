"""Build hook: compile the optional Cython kernel if the toolchain allows.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any build failure here downgrades to a plain
pure-Python install instead of aborting.
"""

from setuptools import Extension, setup

extensions = []
try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "qboltz._kernels",
                ["src/qboltz/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
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
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"qboltz: skipping compiled kernels ({exc}); numpy fallback will be used")

setup(ext_modules=extensions)
