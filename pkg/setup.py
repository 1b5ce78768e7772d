"""Build script: compiles the weekly-step kernel if Cython and a C compiler
are available, otherwise installs the pure-Python package unchanged (the
simulator falls back to the interpreted engine at import time)."""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "chartsim.simulator._kernel",
                ["src/chartsim/simulator/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off keeps the compiled kernel bit-identical
                # to the pure-Python engine (no fused multiply-add).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
