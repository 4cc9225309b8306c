"""Build script: compiles the hot-loop kernel extension when Cython is
available; the package still installs and runs (pure backend) if the
extension cannot be built."""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "emghand._kernels._core",
                ["src/emghand/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: no FMA fusion, keeps the compiled kernel
                # bit-identical to the pure backend (replay determinism).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
