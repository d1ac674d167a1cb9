import sys

from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to pure
# numpy/Python implementations when the extension is unavailable.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "phasepeel._kernels._ckernels",
                ["src/phasepeel/_kernels/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(f"phasepeel: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
