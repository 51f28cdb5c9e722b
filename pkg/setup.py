import os
import sys

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the package still installs; the numpy fallback is used
    cythonize = None

openmp = os.environ.get("ASVGD_OPENMP", "1") == "1"
compile_args = ["-O3", "-fopenmp-simd", "-fno-math-errno"] + (["-fopenmp"] if openmp else [])
link_args = ["-fopenmp"] if openmp else []
libraries = []
if sys.platform.startswith("linux"):
    # glibc's vector math library, used by the vectorized exp in _vexp.h
    libraries.append("mvec")

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "asvgd._core",
                ["src/asvgd/_core.pyx"],
                include_dirs=[numpy.get_include(), "src/asvgd"],
                depends=["src/asvgd/_vexp.h"],
                libraries=libraries,
                extra_compile_args=compile_args,
                extra_link_args=link_args,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
