import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except Exception:
    cythonize = None

if not os.path.exists("src/psmilu/_kernel_cy.pyx"):
    cythonize = None

extensions = [
    Extension(
        "psmilu._kernel_cy",
        ["src/psmilu/_kernel_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

if cythonize is not None:
    ext_modules = cythonize(
        extensions,
        compiler_directives={"language_level": "3", "boundscheck": False,
                             "wraparound": False, "cdivision": True},
    )
else:
    # Source installs without Cython fall back to the pure-Python kernels.
    ext_modules = []

setup(ext_modules=ext_modules)
