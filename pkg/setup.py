import os

from setuptools import Extension, setup

# The compiled kernels are optional; the package falls back to pure Python.
extensions = []
if not os.environ.get("PIGEONLAB_NO_EXT"):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [Extension("pigeonlab._ckernels", ["src/pigeonlab/_ckernels.pyx"])],
            compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
        )
    except ImportError:
        extensions = []

setup(ext_modules=extensions)
