import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("UEMETRICS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "uemetrics.interval._kernels",
                    ["src/uemetrics/interval/_kernels.pyx"],
                    extra_compile_args=["-O2", "-frounding-math", "-fno-math-errno"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
