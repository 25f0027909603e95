from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = [
    Extension(
        "udalab.backend._speedups",
        ["src/udalab/backend/_speedups.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
