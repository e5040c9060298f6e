from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        Extension("evilforge._fpcore", ["src/evilforge/_fpcore.pyx"]),
        compiler_directives={"language_level": "3"},
    ),
)
