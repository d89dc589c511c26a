"""Builds the juryeval._core extension from the C++ sources.

The CMake build produces the same module for in-tree testing; this setup
script lets `pip install .` work without CMake.
"""

from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext_modules = [
    Pybind11Extension(
        "juryeval._core",
        sorted(glob("src/*.cpp")) + ["python/bindings.cpp"],
        include_dirs=["include", "vendor"],
        libraries=["crypto"],
        cxx_std=20,
    ),
]

setup(
    ext_modules=ext_modules,
    cmdclass={"build_ext": build_ext},
)
