"""Builds the _core extension against the C++ sources.

The CMake build also produces the module for the ctest smoke tests; this
setup exists so `pip install .` works standalone.
"""

import os

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("NPY_NUM_BUILD_JOBS").install()

root = os.path.dirname(os.path.abspath(__file__))

sources = [
    "bindings/pymodule.cpp",
    "src/errors.cpp",
    "src/rng.cpp",
    "src/model.cpp",
    "src/linalg.cpp",
    "src/theory.cpp",
    "src/estimators.cpp",
    "src/simulate.cpp",
    "src/io.cpp",
]

eigen_candidates = [
    os.environ.get("EIGEN3_INCLUDE_DIR", ""),
    "/usr/include/eigen3",
    "/usr/local/include/eigen3",
]
eigen = next(p for p in eigen_candidates if p and os.path.isdir(p))

ext = Pybind11Extension(
    "ssvd._core",
    sources,
    include_dirs=[os.path.join(root, "include"), os.path.join(root, "vendor"), eigen],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
