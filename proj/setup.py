"""Builds the pybind11 extension through the project's CMake setup."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DQSDE_SKIP_TESTS=ON",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_qsde", "-j"],
            check=True,
        )
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        target.parent.mkdir(parents=True, exist_ok=True)
        built = list((build_dir / "pylib" / "qsde").glob("_qsde*"))
        if not built:
            raise RuntimeError("CMake did not produce the _qsde module")
        shutil.copy2(built[0], target)


setup(
    packages=["qsde"],
    package_dir={"qsde": "python/qsde"},
    ext_modules=[CMakeExtension("qsde._qsde")],
    cmdclass={"build_ext": CMakeBuild},
)
