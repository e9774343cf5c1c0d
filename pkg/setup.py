"""Build script: optionally compiles the kernel state machine to a C extension.

The kernel core (src/tcbsim/kernel/core.py) is written in a conservative
Python subset so the exact same source can be compiled by Cython. The build
copies it to _core.py and cythonizes that twin; at import time the package
picks the compiled module when present and falls back to the interpreted
one otherwise (see tcbsim/kernel/__init__.py).

Set TCBSIM_PURE=1 to skip the extension entirely.
"""

import os
import shutil

from setuptools import setup

HERE = os.path.abspath(os.path.dirname(__file__))
CORE = os.path.join(HERE, "src", "tcbsim", "kernel", "core.py")
TWIN = os.path.join(HERE, "src", "tcbsim", "kernel", "_core.py")


def build_ext_modules():
    if os.environ.get("TCBSIM_PURE"):
        return []
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    shutil.copyfile(CORE, TWIN)
    ext = Extension("tcbsim.kernel._core", [os.path.relpath(TWIN, HERE)])
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=build_ext_modules())
