"""Build script: compiles the optional fast-kernel extension.

The package works without the extension (a pure-Python twin of every kernel
ships in trisim.engine.pykernels); compilation failures therefore degrade to
a warning instead of aborting the install.

-ffp-contract=off keeps the compiler from fusing multiply-adds so the compiled
kernels produce bit-identical doubles to the pure-Python fallback.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "trisim.engine._fastkernels",
                ["src/trisim/engine/_fastkernels.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    sys.stderr.write(
        "warning: fast-kernel extension skipped (%s); using pure-Python engine\n" % exc
    )

setup(ext_modules=ext_modules)
