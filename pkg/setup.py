"""Build the optional Cython kernel extension.

    pip install -e . --no-build-isolation

The extension is tuned for the build machine (``-march=native``); set
``CHUNKCODEC_PORTABLE=1`` for a generic x86-64/ARM build. If Cython or a C compiler is unavailable the package still installs and the
numpy kernels in ``chunkcodec._kernels._fallback`` are used instead.
"""
import os

from setuptools import Extension, setup

compile_args = ["-O3", "-ffp-contract=off"]
if os.environ.get("CHUNKCODEC_PORTABLE", "") != "1":
    compile_args.append("-march=native")

ext_modules = []
if os.environ.get("CHUNKCODEC_NO_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "chunkcodec._kernels._ext",
                    ["src/chunkcodec/_kernels/_ext.pyx"],
                    include_dirs=[numpy.get_include(), "src/chunkcodec/_kernels"],
                    # -ffp-contract=off: no FMA fusion, so results match the numpy kernels bit for bit
                    extra_compile_args=compile_args,
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
