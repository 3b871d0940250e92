"""Hot kernels with backend selection at import.

The compiled extension is preferred. Set ``CHUNKCODEC_BACKEND=python`` to
force the numpy kernels (useful for comparisons and on platforms without a
compiler).
"""
import importlib
import os

import numpy as np

from . import _fallback


def load_backend(name=None):
    """Return the kernel module for ``name`` ('cython' or 'python').

    ``None`` picks the compiled backend when importable.
    """
    if name in (None, "cython"):
        try:
            return importlib.import_module("chunkcodec._kernels._ext")
        except ImportError:
            if name == "cython":
                raise
    elif name != "python":
        raise ValueError(f"unknown kernel backend {name!r}")
    return _fallback


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


_requested = os.environ.get("CHUNKCODEC_BACKEND") or None
backend = load_backend(_requested)
BACKEND = backend.NAME


def _resolve(impl):
    if impl is None:
        return backend
    return load_backend(impl) if isinstance(impl, str) else impl


def _f32(a):
    return np.ascontiguousarray(a, dtype=np.float32)


def conv1d(x, w, b, stride=1, dilation=1, impl=None):
    impl = _resolve(impl)
    return impl.conv1d(_f32(x), _f32(w), _f32(b), int(stride), int(dilation))


def conv_transpose1d(x, w, b, stride=1, dilation=1, impl=None):
    impl = _resolve(impl)
    return impl.conv_transpose1d(_f32(x), _f32(w), _f32(b), int(stride), int(dilation))


def nearest_code(r, codebook, impl=None):
    impl = _resolve(impl)
    return impl.nearest_code(_f32(r), _f32(codebook))


def pack_bits(values, bits, impl=None):
    impl = _resolve(impl)
    return impl.pack_bits(values, int(bits))


def unpack_bits(buf, bits, count, impl=None):
    impl = _resolve(impl)
    return impl.unpack_bits(buf, int(bits), int(count))
