"""Pure numpy kernels.

These define the reference accumulation order for the codec. The compiled
kernels in ``_ext.pyx`` perform the same float32 operations in the same
order, so both backends produce bit-identical results.
"""
import numpy as np

NAME = "python"


def conv1d(x, w, b, stride, dilation):
    """Unpadded 1-D convolution.

    ``x`` is ``(C, L)``, ``w`` is ``(O, C, K)``, ``b`` is ``(O,)``; all float32.
    Each output is accumulated kernel tap first, then input channel.
    """
    out_ch, in_ch, k = w.shape
    length = x.shape[1]
    n = (length - dilation * (k - 1) - 1) // stride + 1
    if n <= 0:
        return np.zeros((out_ch, 0), np.float32)
    out = np.empty((out_ch, n), np.float32)
    out[:] = b[:, None]
    span = (n - 1) * stride + 1
    for j in range(k):
        start = j * dilation
        for c in range(in_ch):
            out += w[:, c, j, None] * x[c, start:start + span:stride]
    return out


def conv_transpose1d(x, w, b, stride, dilation):
    """Unpadded transposed convolution; ``w`` is ``(O, C, K)``."""
    out_ch, in_ch, k = w.shape
    length = x.shape[1]
    if length <= 0:
        return np.zeros((out_ch, 0), np.float32)
    n = (length - 1) * stride + dilation * (k - 1) + 1
    out = np.empty((out_ch, n), np.float32)
    out[:] = b[:, None]
    span = (length - 1) * stride + 1
    for j in range(k):
        start = j * dilation
        for c in range(in_ch):
            out[:, start:start + span:stride] += w[:, c, j, None] * x[c]
    return out


def nearest_code(r, codebook):
    """Index of the nearest codebook row for every row of ``r`` (ties -> lowest)."""
    n_frames, dim = r.shape
    if n_frames == 0:
        return np.zeros(0, np.int64)
    d2 = np.zeros((n_frames, codebook.shape[0]), np.float32)
    for k in range(dim):
        diff = r[:, k, None] - codebook[None, :, k]
        d2 += diff * diff
    return np.argmin(d2, axis=1).astype(np.int64)


def pack_bits(values, bits):
    """Pack unsigned tokens into an LSB-first bitstream of ``bits`` per token."""
    values = np.ascontiguousarray(values, dtype=np.uint16).ravel()
    shifts = np.arange(bits, dtype=np.uint16)
    stream = ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    return np.packbits(stream, bitorder="little")


def unpack_bits(buf, bits, count):
    buf = np.frombuffer(buf, dtype=np.uint8) if not isinstance(buf, np.ndarray) else buf
    stream = np.unpackbits(buf, bitorder="little", count=count * bits)
    weights = (np.uint32(1) << np.arange(bits, dtype=np.uint32))
    return (stream.reshape(count, bits).astype(np.uint32) @ weights).astype(np.uint16)
