# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

Same float32 operations, same order as ``_fallback``; outputs are bit-identical.
"""
import numpy as np

NAME = "cython"

cdef extern from "conv_kernels.h":
    void cc_conv1d(const float* x, Py_ssize_t C, Py_ssize_t L, const float* w, const float* b,
                   Py_ssize_t O, Py_ssize_t K, Py_ssize_t s, Py_ssize_t d, float* out,
                   Py_ssize_t n) nogil
    void cc_conv_transpose1d(const float* x, Py_ssize_t C, Py_ssize_t L, const float* w,
                             const float* b, Py_ssize_t O, Py_ssize_t K, Py_ssize_t s,
                             Py_ssize_t d, float* out, Py_ssize_t n, Py_ssize_t* taps,
                             Py_ssize_t* shift) nogil


def conv1d(const float[:, ::1] x, const float[:, :, ::1] w, const float[::1] b,
           Py_ssize_t stride, Py_ssize_t dilation):
    cdef Py_ssize_t out_ch = w.shape[0], in_ch = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t length = x.shape[1]
    cdef Py_ssize_t span = dilation * (k - 1) + 1
    # C division truncates toward zero, so rule out short inputs first
    if length < span:
        return np.zeros((out_ch, 0), np.float32)
    cdef Py_ssize_t n = (length - span) // stride + 1
    if n <= 0:
        return np.zeros((out_ch, 0), np.float32)
    out_a = np.empty((out_ch, n), np.float32)
    cdef float[:, ::1] out = out_a
    with nogil:
        cc_conv1d(&x[0, 0], in_ch, length, &w[0, 0, 0], &b[0], out_ch, k, stride, dilation,
                  &out[0, 0], n)
    return out_a


def conv_transpose1d(const float[:, ::1] x, const float[:, :, ::1] w, const float[::1] b,
                     Py_ssize_t stride, Py_ssize_t dilation):
    cdef Py_ssize_t out_ch = w.shape[0], in_ch = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t length = x.shape[1]
    if length <= 0:
        return np.zeros((out_ch, 0), np.float32)
    cdef Py_ssize_t n = (length - 1) * stride + dilation * (k - 1) + 1
    out_a = np.empty((out_ch, n), np.float32)
    cdef float[:, ::1] out = out_a
    scratch = np.empty(2 * k, np.intp)
    cdef Py_ssize_t[::1] sc = scratch
    with nogil:
        cc_conv_transpose1d(&x[0, 0], in_ch, length, &w[0, 0, 0], &b[0], out_ch, k, stride,
                            dilation, &out[0, 0], n, &sc[0], &sc[k])
    return out_a


def nearest_code(const float[:, ::1] r, const float[:, ::1] codebook):
    cdef Py_ssize_t n_frames = r.shape[0], dim = r.shape[1], n_rows = codebook.shape[0]
    out_a = np.zeros(n_frames, np.int64)
    cdef long long[::1] out = out_a
    cdef Py_ssize_t f, i, k, best_i
    cdef float acc, diff, best
    with nogil:
        for f in range(n_frames):
            best_i = 0
            best = 0
            for i in range(n_rows):
                acc = 0
                for k in range(dim):
                    diff = r[f, k] - codebook[i, k]
                    acc = acc + diff * diff
                if i == 0 or acc < best:
                    best = acc
                    best_i = i
            out[f] = best_i
    return out_a


def pack_bits(values, int bits):
    cdef const unsigned short[::1] v = np.ascontiguousarray(values, dtype=np.uint16).ravel()
    cdef Py_ssize_t count = v.shape[0]
    cdef Py_ssize_t n_bytes = (count * bits + 7) // 8
    out_a = np.zeros(n_bytes, np.uint8)
    cdef unsigned char[::1] out = out_a
    cdef unsigned long long acc = 0
    cdef int filled = 0
    cdef Py_ssize_t i, pos = 0
    cdef unsigned long long mask = (1ULL << bits) - 1
    with nogil:
        for i in range(count):
            acc |= (<unsigned long long>v[i] & mask) << filled
            filled += bits
            while filled >= 8:
                out[pos] = <unsigned char>(acc & 0xFF)
                pos += 1
                acc >>= 8
                filled -= 8
        if filled > 0:
            out[pos] = <unsigned char>(acc & 0xFF)
    return out_a


def unpack_bits(buf, int bits, Py_ssize_t count):
    cdef const unsigned char[::1] src = np.frombuffer(buf, dtype=np.uint8) \
        if not isinstance(buf, np.ndarray) else np.ascontiguousarray(buf, dtype=np.uint8)
    out_a = np.zeros(count, np.uint16)
    cdef unsigned short[::1] out = out_a
    cdef unsigned long long acc = 0
    cdef int filled = 0
    cdef Py_ssize_t i, pos = 0
    cdef unsigned long long mask = (1ULL << bits) - 1
    if count * bits > src.shape[0] * 8:
        raise ValueError("buffer too short for token count")
    with nogil:
        for i in range(count):
            while filled < bits:
                acc |= (<unsigned long long>src[pos]) << filled
                pos += 1
                filled += 8
            out[i] = <unsigned short>(acc & mask)
            acc >>= bits
            filled -= bits
    return out_a
