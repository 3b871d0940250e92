"""DACX: a self-describing container for bit-packed codec tokens.

Layout (all little-endian, no padding between fields)::

    offset  size  field
    0       4     magic "DACX"
    4       2     version (u16) = 1
    6       4     sample_rate (u32), model rate in Hz
    10      4     original_sample_rate (u32)
    14      8     original_length (u64), samples at original_sample_rate
    22      2     channels (u16)
    24      2     n_codebooks (u16)
    26      1     codebook_bits (u8), 1..16
    27      4     frames_per_chunk (u32)
    31      8     total_frames (u64), a multiple of frames_per_chunk
    39      4     input_loudness_db (f32); quiet NaN 0x7FC00000 encodes -inf (below gate)
    43      4     win_duration_ms (f32)
    47      8     weights_seed (u64)
    55      ...   payload

The payload holds ``channels * n_codebooks * total_frames`` tokens ordered
channel, codebook, frame (frame fastest), each ``codebook_bits`` wide,
packed LSB-first into a continuous bitstream and zero-filled to a byte
boundary: ``ceil(tokens * bits / 8)`` bytes.
"""
from __future__ import annotations

import math
import struct

import numpy as np

from . import _kernels
from .errors import (BadMagicError, CodeRangeError, DacFormatError, TruncatedPayloadError,
                     VersionMismatchError)
from .pipeline import DacStream

MAGIC = b"DACX"
VERSION = 1
HEADER = struct.Struct("<4sHIIQHHBIQffQ")
HEADER_SIZE = HEADER.size
BELOW_GATE_BITS = 0x7FC00000


def payload_size(channels, n_codebooks, frames, bits) -> int:
    return (channels * n_codebooks * frames * bits + 7) // 8


def pack_tokens(codes, bits, impl=None) -> bytes:
    codes = np.asarray(codes)
    if not 1 <= bits <= 16:
        raise ValueError(f"bits must be in [1, 16], got {bits}")
    if codes.size:
        if codes.min() < 0 or int(codes.max()) >= 1 << bits:
            bad = int(codes.max()) if codes.max() >= 1 << bits else int(codes.min())
            raise CodeRangeError(f"token {bad} does not fit in {bits} bits")
    return _kernels.pack_bits(codes.astype(np.uint16).ravel(), bits, impl=impl).tobytes()


def unpack_tokens(buf, bits, shape, impl=None) -> np.ndarray:
    count = math.prod(shape)
    if len(buf) < payload_size(count, 1, 1, bits):
        raise TruncatedPayloadError(f"{len(buf)} bytes cannot hold {count} {bits}-bit tokens")
    return _kernels.unpack_bits(buf, bits, count, impl=impl).reshape(shape)


def _loudness_to_f32_bits(value) -> bytes:
    if math.isinf(value) and value < 0:
        return struct.pack("<I", BELOW_GATE_BITS)
    return struct.pack("<f", value)


def encode_header(stream: DacStream) -> bytes:
    head = HEADER.pack(
        MAGIC, VERSION, stream.sample_rate, stream.original_sample_rate, stream.original_length,
        stream.channels, stream.n_codebooks, stream.codebook_bits, stream.frames_per_chunk,
        stream.frames, 0.0, stream.win_duration_ms, stream.weights_seed)
    # patch the loudness field so the sentinel bit pattern is exact
    return head[:39] + _loudness_to_f32_bits(stream.input_loudness_db) + head[43:]


def to_bytes(stream: DacStream) -> bytes:
    if stream.frames_per_chunk < 1 or stream.frames % stream.frames_per_chunk:
        raise DacFormatError(
            f"total frames {stream.frames} is not a multiple of frames_per_chunk {stream.frames_per_chunk}")
    return encode_header(stream) + pack_tokens(stream.codes, stream.codebook_bits)


def from_bytes(data: bytes) -> DacStream:
    if len(data) < HEADER_SIZE:
        if data[:4] != MAGIC[:len(data[:4])]:
            raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
        raise DacFormatError(f"file is {len(data)} bytes, shorter than the {HEADER_SIZE}-byte header")
    (magic, version, sample_rate, original_rate, original_length, channels, n_codebooks, bits,
     fpc, total_frames, _, win_ms, seed) = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionMismatchError(f"DACX version {version} is not supported (expected {VERSION})")
    if not 1 <= bits <= 16:
        raise DacFormatError(f"codebook_bits {bits} outside [1, 16]")
    if fpc < 1 or total_frames % fpc:
        raise DacFormatError(f"total frames {total_frames} is not a multiple of {fpc} frames per chunk")
    (loud_bits,) = struct.unpack_from("<I", data, 39)
    loudness = float("-inf") if loud_bits == BELOW_GATE_BITS else struct.unpack_from("<f", data, 39)[0]
    declared = payload_size(channels, n_codebooks, total_frames, bits)
    payload = data[HEADER_SIZE:]
    if len(payload) != declared:
        raise TruncatedPayloadError(
            f"payload is {len(payload)} bytes but the header declares {declared}")
    codes = unpack_tokens(payload, bits, (channels, n_codebooks, total_frames))
    return DacStream(
        codes=codes,
        frames_per_chunk=fpc,
        original_length=original_length,
        original_sample_rate=original_rate,
        input_loudness_db=loudness,
        win_duration_ms=win_ms,
        sample_rate=sample_rate,
        codebook_bits=bits,
        weights_seed=seed,
    )


def write_dac_file(path, stream: DacStream):
    data = to_bytes(stream)
    with open(path, "wb") as fh:
        fh.write(data)


def read_dac_file(path) -> DacStream:
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
