"""Minimal RIFF/WAVE reader and writer for 16-bit PCM and 32-bit IEEE float."""
import enum
import struct
from pathlib import Path

import numpy as np

from .errors import UnsupportedEncodingError, WavFormatError
from .types import AudioBuffer

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

_FORMAT_NAMES = {0x0002: "ADPCM", 0x0006: "A-law", 0x0007: "mu-law", 0x0011: "IMA ADPCM",
                 0x0055: "MPEG Layer 3"}


class BitDepth(enum.Enum):
    INT16 = "int16"
    FLOAT32 = "float32"


def _parse_fmt(body):
    if len(body) < 16:
        raise WavFormatError("fmt chunk shorter than 16 bytes")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack_from("<HHIIHH", body)
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise WavFormatError("WAVE_FORMAT_EXTENSIBLE fmt chunk is truncated")
        # first two bytes of the sub-format GUID carry the real format tag
        tag = struct.unpack_from("<H", body, 24)[0]
    if channels == 0:
        raise WavFormatError("fmt chunk declares zero channels")
    if rate == 0:
        raise WavFormatError("fmt chunk declares a zero sample rate")
    if tag == WAVE_FORMAT_PCM and bits == 16:
        dtype = np.dtype("<i2")
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype = np.dtype("<f4")
    else:
        name = _FORMAT_NAMES.get(tag, f"format tag 0x{tag:04x}")
        raise UnsupportedEncodingError(f"unsupported WAV encoding: {name}, {bits}-bit")
    if block_align != channels * dtype.itemsize:
        raise WavFormatError(f"block align {block_align} does not match {channels} x {bits}-bit")
    return dtype, channels, rate


def read_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM or 32-bit float WAV file into an :class:`AudioBuffer`.

    Integer samples are scaled by 1/32768.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        chunk_id, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            if fmt is None:
                raise WavFormatError(f"{path}: data chunk precedes fmt chunk")
            payload = body
            break
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise WavFormatError(f"{path}: missing data chunk")
    dtype, channels, rate = fmt
    frame_bytes = channels * dtype.itemsize
    n_frames = len(payload) // frame_bytes
    raw = np.frombuffer(payload[:n_frames * frame_bytes], dtype=dtype).reshape(n_frames, channels)
    if dtype.kind == "i":
        samples = raw.T.astype(np.float32) / np.float32(32768.0)
    else:
        samples = raw.T.astype(np.float32)
    return AudioBuffer(samples, rate)


def write_wav(path, audio: AudioBuffer, bit_depth=BitDepth.FLOAT32):
    bit_depth = BitDepth(bit_depth)
    interleaved = audio.samples.T
    if bit_depth is BitDepth.INT16:
        pcm = np.clip(np.round(interleaved * 32768.0), -32768, 32767).astype("<i2")
        tag, bits = WAVE_FORMAT_PCM, 16
    else:
        pcm = interleaved.astype("<f4")
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
    payload = pcm.tobytes()
    block_align = audio.channels * bits // 8
    fmt = struct.pack("<HHIIHH", tag, audio.channels, audio.sample_rate,
                      audio.sample_rate * block_align, block_align, bits)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        chunks += b"\x00"
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)
