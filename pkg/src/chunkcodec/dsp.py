"""Sample-rate conversion and BS.1770 integrated loudness."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

from .errors import LoudnessError
from .types import AudioBuffer

BELOW_GATE = float("-inf")

ABSOLUTE_GATE_LUFS = -70.0
RELATIVE_GATE_DB = -10.0
BLOCK_SECONDS = 0.4
BLOCK_OVERLAP = 0.75

# channel weights for L, R, C, Ls, Rs
_CHANNEL_WEIGHTS = (1.0, 1.0, 1.0, 1.41, 1.41)


@dataclass(frozen=True)
class ResampleSpec:
    old_sr: int
    new_sr: int
    zeros: int = 24
    rolloff: float = 0.945

    def __post_init__(self):
        if self.old_sr <= 0 or self.new_sr <= 0:
            raise ValueError(f"sample rates must be positive, got {self.old_sr} -> {self.new_sr}")
        if self.zeros < 1:
            raise ValueError("zeros must be a positive integer")
        if not 0 < self.rolloff <= 1:
            raise ValueError("rolloff must lie in (0, 1]")

    @property
    def ratio(self):
        """Reduced (old, new) pair."""
        g = math.gcd(self.old_sr, self.new_sr)
        return self.old_sr // g, self.new_sr // g

    def kernel_width(self):
        old, new = self.ratio
        return math.ceil(self.zeros * old / (min(old, new) * self.rolloff))


def sinc_kernels(spec: ResampleSpec) -> np.ndarray:
    """One Hann-windowed sinc filter per output phase, shape ``(new, 2*width + old)``."""
    old, new = spec.ratio
    cutoff = min(old, new) * spec.rolloff
    width = spec.kernel_width()
    idx = np.arange(-width, width + old, dtype=np.float64)
    phase = np.arange(new, dtype=np.float64)[:, None]
    t = (idx[None, :] / old - phase / new) * cutoff
    t = np.clip(t, -spec.zeros, spec.zeros) * math.pi
    window = np.cos(t / spec.zeros / 2) ** 2
    kernels = np.sinc(t / math.pi) * window
    return kernels / kernels.sum(axis=1, keepdims=True)


def resample_array(x, spec: ResampleSpec) -> np.ndarray:
    """Resample the last axis of ``x``. Output length is ``ceil(len * new / old)``."""
    x = np.asarray(x, dtype=np.float32)
    old, new = spec.ratio
    if old == new:
        return x.copy()
    length = x.shape[-1]
    out_len = -(-length * new // old)
    width = spec.kernel_width()
    kernels = sinc_kernels(spec)
    flat = x.reshape(-1, length).astype(np.float64)
    padded = np.pad(flat, ((0, 0), (width, width + old)))
    frames = sliding_window_view(padded, kernels.shape[1], axis=1)[:, ::old]
    n_frames = length // old + 1
    y = np.empty((flat.shape[0], n_frames * new), np.float32)
    step = max(1, (1 << 21) // kernels.shape[1])
    for start in range(0, n_frames, step):
        stop = min(n_frames, start + step)
        block = frames[:, start:stop] @ kernels.T
        y[:, start * new:stop * new] = block.reshape(flat.shape[0], -1)
    return y[:, :out_len].reshape(x.shape[:-1] + (out_len,))


def resample(audio: AudioBuffer, spec: ResampleSpec) -> AudioBuffer:
    if spec.old_sr != audio.sample_rate:
        raise ValueError(f"spec expects {spec.old_sr} Hz input, audio is {audio.sample_rate} Hz")
    if spec.old_sr == spec.new_sr:
        return audio
    return AudioBuffer(resample_array(audio.samples, spec), spec.new_sr)


def resample_to(audio: AudioBuffer, new_sr: int) -> AudioBuffer:
    return resample(audio, ResampleSpec(audio.sample_rate, new_sr))


def k_weighting(rate):
    """Biquad pair ``((b1, a1), (b2, a2))`` for K-weighting at ``rate`` Hz.

    Both stages come from the analog prototypes behind the 48 kHz coefficient
    table, mapped through the bilinear transform at the requested rate.
    """
    # stage 1: high shelf
    f0, gain_db, q = 1681.974450955533, 3.999843853973347, 0.7071752369554196
    k = math.tan(math.pi * f0 / rate)
    vh = 10.0 ** (gain_db / 20.0)
    vb = vh ** 0.4996667741545416
    a0 = 1.0 + k / q + k * k
    b1 = np.array([(vh + vb * k / q + k * k) / a0, 2.0 * (k * k - vh) / a0,
                   (vh - vb * k / q + k * k) / a0])
    a1 = np.array([1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0])
    # stage 2: RLB high-pass
    f0, q = 38.13547087602444, 0.5003270373238773
    k = math.tan(math.pi * f0 / rate)
    a0 = 1.0 + k / q + k * k
    b2 = np.array([1.0, -2.0, 1.0])
    a2 = np.array([1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0])
    return (b1, a1), (b2, a2)


def block_powers(audio: AudioBuffer) -> np.ndarray:
    """Mean square of the K-weighted signal per channel per 400 ms block, ``(channels, blocks)``."""
    rate = audio.sample_rate
    block = int(round(BLOCK_SECONDS * rate))
    step = int(round(BLOCK_SECONDS * (1 - BLOCK_OVERLAP) * rate))
    if audio.frames < block:
        raise LoudnessError(
            f"loudness needs at least {BLOCK_SECONDS * 1000:.0f} ms of audio, got {audio.frames} samples")
    (b1, a1), (b2, a2) = k_weighting(rate)
    x = audio.samples.astype(np.float64)
    y = lfilter(b2, a2, lfilter(b1, a1, x, axis=1), axis=1)
    n_blocks = (audio.frames - block) // step + 1
    csum = np.concatenate([np.zeros((y.shape[0], 1)), np.cumsum(y * y, axis=1)], axis=1)
    starts = np.arange(n_blocks) * step
    return (csum[:, starts + block] - csum[:, starts]) / block


def integrated_loudness(audio: AudioBuffer) -> float:
    """Gated integrated loudness in LUFS; ``-inf`` when every block falls under the absolute gate."""
    z = block_powers(audio)
    weights = np.array([_CHANNEL_WEIGHTS[i] if i < len(_CHANNEL_WEIGHTS) else 1.0
                        for i in range(audio.channels)])[:, None]
    with np.errstate(divide="ignore"):
        block_lufs = -0.691 + 10.0 * np.log10(np.sum(weights * z, axis=0))
    above = block_lufs > ABSOLUTE_GATE_LUFS
    if not np.any(above):
        return BELOW_GATE
    relative = -0.691 + 10.0 * np.log10(np.sum(weights[:, 0] * z[:, above].mean(axis=1))) \
        + RELATIVE_GATE_DB
    keep = above & (block_lufs > relative)
    return float(-0.691 + 10.0 * np.log10(np.sum(weights[:, 0] * z[:, keep].mean(axis=1))))


class Normalized(NamedTuple):
    audio: AudioBuffer
    gain_db: float
    gated: bool  # True when the input was below the gate and left untouched


def apply_gain(audio: AudioBuffer, gain_db: float) -> AudioBuffer:
    scale = np.float32(10.0 ** (gain_db / 20.0))
    return AudioBuffer(audio.samples * scale, audio.sample_rate)


def normalize_loudness(audio: AudioBuffer, target_db: float) -> Normalized:
    measured = integrated_loudness(audio)
    if measured == BELOW_GATE:
        return Normalized(audio, 0.0, True)
    gain = target_db - measured
    return Normalized(apply_gain(audio, gain), gain, False)
