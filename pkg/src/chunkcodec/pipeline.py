"""Chunked, constant-memory compression and decompression."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import dsp, model
from .calculus import aggregate_delay, output_length
from .errors import CorruptStreamError, WindowTooSmallError
from .types import AudioBuffer, CodecGraph

DEFAULT_NORMALIZE_DB = -16.0


@dataclass(frozen=True)
class ChunkPlan:
    win_duration_ms: float
    n_samples: int
    hop: int
    delay: int
    frames_per_chunk: int
    receptive_field: int
    sample_rate: int

    @property
    def hop_ms(self) -> float:
        return self.hop * 1000.0 / self.sample_rate

    def n_chunks(self, length: int) -> int:
        """Chunks needed for ``length`` input samples (delay padding included)."""
        return -(-(length + 2 * self.delay) // self.hop)


def _to_fraction(value) -> Fraction:
    # str() gives the shortest round-tripping decimal, so 0.37 stays 37/100
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)


def plan_chunks(graph: CodecGraph, win_duration_ms) -> ChunkPlan:
    if not win_duration_ms > 0:
        raise ValueError(f"window duration must be positive, got {win_duration_ms} ms")
    rf = graph.receptive_field
    n_samples = math.ceil(_to_fraction(win_duration_ms) * graph.sample_rate / (1000 * rf)) * rf
    hop = output_length(graph.layers, n_samples)
    if hop < 1:
        m = n_samples
        while output_length(graph.layers, m) < 1:
            m += rf
        min_ms = m * 1000 / graph.sample_rate
        raise WindowTooSmallError(
            f"a {win_duration_ms} ms window ({n_samples} samples) yields no output; "
            f"the minimum feasible window is {min_ms:.1f} ms ({m} samples)", min_ms)
    return ChunkPlan(
        win_duration_ms=float(win_duration_ms),
        n_samples=n_samples,
        hop=hop,
        delay=aggregate_delay(graph.layers),
        frames_per_chunk=output_length(graph.encoder_layers, n_samples),
        receptive_field=rf,
        sample_rate=graph.sample_rate,
    )


@dataclass(frozen=True, eq=False)
class DacStream:
    """Tokens for a whole file plus what decompression needs to undo preprocessing.

    ``codes`` is uint16 ``(channels, n_codebooks, frames)``. ``original_length`` counts
    samples at ``original_sample_rate``. ``input_loudness_db`` is ``-inf`` for input
    that never cleared the loudness gate.
    """

    codes: np.ndarray
    frames_per_chunk: int
    original_length: int
    original_sample_rate: int
    input_loudness_db: float
    win_duration_ms: float
    sample_rate: int
    codebook_bits: int
    weights_seed: int

    @property
    def channels(self) -> int:
        return self.codes.shape[0]

    @property
    def n_codebooks(self) -> int:
        return self.codes.shape[1]

    @property
    def frames(self) -> int:
        return self.codes.shape[2]

    @property
    def n_chunks(self) -> int:
        return self.frames // self.frames_per_chunk

    def __eq__(self, other):
        if not isinstance(other, DacStream):
            return NotImplemented
        return (self.codes.shape == other.codes.shape
                and np.array_equal(self.codes, other.codes)
                and self.frames_per_chunk == other.frames_per_chunk
                and self.original_length == other.original_length
                and self.original_sample_rate == other.original_sample_rate
                and (self.input_loudness_db == other.input_loudness_db
                     or (math.isnan(self.input_loudness_db) and math.isnan(other.input_loudness_db)))
                and self.win_duration_ms == other.win_duration_ms
                and self.sample_rate == other.sample_rate
                and self.codebook_bits == other.codebook_bits
                and self.weights_seed == other.weights_seed)

    __hash__ = None


class MemoryProbe:
    """Tracks the largest working set (in samples) held at once during a run.

    The token accumulator and the output sink are not counted.
    """

    def __init__(self):
        self.peak = 0
        self._held = 0

    def observe(self, n):
        self.peak = max(self.peak, self._held + int(n))

    @contextmanager
    def holding(self, n):
        self._held += int(n)
        self.observe(0)
        try:
            yield
        finally:
            self._held -= int(n)


def peak_memory_samples(probe: MemoryProbe | None) -> int:
    return 0 if probe is None else probe.peak


def _window(x, start, n, delay):
    """Samples ``[start, start + n)`` of ``x`` zero-padded by ``delay`` on both sides."""
    buf = np.zeros(n, np.float32)
    lo = start - delay
    src_lo, src_hi = max(lo, 0), min(lo + n, x.shape[0])
    if src_hi > src_lo:
        buf[src_lo - lo:src_hi - lo] = x[src_lo:src_hi]
    return buf


def _measure(audio: AudioBuffer) -> float:
    block = int(round(dsp.BLOCK_SECONDS * audio.sample_rate))
    if audio.frames < block:
        audio = AudioBuffer(np.pad(audio.samples, ((0, 0), (0, block - audio.frames))),
                            audio.sample_rate)
    return dsp.integrated_loudness(audio)


def _batched(seq, size):
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def _encode_chunk(graph, weights, window, probe, impl):
    with probe.holding(window.size) if probe else _null():
        latents = model.encode(weights, graph, window, probe=probe, impl=impl)
        codes, _ = model.quantize(weights, latents, impl=impl)
        if probe:
            probe.observe(latents.size + codes.size)
    return codes


def _decode_chunk(graph, weights, codes, probe, impl):
    with probe.holding(codes.size) if probe else _null():
        latents = model.from_codes(weights, codes)
        if probe:
            probe.observe(latents.size)
        with probe.holding(latents.size) if probe else _null():
            return model.decode(weights, graph, latents, probe=probe, impl=impl)


@contextmanager
def _null():
    yield


def compress(graph: CodecGraph, weights, audio: AudioBuffer, win_duration_ms,
             normalize_db=DEFAULT_NORMALIZE_DB, jobs=1, probe=None, impl=None) -> DacStream:
    """Encode ``audio`` window by window; returns every channel's tokens.

    With ``jobs > 1`` chunks are encoded on a thread pool, ``jobs`` at a time,
    and still emitted in order. ``probe`` is honoured only in sequential mode.
    """
    if audio.frames == 0:
        raise ValueError("cannot compress an empty signal")
    graph = graph if not graph.padding else _unpadded(graph)
    plan = plan_chunks(graph, win_duration_ms)
    original_length, original_rate = audio.frames, audio.sample_rate
    if audio.sample_rate != graph.sample_rate:
        audio = dsp.resample_to(audio, graph.sample_rate)

    loudness = _measure(audio)
    if loudness != dsp.BELOW_GATE:
        loudness = float(np.float32(loudness))
        audio = dsp.apply_gain(audio, normalize_db - loudness)

    length = audio.frames
    starts = list(range(0, length + 2 * plan.delay, plan.hop))
    fpc = plan.frames_per_chunk
    codes = np.empty((audio.channels, graph.n_codebooks, len(starts) * fpc), np.uint16)
    for ch in range(audio.channels):
        x = audio.samples[ch]
        if jobs > 1:
            with ThreadPoolExecutor(jobs) as pool:
                for batch_no, batch in enumerate(_batched(starts, jobs)):
                    results = pool.map(
                        lambda s: _encode_chunk(graph, weights, _window(x, s, plan.n_samples, plan.delay),
                                                None, impl), batch)
                    for i, chunk in enumerate(results):
                        idx = batch_no * jobs + i
                        codes[ch, :, idx * fpc:(idx + 1) * fpc] = chunk
        else:
            for idx, start in enumerate(starts):
                window = _window(x, start, plan.n_samples, plan.delay)
                codes[ch, :, idx * fpc:(idx + 1) * fpc] = _encode_chunk(graph, weights, window, probe, impl)
    return DacStream(
        codes=codes,
        frames_per_chunk=fpc,
        original_length=original_length,
        original_sample_rate=original_rate,
        input_loudness_db=loudness,
        win_duration_ms=float(np.float32(win_duration_ms)),
        sample_rate=graph.sample_rate,
        codebook_bits=graph.codebook_bits,
        weights_seed=weights.seed,
    )


def _unpadded(graph):
    return replace(graph, padding=False)


def check_stream(graph: CodecGraph, stream: DacStream):
    if stream.codes.ndim != 3:
        raise CorruptStreamError(f"codes must be 3-D, got shape {stream.codes.shape}")
    if stream.n_codebooks != graph.n_codebooks:
        raise CorruptStreamError(
            f"stream has {stream.n_codebooks} codebooks, graph expects {graph.n_codebooks}")
    if stream.sample_rate != graph.sample_rate:
        raise CorruptStreamError(
            f"stream was encoded at {stream.sample_rate} Hz, graph runs at {graph.sample_rate} Hz")
    if stream.frames_per_chunk < 1 or stream.frames % stream.frames_per_chunk:
        raise CorruptStreamError(
            f"{stream.frames} frames is not a multiple of {stream.frames_per_chunk} frames per chunk")


def decompress(graph: CodecGraph, weights, stream: DacStream, jobs=1, probe=None,
               impl=None) -> AudioBuffer:
    graph = graph if not graph.padding else _unpadded(graph)
    check_stream(graph, stream)
    fpc = stream.frames_per_chunk
    hop = output_length(graph.decoder_layers, fpc)
    if hop < 1:
        raise CorruptStreamError(f"{fpc} frames per chunk decode to no samples")
    n_chunks = stream.n_chunks
    model_length = -(-stream.original_length * graph.sample_rate // stream.original_sample_rate)
    out = np.empty((stream.channels, n_chunks * hop), np.float32)
    for ch in range(stream.channels):
        groups = [stream.codes[ch, :, i * fpc:(i + 1) * fpc] for i in range(n_chunks)]
        if jobs > 1:
            with ThreadPoolExecutor(jobs) as pool:
                for i, y in enumerate(pool.map(
                        lambda c: _decode_chunk(graph, weights, c, None, impl), groups)):
                    out[ch, i * hop:(i + 1) * hop] = y
        else:
            for i, group in enumerate(groups):
                out[ch, i * hop:(i + 1) * hop] = _decode_chunk(graph, weights, group, probe, impl)
    if out.shape[1] < model_length:
        raise CorruptStreamError(
            f"stream decodes to {out.shape[1]} samples, fewer than the {model_length} recorded")
    audio = AudioBuffer(out[:, :model_length], graph.sample_rate)
    if math.isfinite(stream.input_loudness_db):
        # the synthetic codec does not preserve level, so restore against a measurement
        measured = _measure(audio)
        if measured != dsp.BELOW_GATE:
            audio = dsp.apply_gain(audio, stream.input_loudness_db - measured)
    if stream.original_sample_rate != graph.sample_rate:
        audio = dsp.resample_to(audio, stream.original_sample_rate)
        audio = AudioBuffer(audio.samples[:, :stream.original_length], audio.sample_rate)
    return audio
