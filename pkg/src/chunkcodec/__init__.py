"""Chunked neural-audio-codec engine with constant-memory compression.

Typical use::

    from chunkcodec import default_graph, init_weights, compress, decompress

    graph = default_graph()
    weights = init_weights(graph, seed=0)
    stream = compress(graph, weights, audio, win_duration_ms=1000)
    restored = decompress(graph, weights, stream)
"""
from ._kernels import BACKEND
from .calculus import GraphSummary, aggregate_delay, output_length, summarize
from .dacfile import read_dac_file, write_dac_file
from .dsp import ResampleSpec, integrated_loudness, normalize_loudness, resample
from .errors import ChunkCodecError
from .model import ModelWeights, init_weights
from .pipeline import (ChunkPlan, DacStream, MemoryProbe, compress, decompress, peak_memory_samples,
                       plan_chunks)
from .types import AudioBuffer, CodecGraph, LayerGeom, LayerKind, default_graph, load_graph_config
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer", "BACKEND", "ChunkCodecError", "ChunkPlan", "CodecGraph", "DacStream",
    "GraphSummary", "LayerGeom", "LayerKind", "MemoryProbe", "ModelWeights", "ResampleSpec",
    "aggregate_delay", "compress", "decompress", "default_graph", "init_weights",
    "integrated_loudness", "load_graph_config", "normalize_loudness", "output_length",
    "peak_memory_samples", "plan_chunks", "read_dac_file", "read_wav", "resample", "summarize",
    "write_dac_file", "write_wav",
]
