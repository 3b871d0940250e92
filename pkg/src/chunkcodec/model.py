"""Desk-scale encoder/decoder with residual vector quantization.

Weights are synthetic: a SplitMix64 stream seeded by a 64-bit integer is
mapped to float32 values uniform in [-0.05, 0.05] and consumed in this order:

1. encoder layers, each as kernel ``(out, in, k)`` in C order then bias ``(out,)``
2. decoder layers, same layout
3. the quantizer input projection ``(codebook_dim, latent_dim)`` then its bias
4. for every RVQ stage: output projection ``(latent_dim, codebook_dim)``,
   its bias ``(latent_dim,)``, then the codebook ``(2**bits, codebook_dim)``

Kernels and projections are weight-normalized per output channel, the way
the reference codec parametrizes its convolutions, so activations neither
vanish nor saturate through the 30-layer stacks. Biases and codebooks are
used as drawn.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .calculus import min_input_length, output_length
from .errors import CodeRangeError, ShapeError

WIDTH = 16
WEIGHT_SCALE = 0.05
# per-output-channel kernel norm after weight normalization
CONV_GAIN = 1.6
PROJ_GAIN = 1.0

_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_BELOW_ONE = np.nextafter(np.float32(1), np.float32(0))


def splitmix64(seed, n, offset=0):
    """``n`` consecutive SplitMix64 outputs (uint64) after skipping ``offset``."""
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * np.uint64(_GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniform_weights(seed, n, offset=0):
    """Map SplitMix64 outputs to float32 in [-0.05, 0.05]: top 53 bits -> [0, 1) -> affine."""
    u = (splitmix64(seed, n, offset) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return (WEIGHT_SCALE * (2.0 * u - 1.0)).astype(np.float32)


@dataclass(frozen=True, eq=False)
class ConvParams:
    weight: np.ndarray  # (out, in, k), effective (normalized) kernel
    bias: np.ndarray


@dataclass(frozen=True, eq=False)
class RVQStage:
    out_weight: np.ndarray  # (latent_dim, codebook_dim)
    out_bias: np.ndarray
    codebook: np.ndarray    # (2**bits, codebook_dim)


@dataclass(frozen=True, eq=False)
class ModelWeights:
    seed: int
    encoder: tuple
    decoder: tuple
    in_weight: np.ndarray   # (codebook_dim, latent_dim)
    in_bias: np.ndarray
    stages: tuple

    def arrays(self):
        """Every array in stream order."""
        for p in self.encoder + self.decoder:
            yield p.weight
            yield p.bias
        yield self.in_weight
        yield self.in_bias
        for st in self.stages:
            yield st.out_weight
            yield st.out_bias
            yield st.codebook

    def equals(self, other) -> bool:
        a, b = list(self.arrays()), list(other.arrays())
        return self.seed == other.seed and len(a) == len(b) and all(
            x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b))


def layer_channels(graph):
    """(in, out) channel counts for every encoder and decoder layer."""
    def chain(n, first_in, last_out):
        dims = []
        for i in range(n):
            dims.append((first_in if i == 0 else WIDTH, last_out if i == n - 1 else WIDTH))
        return dims

    return chain(len(graph.encoder_layers), 1, graph.latent_dim), \
        chain(len(graph.decoder_layers), graph.latent_dim, 1)


def _weight_norm(v, gain):
    flat = v.reshape(v.shape[0], -1).astype(np.float64)
    norm = np.sqrt(np.sum(flat * flat, axis=1))
    return (gain * flat / norm[:, None]).astype(np.float32).reshape(v.shape)


def init_weights(graph, seed) -> ModelWeights:
    seed = int(seed)
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    enc_dims, dec_dims = layer_channels(graph)
    shapes = []
    for layers, dims in ((graph.encoder_layers, enc_dims), (graph.decoder_layers, dec_dims)):
        for layer, (cin, cout) in zip(layers, dims):
            shapes += [(cout, cin, layer.kernel), (cout,)]
    cd, ld = graph.codebook_dim, graph.latent_dim
    shapes += [(cd, ld), (cd,)]
    for _ in range(graph.n_codebooks):
        shapes += [(ld, cd), (ld,), (graph.codebook_size, cd)]

    stream = uniform_weights(seed, sum(int(np.prod(s)) for s in shapes))
    arrays, pos = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(stream[pos:pos + size].reshape(shape))
        pos += size

    it = iter(arrays)
    encoder = tuple(ConvParams(_weight_norm(next(it), CONV_GAIN), next(it)) for _ in enc_dims)
    decoder = tuple(ConvParams(_weight_norm(next(it), CONV_GAIN), next(it)) for _ in dec_dims)
    in_weight = _weight_norm(next(it), PROJ_GAIN)
    in_bias = next(it)
    stages = []
    for _ in range(graph.n_codebooks):
        out_w = _weight_norm(next(it), PROJ_GAIN)
        out_b = next(it)
        book = next(it)
        if len(np.unique(book, axis=0)) != len(book):
            raise ValueError(f"seed {seed} produced a degenerate codebook")
        stages.append(RVQStage(out_w, out_b, book))
    weights = ModelWeights(seed, encoder, decoder, in_weight, in_bias, tuple(stages))
    for a in weights.arrays():
        a.setflags(write=False)
    return weights


def _run_layer(layer, params, x, padding, impl):
    k, s, d = layer.kernel, layer.stride, layer.dilation
    length = x.shape[1]
    if layer.transposed:
        y = _kernels.conv_transpose1d(x, params.weight, params.bias, s, d, impl=impl)
        if padding:
            target = length * s
            crop = y.shape[1] - target
            if crop >= 0:
                y = y[:, crop // 2:crop // 2 + target]
            else:
                y = np.pad(y, ((0, 0), (0, -crop)))
        return y
    if padding:
        target = (length - 1) // s + 1
        total = (target - 1) * s + d * (k - 1) + 1 - length
        left = total // 2
        x = np.pad(x, ((0, 0), (left, total - left)))
    return _kernels.conv1d(x, params.weight, params.bias, s, d, impl=impl)


def _run_stack(layers, params, x, padding, final_tanh, probe, impl):
    n = len(layers)
    for i, (layer, p) in enumerate(zip(layers, params)):
        y = _run_layer(layer, p, x, padding, impl)
        if i < n - 1 or final_tanh:
            y = np.tanh(y)
        if probe is not None:
            probe.observe(x.size + y.size)
        x = y
    return x


def encode(weights, graph, window, probe=None, impl=None):
    """Encode a 1-D window to latents ``(latent_dim, frames)``."""
    x = np.asarray(window, dtype=np.float32)
    if x.ndim != 1:
        raise ShapeError(f"encode expects a 1-D window, got shape {x.shape}")
    if not graph.padding:
        need = min_input_length(graph.encoder_layers)
        if x.shape[0] < need:
            raise ShapeError(
                f"window of {x.shape[0]} samples is too short; the unpadded encoder needs at least {need}")
    out = _run_stack(graph.encoder_layers, weights.encoder, x[None, :], graph.padding,
                     False, probe, impl)
    assert out.shape[1] == output_length(graph.encoder_layers, x.shape[0], graph.padding)
    return out


def _reconstruct(weights, codes):
    latent_dim = weights.in_weight.shape[1]
    z = np.zeros((latent_dim, codes.shape[1]), np.float32)
    for stage, idx in zip(weights.stages, codes):
        entries = stage.codebook[idx]  # (frames, codebook_dim)
        z += stage.out_weight @ entries.T + stage.out_bias[:, None]
    return z


def quantize(weights, latents, impl=None, return_residuals=False):
    """Residual vector quantization of ``latents`` ``(latent_dim, frames)``.

    Returns ``(codes, quantized)`` where codes is uint16 ``(n_codebooks, frames)``;
    with ``return_residuals`` the per-stage residual norms ``(n_codebooks + 1, frames)``
    are appended.
    """
    z = np.asarray(latents, dtype=np.float32)
    if z.ndim != 2 or z.shape[0] != weights.in_weight.shape[1]:
        raise ShapeError(f"latents must be (latent_dim={weights.in_weight.shape[1]}, frames), got {z.shape}")
    residual = np.ascontiguousarray((weights.in_weight @ z + weights.in_bias[:, None]).T)
    codes = np.empty((len(weights.stages), z.shape[1]), np.uint16)
    norms = [np.linalg.norm(residual, axis=1)]
    for i, stage in enumerate(weights.stages):
        idx = _kernels.nearest_code(residual, stage.codebook, impl=impl)
        codes[i] = idx
        residual = residual - stage.codebook[idx]
        norms.append(np.linalg.norm(residual, axis=1))
    quantized = _reconstruct(weights, codes)
    if return_residuals:
        return codes, quantized, np.array(norms)
    return codes, quantized


def from_codes(weights, codes):
    codes = np.asarray(codes)
    if codes.ndim != 2 or codes.shape[0] != len(weights.stages):
        raise ShapeError(f"codes must be (n_codebooks={len(weights.stages)}, frames), got {codes.shape}")
    size = weights.stages[0].codebook.shape[0] if weights.stages else 0
    if codes.size and (codes.min() < 0 or codes.max() >= size):
        raise CodeRangeError(f"code {int(codes.max())} out of range for a {size}-entry codebook")
    return _reconstruct(weights, codes.astype(np.intp))


def decode(weights, graph, latents, probe=None, impl=None):
    """Decode latents ``(latent_dim, frames)`` to a 1-D float32 signal in (-1, 1)."""
    z = np.asarray(latents, dtype=np.float32)
    out = _run_stack(graph.decoder_layers, weights.decoder, z, graph.padding, True, probe, impl)
    # float32 tanh rounds to +-1 for large inputs; keep the open interval
    return np.clip(out[0], -_BELOW_ONE, _BELOW_ONE)
