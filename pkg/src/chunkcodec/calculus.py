"""Length and delay arithmetic over convolution stacks.

Everything here is exact integer (or rational) arithmetic; no floats touch
a floor or ceiling.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

from .types import CodecGraph


@dataclass(frozen=True)
class GraphSummary:
    receptive_field: int
    delay: int
    token_rate_hz: float
    bitrate_bps: float


def layer_output_length(layer, length, padding=False):
    k, s, d = layer.kernel, layer.stride, layer.dilation
    if padding:
        if layer.transposed:
            return length * s
        return (length - 1) // s + 1
    if layer.transposed:
        return (length - 1) * s + d * (k - 1) + 1
    return (length - d * (k - 1) - 1) // s + 1


def output_length(layers, input_len, padding=False):
    """Length after running ``input_len`` samples through ``layers`` in order.

    Unpadded lengths may go negative for short inputs; they are carried through
    unclamped, which is what the delay computation relies on.
    """
    length = int(input_len)
    for layer in layers:
        length = layer_output_length(layer, length, padding)
    return length


def input_length(layers, out_len):
    """Walk ``layers`` backwards from ``out_len``, rounding up after each layer."""
    length = Fraction(out_len)
    for layer in reversed(layers):
        k, s, d = layer.kernel, layer.stride, layer.dilation
        if layer.transposed:
            length = (length - d * (k - 1) - 1) / s + 1
        else:
            length = (length - 1) * s + d * (k - 1) + 1
        length = Fraction(math.ceil(length))
    return int(length)


def aggregate_delay(layers, probe=0):
    """Samples of zero padding needed on each side so chunk outputs line up with the input."""
    layers = tuple(layers)
    if not layers:
        return 0
    l_out = output_length(layers, probe)
    l_in = input_length(layers, l_out)
    return (l_in - l_out) // 2


def min_input_length(layers):
    """Smallest unpadded input that yields at least one output sample."""
    lo, hi = 0, 1
    while output_length(layers, hi) < 1:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if output_length(layers, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return hi


def summarize(graph: CodecGraph) -> GraphSummary:
    receptive_field = math.prod(l.stride for l in graph.encoder_layers)
    token_rate = graph.sample_rate / receptive_field
    return GraphSummary(
        receptive_field=receptive_field,
        delay=aggregate_delay(graph.layers),
        token_rate_hz=token_rate,
        bitrate_bps=token_rate * graph.n_codebooks * graph.codebook_bits,
    )
