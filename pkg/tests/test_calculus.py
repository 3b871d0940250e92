import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from chunkcodec.calculus import (aggregate_delay, input_length, min_input_length, output_length,
                                 summarize)
from chunkcodec.types import CodecGraph, LayerGeom, graph_from_dict
from conftest import toy_graph_dict

# frozen from the direct-convolution oracle
DELAY_44K = 7904
HOP_OFFSET_44K = 16022


def test_single_layer_examples():
    assert output_length([LayerGeom.conv(7)], 100) == 94
    assert output_length([LayerGeom.conv_transpose(4, 2)], 7) == \
        oracles.direct_conv_length("conv_transpose", 4, 2, 1, 7) == 16


def test_full_graph_hop(graph):
    assert output_length(graph.layers, 16384) == 362


def test_negative_lengths_carried():
    assert output_length([LayerGeom.conv(7), LayerGeom.conv(7)], 3) == -9


def test_delay_examples(graph):
    assert aggregate_delay([]) == 0
    assert aggregate_delay([LayerGeom.conv(7)]) == oracles.impulse_delay(7) == 3
    assert aggregate_delay(graph.layers) == DELAY_44K


def test_delay_probe_invariance(graph):
    assert {aggregate_delay(graph.layers, p) for p in (0, 512, 4096)} == {DELAY_44K}


def test_input_length_inverts_output_length(graph):
    for n in (1, 362, 874):
        need = input_length(graph.layers, n)
        assert output_length(graph.layers, need) >= n
        assert output_length(graph.layers, need - 1) < n


def test_min_input_length(graph):
    n = min_input_length(graph.encoder_layers)
    assert output_length(graph.encoder_layers, n) == 1
    assert output_length(graph.encoder_layers, n - 1) < 1


def test_padded_identity(graph):
    for mult in (1, 2, 7, 32):
        assert output_length(graph.layers, 512 * mult, padding=True) == 512 * mult


def test_summary(graph):
    s = summarize(graph)
    assert s.receptive_field == 512
    assert s.token_rate_hz == pytest.approx(44100 / 512, abs=1e-9)
    assert s.bitrate_bps == pytest.approx(7751.953125, abs=1e-6)
    assert s.delay == DELAY_44K
    toy = summarize(graph_from_dict(toy_graph_dict()))
    assert toy.receptive_field == 4 and toy.bitrate_bps == 32000
    empty = CodecGraph((), (), (), (), 4, 1, 8, 2, 16000)
    assert summarize(empty).receptive_field == 1 and summarize(empty).delay == 0


def test_affine_hop_law(graph):
    for n in range(16384, 16384 + 512 * 40, 512):
        assert output_length(graph.layers, n) == n - HOP_OFFSET_44K


layer_st = st.tuples(st.sampled_from(["conv", "conv_transpose"]), st.integers(1, 9),
                     st.integers(1, 4), st.sampled_from([1, 3, 9]))


def _geom(kind, k, s, d):
    return LayerGeom.conv(k, s, d) if kind == "conv" else LayerGeom.conv_transpose(k, s)


def _normalize(layers):
    # transposed layers carry no dilation
    return [(kind, k, s, d if kind == "conv" else 1) for kind, k, s, d in layers]


def _calculus_trace(geoms, n):
    return [output_length(geoms[:i + 1], n) for i in range(len(geoms))]


def matches_direct(layers, n):
    """Calculus agrees with execution layer by layer while there is output to run."""
    geoms = [_geom(*l) for l in layers]
    direct = oracles.stack_trace(layers, n)
    calc = _calculus_trace(geoms, n)[:len(direct)]
    return all(c == d if d > 0 else c <= 0 for c, d in zip(calc, direct))


def balanced_stack(draw):
    """Encoder convs then decoder layers whose transposed strides undo the encoder's."""
    strides = draw(st.lists(st.sampled_from([1, 2, 4]), min_size=1, max_size=3))
    enc, dec = [], []
    for s in strides:
        enc.append(("conv", draw(st.integers(1, 9)), s, draw(st.sampled_from([1, 3, 9]))))
        if draw(st.booleans()):
            enc.append(("conv", draw(st.integers(1, 9)), 1, draw(st.sampled_from([1, 3, 9]))))
    for s in reversed(strides):
        dec.append(("conv_transpose", draw(st.integers(1, 9)), s, 1))
        if draw(st.booleans()):
            dec.append(("conv", draw(st.integers(1, 9)), 1, draw(st.sampled_from([1, 3]))))
    return enc + dec


@settings(max_examples=300, deadline=None)
@given(st.lists(layer_st, min_size=1, max_size=5), st.integers(1, 4096))
def test_output_length_matches_direct_convolution(layers, n):
    assert matches_direct(_normalize(layers), n)


@settings(max_examples=200, deadline=None)
@given(st.composite(balanced_stack)())
def test_delay_probe_invariant_balanced(layers):
    geoms = [_geom(*l) for l in layers]
    assert len({aggregate_delay(geoms, p) for p in (0, 512, 4096)}) == 1


def test_delay_not_probe_invariant_for_net_downsampling():
    # a lone strided conv changes the rate, so no single delay exists
    assert len({aggregate_delay([LayerGeom.conv(1, 2)], p) for p in (0, 512, 4096)}) == 3


@settings(max_examples=200, deadline=None)
@given(st.lists(layer_st, min_size=1, max_size=5), st.integers(0, 4000))
def test_monotone_in_length(layers, n):
    geoms = [_geom(*l) for l in _normalize(layers)]
    assert output_length(geoms, n) <= output_length(geoms, n + 1)
