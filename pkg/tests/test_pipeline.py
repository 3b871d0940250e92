import math

import numpy as np
import pytest

from chunkcodec import dsp, pipeline
from chunkcodec.calculus import aggregate_delay, output_length
from chunkcodec.errors import CorruptStreamError, WindowTooSmallError
from chunkcodec.pipeline import DacStream, MemoryProbe, compress, decompress, plan_chunks
from chunkcodec.types import AudioBuffer

DELAY = 7904


def noise(seconds, rate=44100, channels=1, seed=0, scale=0.1):
    rng = np.random.default_rng(seed)
    return AudioBuffer(scale * rng.standard_normal((channels, int(round(seconds * rate)))), rate)


def test_plan_370(graph):
    p = plan_chunks(graph, 370)
    assert (p.n_samples, p.hop, p.frames_per_chunk, p.delay) == (16384, 362, 17, DELAY)
    assert round(p.hop_ms, 1) == 8.2
    assert p.n_samples == math.ceil(0.370 * 44100 / 512) * 512


def test_plan_20000(graph):
    p = plan_chunks(graph, 20000)
    assert p.hop == 866154 and round(p.hop_ms, 1) == 19640.7


def test_plan_invariants(graph):
    for ms in (371.6, 400, 777, 2500):
        p = plan_chunks(graph, ms)
        assert p.n_samples % 512 == 0
        assert p.hop == output_length(graph.layers, p.n_samples) >= 1
        assert p.frames_per_chunk == output_length(graph.encoder_layers, p.n_samples)
        assert p.delay == aggregate_delay(graph.layers)


def test_plan_too_small(graph):
    with pytest.raises(WindowTooSmallError) as err:
        plan_chunks(graph, 1)
    assert err.value.min_duration_ms == pytest.approx(16384 / 44.1)
    assert "371.5" in str(err.value)
    with pytest.raises(ValueError):
        plan_chunks(graph, 0)


def test_exact_window_rounding(graph):
    # 0.37 s must not turn into 370.00000000000006 ms on the way
    assert plan_chunks(graph, 0.37 * 1000).n_samples == 16384


def test_chunk_count_10s(graph, weights):
    a = noise(10)
    s = compress(graph, weights, a, 1000)
    p = plan_chunks(graph, 1000)
    assert s.n_chunks == math.ceil((441000 + 2 * DELAY) / p.hop)
    assert s.frames == s.n_chunks * p.frames_per_chunk
    assert s.codes.max() < 1024


def test_short_input_chunk_counts(graph, weights):
    a = noise(0.2)
    padded = a.frames + 2 * DELAY
    assert compress(graph, weights, a, 20000).n_chunks == 1  # hop exceeds padded length
    assert plan_chunks(graph, 370).n_chunks(a.frames) == len(range(0, padded, 362)) == 69


def test_deterministic(graph, weights):
    a = noise(1.5, channels=2)
    assert compress(graph, weights, a, 1000) == compress(graph, weights, a, 1000)


@pytest.mark.parametrize("rate,channels", [(44100, 1), (22050, 2), (48000, 1)])
def test_round_trip_shape(graph, weights, rate, channels):
    a = noise(1.3, rate, channels)
    s = compress(graph, weights, a, 1000)
    y = decompress(graph, weights, s)
    assert (y.channels, y.frames, y.sample_rate) == (channels, a.frames, rate)
    assert np.all(np.isfinite(y.samples))


def test_each_chunk_decodes_to_hop(graph, weights):
    a = noise(0.5)
    s = compress(graph, weights, a, 370)
    from chunkcodec import model
    first = model.decode(weights, graph, model.from_codes(weights, s.codes[0, :, :17]))
    assert first.shape == (362,)


def test_loudness_restored(graph, weights):
    t = np.arange(3 * 44100) / 44100
    x = 0.05 * np.sin(2 * np.pi * 440 * t)
    a = AudioBuffer(x, 44100)
    s = compress(graph, weights, a, 1000)
    measured = dsp.integrated_loudness(a)
    assert s.input_loudness_db == pytest.approx(measured, abs=1e-5)
    y = decompress(graph, weights, s)
    assert dsp.integrated_loudness(y) == pytest.approx(measured, abs=0.5)


def test_silence_sentinel(graph, weights):
    a = AudioBuffer(np.zeros(22050), 44100)
    s = compress(graph, weights, a, 1000)
    assert s.input_loudness_db == -math.inf
    y = decompress(graph, weights, s)
    assert y.frames == a.frames


def test_short_input_loudness_measured_with_padding(graph, weights):
    a = noise(0.1)
    s = compress(graph, weights, a, 1000)
    assert math.isfinite(s.input_loudness_db)


def test_empty_input_rejected(graph, weights):
    with pytest.raises(ValueError):
        compress(graph, weights, AudioBuffer(np.zeros((1, 0)), 44100), 1000)


def test_tampered_stream(graph, weights):
    s = compress(graph, weights, noise(0.5), 1000)
    extra = np.zeros((1, 9, 1), np.uint16)
    bad = DacStream(np.concatenate([s.codes, extra], axis=2), s.frames_per_chunk,
                    s.original_length, s.original_sample_rate, s.input_loudness_db,
                    s.win_duration_ms, s.sample_rate, s.codebook_bits, s.weights_seed)
    with pytest.raises(CorruptStreamError):
        decompress(graph, weights, bad)
    short = DacStream(s.codes[:, :, :s.frames_per_chunk], s.frames_per_chunk, 10 ** 7,
                      s.original_sample_rate, s.input_loudness_db, s.win_duration_ms,
                      s.sample_rate, s.codebook_bits, s.weights_seed)
    with pytest.raises(CorruptStreamError):
        decompress(graph, weights, short)


def test_parallel_matches_sequential(graph, weights):
    a = noise(2.5, channels=2)
    s1 = compress(graph, weights, a, 1000)
    s3 = compress(graph, weights, a, 1000, jobs=3)
    assert s1 == s3
    assert decompress(graph, weights, s1) == decompress(graph, weights, s3, jobs=3)


def test_backends_agree_through_pipeline(graph, weights):
    from chunkcodec import _kernels
    if "cython" not in _kernels.available_backends():
        pytest.skip("compiled extension not built")
    a = noise(0.6)
    sc = compress(graph, weights, a, 1000, impl="cython")
    sp = compress(graph, weights, a, 1000, impl="python")
    assert sc == sp


def test_memory_constant_in_duration(graph, weights):
    peaks = []
    for seconds in (2, 6):
        probe = MemoryProbe()
        s = compress(graph, weights, noise(seconds), 1000, probe=probe)
        decompress(graph, weights, s, probe=probe)
        peaks.append(pipeline.peak_memory_samples(probe))
    assert peaks[0] == peaks[1] > 0


def test_memory_grows_with_window(graph, weights):
    peaks = []
    for ms in (370, 1000, 2000):
        probe = MemoryProbe()
        compress(graph, weights, noise(0.3), ms, probe=probe)
        peaks.append(probe.peak)
    assert peaks[0] < peaks[1] < peaks[2]


def test_empty_probe():
    assert pipeline.peak_memory_samples(MemoryProbe()) == 0
    assert pipeline.peak_memory_samples(None) == 0


def test_window_helper_pads_virtually():
    x = np.arange(1, 11, dtype=np.float32)
    np.testing.assert_array_equal(pipeline._window(x, 0, 6, 3), [0, 0, 0, 1, 2, 3])
    np.testing.assert_array_equal(pipeline._window(x, 10, 6, 3), [8, 9, 10, 0, 0, 0])
    np.testing.assert_array_equal(pipeline._window(x, 20, 4, 3), [0, 0, 0, 0])
