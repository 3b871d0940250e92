import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from chunkcodec.model import init_weights  # noqa: E402
from chunkcodec.types import LayerGeom, default_graph, graph_from_dict  # noqa: E402


@pytest.fixture(scope="session")
def graph():
    return default_graph()


@pytest.fixture(scope="session")
def weights(graph):
    return init_weights(graph, 0)


def toy_graph_dict(rates=(2, 2), n_codebooks=1, bits=8, sample_rate=16000, latent_dim=4,
                   codebook_dim=2):
    enc = [{"kind": "conv", "kernel": 3}]
    for r in rates:
        enc += [{"kind": "conv", "kernel": 3, "dilation": 1},
                {"kind": "conv", "kernel": 2 * r, "stride": r}]
    dec = []
    for r in reversed(rates):
        dec += [{"kind": "conv_transpose", "kernel": 2 * r, "stride": r},
                {"kind": "conv", "kernel": 3}]
    dec.append({"kind": "conv", "kernel": 3})
    return {
        "sample_rate": sample_rate, "encoder_rates": list(rates),
        "decoder_rates": list(reversed(rates)), "latent_dim": latent_dim,
        "n_codebooks": n_codebooks, "codebook_bits": bits, "codebook_dim": codebook_dim,
        "encoder_layers": enc, "decoder_layers": dec,
    }


@pytest.fixture
def toy_graph():
    return graph_from_dict(toy_graph_dict(), name="toy")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


__all__ = ["LayerGeom", "toy_graph_dict"]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
