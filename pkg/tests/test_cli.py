import csv

import numpy as np
import pytest

from chunkcodec import dacfile
from chunkcodec.cli import main
from chunkcodec.types import AudioBuffer
from chunkcodec.wavio import read_wav, write_wav
from conftest import toy_graph_dict

TABLE = """370, 362, 8.2
380, 874, 19.8
420, 2922, 66.3
460, 4458, 101.1
500, 6506, 147.5
1000, 28522, 646.8
5000, 204650, 4640.6
10000, 425322, 9644.5
20000, 866154, 19640.7
"""


@pytest.fixture
def wav(tmp_path):
    p = tmp_path / "in.wav"
    rng = np.random.default_rng(0)
    write_wav(p, AudioBuffer(0.1 * rng.standard_normal((2, 30000)), 48000))
    return p


def test_plan_table(capsys):
    assert main(["plan", "--win-duration", "0.37,0.38,0.42,0.46,0.5,1,5,10,20"]) == 0
    assert capsys.readouterr().out == TABLE


def test_plan_single_and_error(capsys):
    assert main(["plan", "--win-duration", "0.5"]) == 0
    assert capsys.readouterr().out == "500, 6506, 147.5\n"
    assert main(["plan", "--win-duration", "0.001,0.5"]) == 1
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("1, error")
    assert out[1] == "500, 6506, 147.5"


def test_encode_decode_info(tmp_path, wav, capsys):
    dac = tmp_path / "x.dac"
    assert main(["encode", str(wav), str(dac), "--win-duration", "0.37"]) == 0
    out = capsys.readouterr().out
    assert "hop: 362 samples (8.2 ms)" in out
    stream = dacfile.read_dac_file(dac)
    assert dacfile.from_bytes(dacfile.to_bytes(stream)) == stream
    assert main(["info", str(dac)]) == 0
    info = capsys.readouterr().out
    assert "n_codebooks: 9" in info and "codebook_bits: 10" in info
    out_wav = tmp_path / "y.wav"
    assert main(["decode", str(dac), str(out_wav)]) == 0
    y = read_wav(out_wav)
    assert (y.channels, y.frames, y.sample_rate) == (2, 30000, 48000)


def test_decode_seed_mismatch_warns(tmp_path, wav, capsys):
    dac = tmp_path / "x.dac"
    assert main(["encode", str(wav), str(dac), "--seed", "5"]) == 0
    a, b = tmp_path / "a.wav", tmp_path / "b.wav"
    assert main(["decode", str(dac), str(a), "--seed", "9"]) == 0
    assert "seed 5" in capsys.readouterr().err
    assert main(["decode", str(dac), str(b)]) == 0
    assert read_wav(a) == read_wav(b)


def test_missing_input(tmp_path, capsys):
    assert main(["encode", str(tmp_path / "nope.wav"), str(tmp_path / "o.dac")]) == 1
    assert "nope.wav" in capsys.readouterr().err


def test_bad_magic_and_truncated(tmp_path, wav, capsys):
    dac = tmp_path / "x.dac"
    main(["encode", str(wav), str(dac)])
    data = dac.read_bytes()
    bad = tmp_path / "bad.dac"
    bad.write_bytes(b"XXXX" + data[4:])
    assert main(["decode", str(bad), str(tmp_path / "o.wav")]) == 1
    bad.write_bytes(data[:-3])
    assert main(["info", str(bad)]) == 1
    assert "error" in capsys.readouterr().err


def test_config_env_fallback(tmp_path, monkeypatch, capsys):
    import json
    cfg = tmp_path / "toy.json"
    cfg.write_text(json.dumps(toy_graph_dict()))
    monkeypatch.setenv("CHUNKCODEC_CONFIG", str(cfg))
    assert main(["plan", "--win-duration", "0.01"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("10, ")
    assert main(["plan", "--win-duration", "0.01", "--config", str(cfg)]) == 0


def test_bench_single_window(tmp_path, capsys):
    out = tmp_path / "b.csv"
    plot = tmp_path / "p.csv"
    assert main(["bench", "--windows", "0.5", "--repeats", "3", "--warmup", "0",
                 "--csv", str(out), "--plotdata", str(plot)]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 1 and rows[0]["hop_samples"] == "6506"
    assert plot.exists()


def test_bad_flags(capsys):
    with pytest.raises(SystemExit):
        main(["plan", "--win-duration", "abc"])
    with pytest.raises(SystemExit):
        main([])
    assert main(["encode", "a.wav", "b.dac", "--jobs", "0"]) == 1
