"""Per-chunk timing of the compress and decompress paths across window sizes."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import model
from .pipeline import ChunkPlan, plan_chunks

TABLE_WINDOWS_MS = (370, 380, 420, 460, 500, 1000, 5000, 10000, 20000)

REPORT_COLUMNS = ("window_ms", "hop_samples", "hop_ms", "compress_mean_ms", "compress_std_ms",
                  "decompress_mean_ms", "decompress_std_ms", "rt_ratio_compress",
                  "rt_ratio_decompress")


@dataclass(frozen=True)
class BenchConfig:
    window_ms_list: tuple = TABLE_WINDOWS_MS
    repeats: int = 200
    warmup: int = 10
    seed: int = 0
    input_duration_s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "window_ms_list", tuple(self.window_ms_list))
        if not self.window_ms_list:
            raise ValueError("window list is empty")
        if self.repeats < 2:
            raise ValueError(f"repeats must be at least 2, got {self.repeats}")
        if self.warmup < 0:
            raise ValueError("warmup cannot be negative")


@dataclass(frozen=True)
class BenchRow:
    window_ms: float
    hop_samples: int
    hop_ms: float
    compress_mean_ms: float
    compress_std_ms: float
    decompress_mean_ms: float
    decompress_std_ms: float
    rt_ratio_compress: float
    rt_ratio_decompress: float

    def values(self):
        return tuple(getattr(self, c) for c in REPORT_COLUMNS)


@dataclass
class Timings:
    compress_s: list = field(default_factory=list)
    decompress_s: list = field(default_factory=list)
    checksum: float = 0.0


@dataclass
class BenchReport:
    rows: list
    samples: dict = field(default_factory=dict)  # window_ms -> Timings


def bench_input(config: BenchConfig, sample_rate: int) -> np.ndarray:
    """White noise of ``input_duration_s`` seconds from the config seed."""
    rng = np.random.default_rng(config.seed)
    n = max(1, int(round(config.input_duration_s * sample_rate)))
    return (0.1 * rng.standard_normal(n)).astype(np.float32)


def chunk_window(plan: ChunkPlan, audio) -> np.ndarray:
    """The first chunk the pipeline would feed the encoder for ``audio``."""
    buf = np.zeros(plan.n_samples, np.float32)
    take = min(audio.shape[0], plan.n_samples - plan.delay)
    if take > 0:
        buf[plan.delay:plan.delay + take] = audio[:take]
    return buf


def time_chunks(graph, weights, plan: ChunkPlan, audio, repeats, warmup, impl=None,
                clock=time.perf_counter, hooks=None) -> Timings:
    """Time ``repeats`` single-chunk encodes and decodes after ``warmup`` untimed runs.

    Buffers are prepared before the timed region; every result feeds a checksum.
    ``hooks``, if given, is called with "enter"/"exit" around each timed region.
    """
    window = chunk_window(plan, np.asarray(audio, np.float32))
    codes, _ = model.quantize(weights, model.encode(weights, graph, window, impl=impl), impl=impl)
    out = Timings()
    for run in range(warmup + repeats):
        if hooks:
            hooks("enter")
        t0 = clock()
        latents = model.encode(weights, graph, window, impl=impl)
        c, _ = model.quantize(weights, latents, impl=impl)
        t1 = clock()
        if hooks:
            hooks("exit")
        out.checksum += float(c.sum(dtype=np.int64))
        if hooks:
            hooks("enter")
        t2 = clock()
        y = model.decode(weights, graph, model.from_codes(weights, codes), impl=impl)
        t3 = clock()
        if hooks:
            hooks("exit")
        out.checksum += float(y.sum(dtype=np.float64))
        if run >= warmup:
            out.compress_s.append(t1 - t0)
            out.decompress_s.append(t3 - t2)
    return out


def summarize_runs(durations):
    """Mean and sample standard deviation (divisor n - 1)."""
    x = np.asarray(durations, dtype=np.float64)
    if x.size < 2:
        raise ValueError(f"need at least 2 samples, got {x.size}")
    return float(x.mean()), float(x.std(ddof=1))


def real_time_ratio(hop_ms, mean_ms):
    if not mean_ms > 0:
        raise ValueError(f"mean time must be positive, got {mean_ms}")
    return hop_ms / mean_ms


def run_bench(graph, weights, config: BenchConfig = BenchConfig(), jobs=1, impl=None,
              progress=None) -> BenchReport:
    if jobs != 1:
        raise ValueError("timing runs are single-threaded; chunk parallelism must be off")
    audio = bench_input(config, graph.sample_rate)
    report = BenchReport(rows=[])
    for win in config.window_ms_list:
        plan = plan_chunks(graph, win)
        t = time_chunks(graph, weights, plan, audio, config.repeats, config.warmup, impl=impl)
        c_mean, c_std = summarize_runs(t.compress_s)
        d_mean, d_std = summarize_runs(t.decompress_s)
        c_mean, c_std, d_mean, d_std = (v * 1000.0 for v in (c_mean, c_std, d_mean, d_std))
        row = BenchRow(float(win), plan.hop, plan.hop_ms, c_mean, c_std, d_mean, d_std,
                       real_time_ratio(plan.hop_ms, c_mean), real_time_ratio(plan.hop_ms, d_mean))
        report.rows.append(row)
        report.samples[float(win)] = t
        if progress:
            progress(row)
    return report


def _fmt(v):
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def emit_report(report: BenchReport, csv_path=None, plotdata_path=None, baseline=None):
    """Write the table CSV and the log-log plot series.

    ``baseline`` is an optional list of rows (same columns) produced elsewhere;
    its curves are added to the plot data.
    """
    if not report.rows:
        raise ValueError("report has no rows")
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for row in report.rows:
                w.writerow([_fmt(v) for v in row.values()])
    if plotdata_path is not None:
        series = [("chunkcodec", report.rows)]
        if baseline:
            series.append(("baseline", baseline))
        with open(plotdata_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("implementation", "path", "log10_hop_ms", "log10_mean_ms"))
            for name, rows in series:
                for path in ("compress", "decompress"):
                    for row in rows:
                        mean = getattr(row, f"{path}_mean_ms")
                        w.writerow((name, path, repr(math.log10(row.hop_ms)), repr(math.log10(mean))))
