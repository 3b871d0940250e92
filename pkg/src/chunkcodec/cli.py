"""Command-line entry point: encode, decode, info, plan, bench."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import bench, dacfile, pipeline
from .calculus import summarize
from .errors import ChunkCodecError, WindowTooSmallError
from .model import init_weights
from .types import load_graph_config
from .wavio import BitDepth, read_wav, write_wav

DEFAULT_WIN_DURATION_S = "1.0"
DEFAULT_SEED = 0


def _seconds_to_ms(text) -> Fraction:
    """Parse a duration in seconds into exact milliseconds."""
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a duration in seconds: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"duration must be positive, got {text}")
    return value * 1000


def _ms_list(text):
    return [_seconds_to_ms(part) for part in str(text).split(",") if part.strip()]


def _fmt_ms(ms) -> str:
    ms = Fraction(ms)
    return str(ms.numerator) if ms.denominator == 1 else f"{float(ms):g}"


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def cmd_encode(args):
    graph = load_graph_config(args.config)
    plan = pipeline.plan_chunks(graph, args.win_duration)
    audio = read_wav(args.input)
    weights = init_weights(graph, args.seed)
    stream = pipeline.compress(graph, weights, audio, args.win_duration,
                               normalize_db=args.normalize_db, jobs=args.jobs)
    data = dacfile.to_bytes(stream)
    with open(args.output, "wb") as fh:
        fh.write(data)
    print(f"window: {_fmt_ms(args.win_duration)} ms ({plan.n_samples} samples)")
    print(f"hop: {plan.hop} samples ({plan.hop_ms:.1f} ms)")
    print(f"chunks: {stream.n_chunks}")
    print(f"payload bytes: {len(data) - dacfile.HEADER_SIZE}")
    return 0


def cmd_decode(args):
    graph = load_graph_config(args.config)
    stream = dacfile.read_dac_file(args.input)
    if args.seed is not None and args.seed != stream.weights_seed:
        _warn(f"--seed {args.seed} ignored; the file was encoded with seed {stream.weights_seed}")
    weights = init_weights(graph, stream.weights_seed)
    audio = pipeline.decompress(graph, weights, stream, jobs=args.jobs)
    write_wav(args.output, audio, BitDepth(args.bit_depth))
    return 0


def cmd_info(args):
    stream = dacfile.read_dac_file(args.input)
    payload = dacfile.payload_size(stream.channels, stream.n_codebooks, stream.frames,
                                   stream.codebook_bits)
    duration = stream.original_length / stream.original_sample_rate
    print(f"sample_rate: {stream.sample_rate}")
    print(f"original_sample_rate: {stream.original_sample_rate}")
    print(f"original_length: {stream.original_length}")
    print(f"channels: {stream.channels}")
    print(f"n_codebooks: {stream.n_codebooks}")
    print(f"codebook_bits: {stream.codebook_bits}")
    print(f"frames_per_chunk: {stream.frames_per_chunk}")
    print(f"total_frames: {stream.frames}")
    print(f"chunks: {stream.n_chunks}")
    print(f"input_loudness_db: {stream.input_loudness_db:.2f}")
    print(f"win_duration_ms: {stream.win_duration_ms:g}")
    print(f"weights_seed: {stream.weights_seed}")
    print(f"payload_bytes: {payload}")
    if duration > 0:
        print(f"payload_bitrate_bps: {payload * 8 / duration / stream.channels:.1f}")
    return 0


def cmd_plan(args):
    graph = load_graph_config(args.config)
    status = 0
    for ms in args.win_duration:
        try:
            plan = pipeline.plan_chunks(graph, ms)
        except WindowTooSmallError as exc:
            print(f"{_fmt_ms(ms)}, error, window too small (minimum {exc.min_duration_ms:.1f} ms)")
            status = 1
            continue
        print(f"{_fmt_ms(ms)}, {plan.hop}, {plan.hop_ms:.1f}")
    return status


def cmd_bench(args):
    graph = load_graph_config(args.config)
    windows = args.windows or list(bench.TABLE_WINDOWS_MS)
    config = bench.BenchConfig(window_ms_list=windows, repeats=args.repeats, warmup=args.warmup,
                               seed=args.seed)
    weights = init_weights(graph, args.seed)

    def progress(row):
        print(f"{_fmt_ms(row.window_ms)} ms: compress {row.compress_mean_ms:.2f} "
              f"({row.compress_std_ms:.2f}) ms, decompress {row.decompress_mean_ms:.2f} "
              f"({row.decompress_std_ms:.2f}) ms", flush=True)

    report = bench.run_bench(graph, weights, config, progress=progress)
    bench.emit_report(report, args.csv, args.plotdata)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="chunkcodec",
                                     description="Chunked neural-codec compression at constant memory.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="codec graph JSON (default: $CHUNKCODEC_CONFIG, then the shipped 44.1 kHz graph)")

    p = sub.add_parser("encode", help="compress a WAV file to DACX")
    p.add_argument("input")
    p.add_argument("output")
    common(p)
    p.add_argument("--win-duration", type=_seconds_to_ms, default=_seconds_to_ms(DEFAULT_WIN_DURATION_S),
                   metavar="SECONDS", help=f"window duration in seconds (default {DEFAULT_WIN_DURATION_S})")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="synthetic weight seed")
    p.add_argument("--normalize-db", type=float, default=pipeline.DEFAULT_NORMALIZE_DB,
                   help="loudness target in LUFS before encoding")
    p.add_argument("--jobs", type=int, default=1, help="chunks encoded in parallel")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decompress a DACX file to WAV")
    p.add_argument("input")
    p.add_argument("output")
    common(p)
    p.add_argument("--seed", type=int, default=None,
                   help="expected weight seed; the file header takes precedence")
    p.add_argument("--bit-depth", choices=[b.value for b in BitDepth], default=BitDepth.FLOAT32.value)
    p.add_argument("--jobs", type=int, default=1, help="chunks decoded in parallel")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("info", help="print a DACX header")
    p.add_argument("input")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("plan", help="print window, hop samples and hop ms")
    common(p)
    p.add_argument("--win-duration", type=_ms_list, required=True, metavar="SECONDS[,SECONDS...]")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="time per-chunk compression and decompression")
    common(p)
    p.add_argument("--repeats", type=int, default=bench.BenchConfig.repeats)
    p.add_argument("--warmup", type=int, default=bench.BenchConfig.warmup)
    p.add_argument("--windows", type=_ms_list, default=None, metavar="SECONDS[,SECONDS...]",
                   help="window durations in seconds (default: the nine reference windows)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--csv", default="bench.csv")
    p.add_argument("--plotdata", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
    except (ChunkCodecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
