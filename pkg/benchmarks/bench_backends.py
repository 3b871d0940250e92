"""Compare the compiled and numpy kernel backends on single-chunk encode/decode.

    python benchmarks/bench_backends.py [--windows 0.38,1,5] [--repeats 20]

Prints one line per (window, backend) with mean and sample standard deviation
in milliseconds, then the speedup of the compiled backend. Both backends
produce identical output, so the run fails if their checksums differ.
"""
import argparse
import sys

from chunkcodec import _kernels, bench
from chunkcodec.model import init_weights
from chunkcodec.pipeline import plan_chunks
from chunkcodec.types import load_graph_config


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--windows", default="0.38,1,5", help="window durations in seconds")
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--warmup", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--config", default=None)
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    if len(backends) < 2:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1
    graph = load_graph_config(args.config)
    weights = init_weights(graph, args.seed)
    config = bench.BenchConfig(repeats=args.repeats, warmup=args.warmup, seed=args.seed)
    audio = bench.bench_input(config, graph.sample_rate)

    for text in args.windows.split(","):
        win_ms = float(text) * 1000
        plan = plan_chunks(graph, win_ms)
        checksums, means = {}, {}
        for name in backends:
            impl = _kernels.load_backend(name)
            t = bench.time_chunks(graph, weights, plan, audio, args.repeats, args.warmup, impl=impl)
            checksums[name] = t.checksum
            c_mean, c_std = (v * 1000 for v in bench.summarize_runs(t.compress_s))
            d_mean, d_std = (v * 1000 for v in bench.summarize_runs(t.decompress_s))
            means[name] = (c_mean, d_mean)
            print(f"{win_ms:8.0f} ms  {name:7s} compress {c_mean:10.2f} ({c_std:.2f})  "
                  f"decompress {d_mean:10.2f} ({d_std:.2f})", flush=True)
        if len(set(checksums.values())) != 1:
            print(f"checksums differ between backends: {checksums}", file=sys.stderr)
            return 1
        fast, slow = means["cython"], means["python"]
        print(f"{'':8s}     speedup  compress x{slow[0] / fast[0]:.1f}  decompress x{slow[1] / fast[1]:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
