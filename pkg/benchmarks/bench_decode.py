"""Benchmark the CKY chart kernels: compiled extension vs. pure numpy.

Also reports the growth factor when the sentence length doubles (the fill
is cubic, so times should grow roughly 8x).

Usage: python benchmarks/bench_decode.py [--repeats N]
"""

import argparse
import time

import numpy as np

from fsparse import decoder
from fsparse.scorer import SpanScores


def random_scores(rng, length):
    table = np.zeros((length + 1, length + 1))
    bs, es = np.triu_indices(length + 1, k=1)
    table[bs, es] = rng.normal(size=bs.size)
    return SpanScores(length, table)


def time_backend(backend, scores, repeats):
    decoder.set_backend(backend)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        decoder.fill_chart(scores)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    backends = decoder.available_backends()
    lengths = [10, 20, 40, 80, 160]
    print(f"kernels: {', '.join(backends)}  (repeats: {args.repeats}, best-of)")
    header = "length" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    times = {b: {} for b in backends}
    for length in lengths:
        scores = random_scores(rng, length)
        row = f"{length:>6}"
        for backend in backends:
            t = time_backend(backend, scores, args.repeats)
            times[backend][length] = t
            row += f"{t * 1e3:>10.3f}ms"
        if len(backends) == 2:
            row += f"{times[backends[0]][length] / times[backends[1]][length]:>9.1f}x"
        print(row)
    for backend in backends:
        t = times[backend]
        ratios = [t[b] / t[a] for a, b in zip(lengths, lengths[1:])]
        print(f"{backend}: doubling-length growth factors "
              + ", ".join(f"{r:.1f}x" for r in ratios))
    decoder.set_backend(backends[-1])


if __name__ == "__main__":
    main()
