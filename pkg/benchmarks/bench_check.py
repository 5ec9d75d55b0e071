"""Compare the compiled and pure-Python witness scanners.

    python3 benchmarks/bench_check.py [--repeat 3] [--max-n 12]

For each graph the full check is timed under every available backend and
the verdicts are cross-checked. Satisfying graphs are the worst case: the
scan has to exhaust every partition.
"""
from __future__ import annotations

import argparse
import time

from iabc import kernels
from iabc.generators import chord, complete, core_network
from iabc.graph import check_condition


def cases(max_n: int):
    for n in range(7, max_n + 1):
        yield f"core_network({n},2)", core_network(n, 2), 2
    for n in range(7, min(max_n, 11) + 1):
        yield f"complete({n})", complete(n), 2
    yield "chord(9,2)", chord(9, 2), 2


def bench(g, f, scan, repeat: int):
    kernels._scan = scan
    best, verdict = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        verdict = check_condition(g, f)
        best = min(best, time.perf_counter() - t0)
    return best, verdict


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--max-n", type=int, default=11)
    args = ap.parse_args()

    backends = kernels.backends()
    original = kernels._scan
    names = sorted(backends)
    print(f"{'graph':<20}{'verdict':<10}" + "".join(f"{b + ' (s)':>14}" for b in names) + (f"{'speedup':>10}" if len(names) > 1 else ""))
    try:
        for label, g, f in cases(args.max_n):
            times, verdicts = {}, set()
            for b in names:
                times[b], v = bench(g, f, backends[b], args.repeat)
                verdicts.add(v.satisfied)
            if len(verdicts) != 1:
                raise SystemExit(f"backends disagree on {label}")
            row = f"{label:<20}{'SAT' if verdicts.pop() else 'VIOL':<10}" + "".join(f"{times[b]:>14.4f}" for b in names)
            if len(names) > 1:
                row += f"{times['python'] / times['cython']:>9.1f}x"
            print(row, flush=True)
    finally:
        kernels._scan = original


if __name__ == "__main__":
    main()
