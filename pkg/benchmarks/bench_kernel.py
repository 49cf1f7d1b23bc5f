"""Compare the compiled and pure-Python rewriting kernels.

Workloads: the rc sweep (normalise every ground basic term up to a size)
and normalisation of all ground terms up to a size.

    python benchmarks/bench_kernel.py --trs queue.trs --max-size 9
"""

import argparse
import statistics
import time

from amortrs.engine import CompiledTrs, _kernel_py
from amortrs.syntax import parse_trs
from amortrs.terms import Enumerator


def load_kernels():
    kernels = {"python": _kernel_py}
    try:
        from amortrs.engine import _kernel

        kernels["cython"] = _kernel
    except ImportError:
        pass
    return kernels


def sweep(ct, encoded, fuel):
    steps = 0
    for codes in encoded:
        steps += ct.rewriter.normalize(codes, fuel, False)[1]
    return steps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trs", default="queue.trs")
    ap.add_argument("--max-size", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--fuel", type=int, default=10**6)
    args = ap.parse_args()

    trs = parse_trs(args.trs)
    en = Enumerator(trs.signature)
    workloads = {
        "rc sweep": list(en.basic_terms(args.max_size)),
        "all ground": list(en.all_ground_terms(args.max_size - 1)),
    }
    kernels = load_kernels()
    print(f"{args.trs}, max size {args.max_size}, best of {args.repeat}")
    for name, terms in workloads.items():
        results = {}
        for kname, impl in kernels.items():
            ct = CompiledTrs(trs, impl=impl)
            encoded = [ct.encode(t) for t in terms]
            times = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                steps = sweep(ct, encoded, args.fuel)
                times.append(time.perf_counter() - t0)
            results[kname] = (min(times), statistics.median(times), steps)
        line = f"  {name:<11} {len(terms):>7} terms"
        for kname, (best, med, steps) in results.items():
            line += f"  {kname}: {best * 1000:8.1f} ms ({steps} steps)"
        if len(results) == 2:
            line += f"  speed-up x{results['python'][0] / results['cython'][0]:.1f}"
            assert results["python"][2] == results["cython"][2], "kernels disagree"
        print(line)


if __name__ == "__main__":
    main()
