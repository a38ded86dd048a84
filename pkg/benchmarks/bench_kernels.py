"""Compiled vs pure-Python kernel throughput.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Reports walk steps per second for exit walks under the simple and stable
laws and for a full IDLA run, and checks that both backends produce the
same result from the same seed.
"""

import argparse
import time

import numpy as np

from idla1d import _backend, cluster, increments, rng, walker


def _exit_walks(backend, law, n_walks, half_width, seed):
    steps = 0
    outcomes = []
    for i in range(n_walks):
        o = walker.run_until_exit(law, 0, (-half_width, half_width),
                                  rng.replica_stream(seed, i), backend=backend)
        steps += o.steps
        outcomes.append((o.terminal_site, o.steps))
    return steps, outcomes


def _idla(backend, law, m, seed):
    c = cluster.new_cluster(backend=backend)
    res = cluster.run(c, law, m, rng.replica_stream(seed, 0))
    return res.total_steps, (res.total_steps, sorted(c.occupied))


CASES = [
    ("exit walks, simple, |x| < 200", lambda b: _exit_walks(b, increments.preset("simple"),
                                                            40, 200, 1)),
    ("exit walks, stable 1.5, |x| < 2000",
     lambda b: _exit_walks(b, increments.preset("stable", 1.5), 40, 2000, 2)),
    ("IDLA, simple, m = 1000", lambda b: _idla(b, increments.preset("simple"), 1000, 3)),
    ("IDLA, stable 1.5, m = 2000", lambda b: _idla(b, increments.preset("stable", 1.5), 2000, 4)),
]


def bench(fn, backend, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        steps, result = fn(backend)
        best = min(best, time.perf_counter() - t0)
    return steps / best, result


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = _backend.available()
    print("backends: %s" % ", ".join(backends))
    print("%-38s %14s %14s %8s  same" % ("case", "compiled st/s", "python st/s", "speedup"))
    for name, fn in CASES:
        rates = {}
        results = {}
        for b in backends:
            rates[b], results[b] = bench(fn, b, args.repeat)
        comp = rates.get("compiled", np.nan)
        same = len(set(map(repr, results.values()))) == 1
        print("%-38s %14.3g %14.3g %7.1fx  %s" % (name, comp, rates["python"],
                                                  comp / rates["python"], same))


if __name__ == "__main__":
    main()
