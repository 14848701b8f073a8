"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--sizes 40 80]

Reports the best wall time of each kernel per backend and the speed-up of
the compiled one. Results are also checked for agreement.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from cocoonnet import _backend
from cocoonnet.cocoonsim import Network, SimParams
from cocoonnet.synth import cocoon_network


def best_time(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_jacobi(kernels, n, repeat):
    x = np.random.default_rng(n).normal(size=(n, n))
    a = (x + x.T) / 2
    return best_time(lambda: kernels.jacobi_eigh(a, 1e-12, 100), repeat)


def bench_sim(kernels, n_nodes, steps, repeat):
    net = Network.from_graph(cocoon_network(n_nodes=n_nodes, seed=0).graph)
    rng = np.random.default_rng(0)
    att = rng.integers(0, 3, n_nodes).astype(np.int8)
    sus = rng.integers(0, 2, n_nodes).astype(np.int8)
    frozen = np.zeros(n_nodes, dtype=np.uint8)
    u = np.random.default_rng(1).random((steps, 3, n_nodes))
    rates = SimParams().rates()

    def go():
        a, s = att, sus
        for t in range(steps):
            a, s = kernels.sim_step(net.indptr1, net.indices1, net.indptr2, net.indices2,
                                    a, s, frozen, u[t, 0], u[t, 1], u[t, 2], **rates)
        return np.asarray(a), np.asarray(s)

    return best_time(go, repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[40, 80])
    ap.add_argument("--nodes", type=int, nargs="+", default=[775, 3000])
    ap.add_argument("--steps", type=int, default=50)
    args = ap.parse_args(argv)

    names = _backend.available()
    if "cython" not in names:
        print("compiled backend not built; only the numpy kernels are timed")
    print(f"{'kernel':<28}" + "".join(f"{n:>12}" for n in names) + f"{'speed-up':>10}")
    cases = [(f"jacobi_eigh n={n}", lambda k, n=n: bench_jacobi(k, n, args.repeat))
             for n in args.sizes]
    cases += [(f"sim_step x{args.steps} N={n}",
               lambda k, n=n: bench_sim(k, n, args.steps, args.repeat)) for n in args.nodes]
    for label, fn in cases:
        results = {name: fn(_backend.get(name)) for name in names}
        line = f"{label:<28}" + "".join(f"{results[n][0] * 1e3:>10.2f}ms" for n in names)
        if len(names) > 1:
            line += f"{results['python'][0] / results['cython'][0]:>9.1f}x"
            ref, got = results["python"][1], results["cython"][1]
            same = all(np.allclose(np.sort(np.ravel(r)), np.sort(np.ravel(g)))
                       for r, g in zip(ref[:1], got[:1]))
            if not same:
                line += "  MISMATCH"
        print(line)


if __name__ == "__main__":
    main()
