"""Micro-benchmark of the two kernel backends on the hot evolution paths.

Runs the SWAP-chain and three-site collision workloads that dominate a
simulation step against both implementations and prints the speedup.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat N] [--chis 2,8,16]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from bicsim import ModelParams
from bicsim.gates import build_step_gate
from bicsim.kernels import numba_impl, numpy_impl

EPS = 1e-10


def random_site(rng, chi_l, chi_r):
    t = rng.standard_normal((chi_l, 4, chi_r)) + 1j * rng.standard_normal(
        (chi_l, 4, chi_r)
    )
    return np.ascontiguousarray(t / np.linalg.norm(t))


def swap_chain_workload(impl, sites, chi_max, repeat):
    """Sweep a pairwise SWAP across the chain, forth and back."""

    def once():
        chain = [t.copy() for t in sites]
        for _ in range(repeat):
            for i in range(len(chain) - 1):
                a, b, _ = impl.apply_swap(
                    chain[i], chain[i + 1], EPS, chi_max, True
                )
                chain[i], chain[i + 1] = a, b
            for i in range(len(chain) - 2, -1, -1):
                a, b, _ = impl.apply_swap(
                    chain[i], chain[i + 1], EPS, chi_max, False
                )
                chain[i], chain[i + 1] = a, b

    return once


def gate3_workload(impl, sites, gate, chi_max, repeat):
    """Apply the collision unitary to consecutive site triples."""

    def once():
        chain = [t.copy() for t in sites]
        for _ in range(repeat):
            for i in range(len(chain) - 2):
                a, b, c, _ = impl.apply_gate3(
                    chain[i], chain[i + 1], chain[i + 2], gate, EPS, chi_max
                )
                chain[i], chain[i + 1], chain[i + 2] = a, b, c

    return once


def best_of(fn, n_trials=3):
    fn()  # warm-up (JIT compilation for the numba path)
    best = math.inf
    for _ in range(n_trials):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20,
                        help="sweeps per timed call")
    parser.add_argument("--chis", default="2,8,16",
                        help="bond dimensions to benchmark")
    parser.add_argument("--length", type=int, default=24,
                        help="chain length per workload")
    args = parser.parse_args()

    chis = [int(c) for c in args.chis.split(",") if c.strip()]
    p = ModelParams(dt=0.04, ell=4, phi=math.pi, n_bins=40, steps=36)
    gate = build_step_gate(p, detuned=False).app_matrix
    rng = np.random.default_rng(20260822)

    print(f"{'workload':<14}{'chi':>5}{'numpy [ms]':>14}{'numba [ms]':>14}"
          f"{'speedup':>10}")
    for chi in chis:
        sites = [random_site(rng, 1, chi)]
        sites += [random_site(rng, chi, chi) for _ in range(args.length - 2)]
        sites.append(random_site(rng, chi, 1))
        for name, factory in (
            ("swap-chain", swap_chain_workload),
            ("gate3", gate3_workload),
        ):
            # cap the bond at the nominal chi so the workload stays in
            # the regime the simulator actually runs in
            if name == "gate3":
                t_np = best_of(factory(numpy_impl, sites, gate, chi, args.repeat))
                t_nb = best_of(factory(numba_impl, sites, gate, chi, args.repeat))
            else:
                t_np = best_of(factory(numpy_impl, sites, chi, args.repeat))
                t_nb = best_of(factory(numba_impl, sites, chi, args.repeat))
            print(f"{name:<14}{chi:>5}{t_np * 1e3:>14.2f}{t_nb * 1e3:>14.2f}"
                  f"{t_np / t_nb:>10.2f}x")


if __name__ == "__main__":
    main()
