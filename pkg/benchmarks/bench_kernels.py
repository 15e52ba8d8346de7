"""Compiled vs numpy coupling sweep on the reference configuration.

Usage: python benchmarks/bench_kernels.py [--steps 3000] [--repeat 3]

Times ``couple_steps`` for each available backend on the grid, coupling
table and step plan of a sigma_et = T21 passage, checks that the backends
agree, and reports the speed-up.
"""

import argparse
import time

import numpy as np

from feberi.coupling import KernelContext
from feberi.physical import derive_kinematics, table1_beam, table1_tls
from feberi.quantum import _backend
from feberi.quantum.grid import build_grid, plan_steps
from feberi.quantum.solver import CouplingTable
from feberi.wavepacket import QewSpec


def setup(n_comp):
    kin = derive_kinematics(table1_beam())
    tls = table1_tls()
    ctx = KernelContext.build(kin, tls)
    qew = QewSpec(sigma_et=tls.period)
    grid = build_grid(qew, kin, ctx.geom)
    plan = plan_steps(grid, kin, tls.omega21, qew.sigma_et)
    table = CouplingTable.build(ctx, grid, plan)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=(n_comp, 2, grid.n)) + 1j * rng.normal(size=(n_comp, 2, grid.n))
    return grid, plan, table, psi, tls.omega21 * plan.dt


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=3000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--components", type=int, default=1)
    args = ap.parse_args()
    grid, plan, table, psi0, wdt = setup(args.components)
    base = table.base(grid, plan)
    # a stretch of steps centred on the packet, where the kernel window is full
    n0 = plan.n_steps // 2 - args.steps // 2
    results = {}
    for name in _backend.available():
        fn = _backend.couple_steps_for(name)
        best = np.inf
        for _ in range(args.repeat):
            psi = psi0.copy()
            t = time.perf_counter()
            fn(psi, table.cos_t, table.sin_t, base, plan.r, n0, n0 + args.steps, 0.0, wdt)
            best = min(best, time.perf_counter() - t)
        results[name] = (best, psi)
        window = table.cos_t.size // plan.r
        per = best / (args.steps * window * args.components) * 1e9
        print(f"{name:7s} {best:8.3f} s for {args.steps} steps  ({per:6.2f} ns per point update)")
    if len(results) == 2:
        diff = np.max(np.abs(results["cython"][1] - results["python"][1]))
        print(f"max |cython - python| = {diff:.3g}")
        print(f"speed-up               {results['python'][0] / results['cython'][0]:.1f}x")
    print(f"selected backend: {_backend.BACKEND}")


if __name__ == "__main__":
    main()
