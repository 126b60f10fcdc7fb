"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--samples 20000] [--repeat 5]

Both variants are imported under their explicit names, so one process
covers both; the env flag only changes which one the library calls.
"""
import argparse
import time

import numpy as np

from optigrover import _accel
from optigrover.circuits import build_grover_generic
from optigrover.elements import element_ops
from optigrover.oracle import IdealOracle, ElectroOpticOracle, _mc_inputs, draw_standard_deltas


def best_of(fn, repeat):
    fn()  # warm-up (jit compile on first call)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def evolve_with(pair, phase, circuit, arr):
    for e in circuit.elements:
        for op in element_ops(e, circuit.n_paths):
            if op[0] == "pair":
                pair(arr, op[1], op[2], op[3])
            else:
                phase(arr, op[2], op[1])


def bench_evolve(n, cols, repeat):
    c = build_grover_generic(n, IdealOracle("1" * n))
    rng = np.random.default_rng(0)
    base = rng.standard_normal((c.dim, cols)) + 1j * rng.standard_normal((c.dim, cols))
    res = {}
    for name in ("numba", "numpy"):
        pair = getattr(_accel, f"apply_pair_{name}")
        phase = getattr(_accel, f"apply_phase_{name}")
        res[name] = best_of(lambda: evolve_with(pair, phase, c, base.copy()), repeat)
    return res


def bench_noise(samples, repeat):
    setting = ElectroOpticOracle("0kV", "2.2V")
    psi, blocks, order, post, target = _mc_inputs(setting, 2)
    deltas = 0.1 * np.stack([draw_standard_deltas(setting, 2, s) for s in range(samples)])
    res = {}
    for name in ("numba", "numpy"):
        fn = getattr(_accel, f"oracle_errors_{name}")
        res[name] = best_of(lambda: fn(psi, blocks, order, deltas, post, target), repeat)
    a = _accel.oracle_errors_numba(psi, blocks, order, deltas, post, target)
    b = _accel.oracle_errors_numpy(psi, blocks, order, deltas, post, target)
    return res, float(np.max(np.abs(a - b)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba not importable; both columns time the numpy path")
    print(f"{'workload':<34}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for n, cols in ((2, 1), (5, 1), (8, 1), (8, 64)):
        r = bench_evolve(n, cols, args.repeat)
        label = f"evolve grover{n} x {cols} col"
        print(f"{label:<34}{1e3 * r['numba']:>12.3f}{1e3 * r['numpy']:>12.3f}{r['numpy'] / r['numba']:>10.2f}")
    r, diff = bench_noise(args.samples, args.repeat)
    label = f"noise MC {args.samples} samples"
    print(f"{label:<34}{1e3 * r['numba']:>12.3f}{1e3 * r['numpy']:>12.3f}{r['numpy'] / r['numba']:>10.2f}")
    print(f"max |numba - numpy| on noise MC: {diff:.2e}")


if __name__ == "__main__":
    main()
