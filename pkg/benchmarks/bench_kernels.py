"""Throughput of the compiled walker kernel against the numpy fallback.

Runs one block of ``propagate`` per model with each backend, checks that the
two produce identical states, log-weights and jump counts, and prints jumps
per second and the speed-up.

    python benchmarks/bench_kernels.py [--walkers 4096] [--dt 4] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from condqpt.basis import split_space
from condqpt.models import ModelSpec
from condqpt.qmc.backend import available_backends, load_backend
from condqpt.qmc.engine import default_reference_energy, initial_states, kernel_params

CASES = [
    ("grover N=12", ModelSpec("grover", 12, g=1.0), "full"),
    ("ising N=16", ModelSpec("ising-transverse", 16, g=0.5), "full"),
    ("impurity N=16 norm", ModelSpec("fermion-impurity", 16, 8, 4, "obc", g=2.0), "norm"),
    ("attractive N=32", ModelSpec("fermion-attractive", 32, 16, boundary="obc", g=2.0), "full"),
    ("bosons N=16 pbc", ModelSpec("hardcore-boson-attractive", 16, 8, boundary="pbc", g=1.0), "full"),
]


def time_backend(module, states0, params, seed, repeat):
    best = float("inf")
    for _ in range(repeat):
        states = states0.copy()
        logw = np.zeros(len(states))
        jumps = np.zeros(len(states), dtype=np.int64)
        t = time.perf_counter()
        module.propagate(states, logw, jumps, 0, len(states), params, seed, 0)
        best = min(best, time.perf_counter() - t)
    return best, (states, logw, jumps)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--walkers", type=int, default=4096)
    ap.add_argument("--dt", type=float, default=4.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; only the fallback is timed")
    print(f"{'case':22s} {'backend':8s} {'seconds':>9s} {'Mjump/s':>9s} {'speed-up':>9s}")
    for label, model, restriction in CASES:
        split = None if restriction == "full" else split_space(model)
        params = kernel_params(model, split, restriction, default_reference_energy(model), args.dt)
        states0 = initial_states(model, split, restriction, args.walkers, args.seed)
        results = {}
        for name in backends:
            _, module = load_backend(name)
            results[name] = time_backend(module, states0, params, args.seed, args.repeat)
        ref_t, ref_out = results["python"]
        for name, (t, out) in results.items():
            njumps = int(out[2].sum())
            speed = ref_t / t
            print(f"{label:22s} {name:8s} {t:9.4f} {njumps / t / 1e6:9.2f} {speed:9.1f}")
            if name != "python":
                same = all(np.array_equal(a, b) for a, b in zip(out, ref_out))
                if not same:
                    raise SystemExit(f"{label}: backends disagree")


if __name__ == "__main__":
    main()
