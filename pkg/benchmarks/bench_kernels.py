"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--number N]

Prints one row per kernel with the best per-call time of each backend and
the speedup. Backends that are not importable are skipped.
"""
import argparse
import timeit

import numpy as np

from gaussbath._backend import available_backends
from gaussbath.dynamics import steady_state
from gaussbath.linalg import expm_drift_closed
from gaussbath.model import PhysParams, drift_matrix, random_physical_state, thermal_diffusion


def cases():
    p = PhysParams.from_c_t(1.0, 1.0, 0.3, 1.5)
    Y = drift_matrix(p)
    D = thermal_diffusion(p, 0.0, 0.1).d
    s0 = steady_state(p, thermal_diffusion(p)).sigma
    t = np.linspace(0.0, 20.0, 201)
    M = expm_drift_closed(p, t)
    rng = np.random.default_rng(0)
    stack = np.array([random_physical_state(rng).sigma for _ in range(1000)])
    return [
        ("expm4", lambda k: k.expm4(Y, 3.7), 2000),
        ("lyap4", lambda k: k.lyap4(Y, D), 2000),
        ("det4", lambda k: k.det4(s0), 20000),
        ("rk4_grid (201 samples, dt=0.01)", lambda k: k.rk4_grid(Y, D, s0, t, 0.01), 5),
        ("sandwich (201 propagators)", lambda k: k.sandwich(M, s0 - D, D), 500),
        ("invariants (1000 states)", lambda k: k.invariants(stack), 200),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=None, help="calls per repeat (default: per kernel)")
    args = ap.parse_args(argv)

    backends = available_backends()
    names = sorted(backends)
    head = f"{'kernel':34s}" + "".join(f"{n + ' (us)':>16s}" for n in names)
    if "cython" in backends:
        head += f"{'speedup':>10s}"
    print(head)
    for label, fn, number in cases():
        n = args.number or number
        best = {}
        for name in names:
            k = backends[name]
            times = timeit.repeat(lambda: fn(k), number=n, repeat=args.repeat)
            best[name] = min(times) / n * 1e6
        row = f"{label:34s}" + "".join(f"{best[name]:16.2f}" for name in names)
        if "cython" in best:
            row += f"{best['python'] / best['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
