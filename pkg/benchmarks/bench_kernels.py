"""Time the compiled and NumPy kernel backends on representative inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and backend with the best time per call, and
the speedup of the compiled backend where it is available.
"""
import argparse
import timeit

import numpy as np

from qhdlab import kernels
from qhdlab.model import equilibrium


def cases(eq):
    args = (eq.mu, eq.k, eq.u_star, eq.alpha_star, eq.p_prime_star)
    xi = np.fft.rfftfreq(4096, d=400.0 / 4096) * 2 * np.pi
    rng = np.random.default_rng(0)
    rho = 1e-3 * rng.normal(size=4096)
    m = 1e-3 * rng.normal(size=4096)
    rx = 1e-3 * rng.normal(size=4096)
    data = (0.3 + 0.1j, 0.05j, 0.3 - 0.1j, -0.05j)
    return {
        "propagator (2049 modes)": lambda b: b.propagator(xi, 0.02, *args),
        "dispersion_roots (2049 modes)": lambda b: b.dispersion_roots(
            xi, eq.mu, eq.k, eq.u_star, eq.p_prime_star, eq.alpha_star),
        "remainder_n2 (4096 points)": lambda b: b.remainder_n2(rho, m, rx, eq.rho_star, eq.m_star,
                                                               eq.params.gamma, eq.params.k),
        "mode_weights (1 pair)": lambda b: b.mode_weights(0.7, 50.0, 1, *data, *args),
    }


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(sorted(backends))}; active: {kernels.BACKEND}")
    for name, call in cases(equilibrium()).items():
        times = {b: best_time(lambda: call(mod), args.repeat) for b, mod in sorted(backends.items())}
        line = "  ".join(f"{b} {t * 1e6:10.2f} us" for b, t in times.items())
        if "cython" in times:
            line += f"  speedup x{times['python'] / times['cython']:.1f}"
        print(f"{name:32s} {line}")


if __name__ == "__main__":
    main()
