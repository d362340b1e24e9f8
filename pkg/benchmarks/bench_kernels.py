"""Compare the compiled kernels against the numpy fallback.

Times the four hot loops on a representative workload (the 100-player
signed complete network used by the dynamics experiments) and prints a
speedup table.

    python3 benchmarks/bench_kernels.py [--n 100] [--repeat 5]
"""

import argparse
import time

import numpy as np

from netgames import gen_random_signs, make_lq_game
from netgames._kernels import _fallback
from netgames.game import uniform_profile
from netgames.potential import alpha_lq, smoothness_L

try:
    from netgames._kernels import _core
except ImportError:
    _core = None


def best_of(repeat, fn, *args):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    net = gen_random_signs(args.n, args.n ** -3.0, args.n ** -3.0, 0)
    g = make_lq_game(net, beta=0.0, gamma=1.0, bounds=(-1.0, 1.0))
    alpha = alpha_lq(g)
    eta = np.full(g.n, 2.0 / smoothness_L(g))
    a0 = uniform_profile(g, 1)
    rand_u = np.random.default_rng(2).random(10_000)
    m = 100_000
    rng = np.random.default_rng(3)
    i_idx = rng.integers(0, g.n, size=m)
    profiles = rng.uniform(g.lo, g.hi, size=(m, g.n))
    new_actions = rng.uniform(g.lo[i_idx], g.hi[i_idx])
    hessian = -np.eye(g.n) + g.msym

    workloads = [
        ("sequential best response (10k iters cap)",
         lambda impl: impl.run_br(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0,
                                  2 * alpha, 2, rand_u, 10_000, 100, False)),
        ("gradient play (10k iters cap)",
         lambda impl: impl.run_gp(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0,
                                  alpha, eta, 0, 0.0, 10_000, 100)),
        ("deviation scan (1e5 samples)",
         lambda impl: impl.deviation_scan(g.mgrad, g.msym, g.beta, i_idx,
                                          profiles, new_actions)),
        ("Jacobi spectrum (n x n)",
         lambda impl: impl.jacobi_spectrum(hessian)),
    ]

    print(f"n = {args.n}, best of {args.repeat} runs")
    header = f"{'kernel':45s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, work in workloads:
        t_py = best_of(args.repeat, work, _fallback)
        if _core is None:
            print(f"{name:45s} {t_py * 1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        t_c = best_of(args.repeat, work, _core)
        print(f"{name:45s} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms "
              f"{t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
