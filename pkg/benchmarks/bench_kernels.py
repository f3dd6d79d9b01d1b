"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs on identical inputs under both backends; the table reports
the best wall time of ``--repeat`` runs and the speed-up.
"""

import argparse
import time

import numpy as np

from bdml import _pykernels

try:
    from bdml import _kernels
except ImportError:
    _kernels = None


def _cases(rng):
    n = 200
    a = rng.normal(size=n) + 0.5
    b = rng.uniform(0.5, 1.5, size=n)
    psi = a - 0.5 * b
    m = 5000
    normals = rng.standard_normal(m + 1000)
    log_u = np.log(rng.random(m + 1000))
    x = rng.normal(size=(200, 50))
    xs = np.asfortranarray((x - x.mean(0)) / x.std(0))
    y = x[:, 0] - 0.5 * x[:, 3] + rng.normal(size=200)
    w = np.full(200, 1.0)
    rows = rng.integers(0, 200, size=200)

    def lasso(k):
        beta = np.zeros(50)
        resid = y - y.mean()
        return k.lasso_cd(xs, y, w, beta, y.mean(), resid, 0.05, 1e-7, 10_000, True)

    return {
        "gel_solve (n=200, EL) x100": lambda k: [k.gel_solve(psi, 0.0, 0.0, 200) for _ in range(100)],
        "gel_solve (n=200, ETEL) x100": lambda k: [k.gel_solve(psi, -1.0, 0.0, 200) for _ in range(100)],
        "log profile path (401 betas)": lambda k: k.gel_log_profile_path(
            a, b, np.linspace(0.0, 1.5, 401), 0.0, 200),
        "rw_chain (6000 steps, HD)": lambda k: k.rw_chain(
            a, b, -0.5, 0.0, 1e4, 0.5, 0.1, normals, log_u, 1000, True, 0.44, 200),
        "lasso_cd (200x50)": lasso,
        "grow_tree (200x50) x20": lambda k: [k.grow_tree(x, y, rows, 17, 5, s) for s in range(20)],
    }


def best_time(fn, kernel, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(kernel)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    cases = _cases(np.random.default_rng(args.seed))
    print(f"{'kernel':<32}{'python s':>12}{'compiled s':>12}{'speed-up':>10}")
    for name, fn in cases.items():
        t_py = best_time(fn, _pykernels, args.repeat)
        if _kernels is None:
            print(f"{name:<32}{t_py:>12.4f}{'n/a':>12}{'':>10}")
            continue
        t_c = best_time(fn, _kernels, args.repeat)
        print(f"{name:<32}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
