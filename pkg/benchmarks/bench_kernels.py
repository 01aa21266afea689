"""Times the jitted kernels against the pure-numpy fallbacks.

Every hot kernel runs the same workload on both backends; outputs are
cross-checked before timing so a speedup never hides a wrong answer.
Run directly:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeats 9 --scale 2
"""

import argparse
import sys
import time

import numpy as np

from mtverify.backend import active_backend, get_backend
from mtverify.errors import ConfigError


def best_of(fn, repeats):
    """Minimum wall time over several calls; least-noisy point estimate."""
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def workloads(scale, seed=7):
    """(name, kernel attr, args builder) triples at roughly suite-like sizes."""
    rng = np.random.Generator(np.random.PCG64(seed))
    m = 500 * scale
    a = rng.normal(size=(m, 64))
    b = rng.normal(size=(m // 2, 64))

    # non-separable labels keep the solver busy without hitting the cap
    xs = rng.normal(size=(120 * scale, 8))
    ys = np.where(rng.random(xs.shape[0]) < 0.5, -1.0, 1.0)
    K = np.exp(-0.1 * ((xs[:, None, :] - xs[None, :, :]) ** 2).sum(axis=2))
    K = np.ascontiguousarray(K)

    xp = np.ascontiguousarray(rng.normal(size=(16 * scale, 16, 34, 34)))
    w = np.ascontiguousarray(rng.normal(size=(32, 16, 3, 3)))
    dy = np.ascontiguousarray(rng.normal(size=(16 * scale, 32, 32, 32)))

    return [
        (f"linear_gram {m}x64", "linear_gram", (a, b)),
        (f"rbf_gram {m}x64", "rbf_gram", (a, b, 0.02)),
        (f"smo_solve m={xs.shape[0]}", "smo_solve", (K, ys, 1.0, 1e-8, 2_000_000)),
        (f"conv2d_valid {xp.shape[0]}x16x34x34", "conv2d_valid", (xp, w, 1)),
        ("conv2d_valid_grad_w", "conv2d_valid_grad_w", (xp, dy, 3, 3, 1)),
        ("conv2d_valid_grad_x", "conv2d_valid_grad_x", (dy, w, 34, 34, 1)),
    ]


def check_agreement(name, got, want):
    got = np.asarray(got[0] if isinstance(got, tuple) else got, dtype=np.float64)
    want = np.asarray(want[0] if isinstance(want, tuple) else want, dtype=np.float64)
    scale = max(float(np.max(np.abs(want))), 1e-12)
    worst = float(np.max(np.abs(got - want))) / scale
    if worst > 1e-10:
        raise SystemExit(f"backend disagreement on {name}: rel {worst:.3e}")


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed calls per kernel; the minimum is reported")
    parser.add_argument("--scale", type=int, default=1,
                        help="multiplier on the workload sizes")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    numpy_impl = get_backend("numpy")
    try:
        numba_impl = get_backend("numba")
    except (ConfigError, ImportError) as exc:
        print(f"jitted backend unavailable ({exc}); nothing to compare")
        return 1

    rows = []
    for name, attr, call_args in workloads(args.scale):
        slow = getattr(numpy_impl, attr)
        fast = getattr(numba_impl, attr)
        fast(*call_args)  # compile outside the timed region
        check_agreement(name, fast(*call_args), slow(*call_args))
        t_numpy = best_of(lambda: slow(*call_args), args.repeats)
        t_numba = best_of(lambda: fast(*call_args), args.repeats)
        rows.append((name, t_numpy, t_numba))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, t_numpy, t_numba in rows:
        print(f"{name:<{width}}  {t_numpy * 1e3:>8.2f}ms  {t_numba * 1e3:>8.2f}ms"
              f"  {t_numpy / t_numba:>7.1f}x")
    print(f"\nactive backend for library calls: {active_backend()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
