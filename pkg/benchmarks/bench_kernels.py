"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run: python benchmarks/bench_kernels.py
The jitted path is compiled (and warmed) before timing.
"""

import time

import numpy as np

from adlab import _kernels as K


def time_ms(fn, repeats=7):
    fn()  # warm up / trigger compilation
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return 1000.0 * best


def bench_hash():
    rng = np.random.default_rng(0)
    ids = rng.integers(0, 2**64, size=2_000_000, dtype=np.uint64)
    rows = [("hash_mix64 numpy", time_ms(lambda: K.hash_mix64_np(ids, 12345)))]
    if K.HAS_NUMBA:
        rows.append(("hash_mix64 numba", time_ms(lambda: K.hash_mix64_nb(ids, 12345))))
    return "2M user ids", rows


def bench_resolve():
    rng = np.random.default_rng(1)
    n, k = 200_000, 4
    values = rng.random((n, k)) * 0.1
    eligible = rng.random((n, k)) < 0.7
    displayable = eligible & (rng.random((n, k)) < 0.7)
    bg = rng.lognormal(np.log(0.02), 0.7, size=(n, 20)).max(axis=1)
    spend = np.zeros(k)
    budget = np.full(k, 1500.0)
    price = np.full(k, 0.9)
    args = (values, eligible, displayable, bg, spend, budget, price)
    rows = [("resolve_slot numpy", time_ms(lambda: K.resolve_slot_np(*args)))]
    if K.HAS_NUMBA:
        rows.append(("resolve_slot numba", time_ms(lambda: K.resolve_slot_nb(*args))))
        ref, alt = K.resolve_slot_np(*args), K.resolve_slot_nb(*args)
        assert all(np.array_equal(a, b) for a, b in zip(ref, alt))
    return f"{n:,} opportunities x {k} campaigns", rows


def main():
    print(f"numba available: {K.HAS_NUMBA} (active path: "
          f"{'numba' if K.USING_NUMBA else 'numpy'}; ADLAB_NUMBA toggles)")
    for label, rows in (bench_hash(), bench_resolve()):
        print(f"\n{label}")
        base = rows[0][1]
        for name, ms in rows:
            speedup = f"  ({base / ms:.1f}x vs numpy)" if "numba" in name else ""
            print(f"  {name:<22} {ms:9.2f} ms{speedup}")


if __name__ == "__main__":
    main()
