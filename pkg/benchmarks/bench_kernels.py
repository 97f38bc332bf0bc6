"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeats 5]

Both backends receive identical inputs; their outputs are also compared so a
speedup never hides a divergence.
"""
import argparse
import statistics
import time

import numpy as np

from hdmr_adp import kernels


def _time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def accumulate_case(rng):
    sizes = np.array([9] * 12, np.int64)
    n = 200_000
    pts = np.ascontiguousarray(rng.integers(0, 9, size=(n, sizes.size)).astype(np.int64))
    vals = rng.standard_normal(n)
    offs = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    pairs = np.array([(m, k) for m in range(sizes.size) for k in range(m + 1, sizes.size)], np.int64)
    psz = sizes[pairs[:, 0]] * sizes[pairs[:, 1]]
    poffs = np.concatenate([[0], np.cumsum(psz)[:-1]]).astype(np.int64)

    def run(mod):
        fs, fc = np.zeros(sizes.sum()), np.zeros(sizes.sum(), np.int64)
        ps, pc = np.zeros(psz.sum()), np.zeros(psz.sum(), np.int64)
        mod.accumulate_batch(pts, vals, sizes, offs, fs, fc, pairs, poffs, ps, pc)
        return fs, ps

    return f"accumulate_batch ({n} points, 12 axes)", run


def secular_case(rng):
    th = 60
    D = np.sort(rng.standard_normal(th))
    B = rng.standard_normal((20_000, th)) ** 2
    up = np.full(B.shape[0], D[0])
    return f"secular_newton ({B.shape[0]} rows, theta={th})", lambda mod: mod.secular_newton(D, B, up, 1.3)


def candidate_case(rng):
    sizes = np.array([30, 30, 30], np.int64)
    offs = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    w = np.ones(sizes.sum())
    lin = rng.standard_normal(sizes.sum())
    mu = sizes.size
    po = np.zeros(mu * mu, np.int64)
    chunks, pos = [], 0
    for m in range(mu):
        for k in range(m + 1, mu):
            po[m * mu + k] = pos
            chunks.append(rng.random(sizes[m] * sizes[k]))
            pos += chunks[-1].size
    pf = np.concatenate(chunks)
    return ("candidate_min (30^3 full scan)",
            lambda mod: mod.candidate_min(sizes, offs, w, 0.0, lin, pf, po, 10**8))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the NumPy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':44s} " + " ".join(f"{name:>10s}" for name in backends) + "   speedup  identical")
    for make in (accumulate_case, secular_case, candidate_case):
        label, run = make(rng)
        outs, times = {}, {}
        for name, mod in backends.items():
            outs[name], times[name] = _time(lambda: run(mod), args.repeats)
        cols = " ".join(f"{times[n] * 1e3:8.1f}ms" for n in backends)
        if len(backends) > 1:
            a, b = outs["python"], outs["cython"]
            same = all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(
                a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
            print(f"{label:44s} {cols} {times['python'] / times['cython']:8.1f}x  {same}")
        else:
            print(f"{label:44s} {cols}")


if __name__ == "__main__":
    main()
