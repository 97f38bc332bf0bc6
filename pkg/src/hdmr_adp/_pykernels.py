"""Pure NumPy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them operation for
operation so that both backends return bitwise-identical results.
"""
import numpy as np

BACKEND = "python"


def accumulate_batch(points, values, axis_sizes, axis_offsets, first_sums,
                     first_counts, pair_axes, pair_offsets, pair_sums, pair_counts):
    """Scatter-add a batch of samples into flat first- and second-order tables.

    Each table receives the batch partial sum (accumulated from zero in sample
    order) in a single addition.
    """
    for m in range(points.shape[1]):
        size = axis_sizes[m]
        off = axis_offsets[m]
        col = points[:, m]
        first_sums[off:off + size] += np.bincount(col, weights=values, minlength=size)
        first_counts[off:off + size] += np.bincount(col, minlength=size)
    for p in range(pair_axes.shape[0]):
        m, n = pair_axes[p]
        size_n = axis_sizes[n]
        size = axis_sizes[m] * size_n
        off = pair_offsets[p]
        key = points[:, m] * size_n + points[:, n]
        pair_sums[off:off + size] += np.bincount(key, weights=values, minlength=size)
        pair_counts[off:off + size] += np.bincount(key, minlength=size)


def secular_newton(D, bsq, upper, r, rtol=1e-14, max_iter=200):
    """Solve sum_i bsq_i / (D_i - lam)^2 = r^2 for lam < upper, row-wise.

    ``bsq`` is (n, theta) with inactive components already zeroed; every row
    must have at least one positive entry and ``D_i >= upper`` wherever
    ``bsq_i > 0``.  Newton steps on ``1/r - 1/||w(lam)||`` with bisection
    fallback inside the running bracket.  Rows are iterated in lockstep.
    """
    bsq = np.atleast_2d(np.asarray(bsq, dtype=float))
    n, theta = bsq.shape
    hi = np.array(np.broadcast_to(np.asarray(upper, dtype=float), (n,)))
    r2 = r * r
    total = np.zeros(n)
    for i in range(theta):
        total = total + bsq[:, i]
    lo = hi - np.sqrt(total) / r
    lam = lo.copy()
    active = np.ones(n, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(max_iter):
            rows = np.nonzero(active)[0]
            if rows.size == 0:
                break
            x = lam[rows]
            s = np.zeros(rows.size)
            s3 = np.zeros(rows.size)
            for i in range(theta):
                w2 = bsq[rows, i]
                dl = D[i] - x
                t = w2 / (dl * dl)
                on = w2 > 0.0
                s = np.where(on, s + t, s)
                s3 = np.where(on, s3 + t / dl, s3)
            done = np.abs(s - r2) <= rtol * r2
            below = s < r2
            lo[rows] = np.where(~done & below, x, lo[rows])
            hi[rows] = np.where(~done & ~below, x, hi[rows])
            norm = np.sqrt(s)
            step = (1.0 / r - 1.0 / norm) / (s3 / (norm * norm * norm))
            xn = x - step
            l, h = lo[rows], hi[rows]
            inside = (l < xn) & (xn < h)
            xn = np.where(inside, xn, 0.5 * (l + h))
            stalled = xn == x
            lam[rows] = np.where(done | stalled, x, xn)
            active[rows] = ~(done | stalled)
    return lam


def candidate_min(sizes, offsets, weights, phi, lin, pair_flat, pair_offsets,
                  budget):
    """Minimize the decision objective over candidates with prefix product >= phi.

    The objective of an index vector ``z`` is accumulated axis by axis:
    ``acc += lin[z_m] + pair(0,m) + ... + pair(m-1,m)``.  Returns
    ``(best_value, best_z, count)``; ``count == -1`` signals that the budget
    was exceeded.  Ties keep the lexicographically smallest ``z``.
    """
    mu = len(sizes)
    best_val = np.inf
    best_z = np.zeros(mu, dtype=np.int64)
    count = 0
    for i0 in range(sizes[0]):
        q0 = weights[offsets[0] + i0]
        if q0 < phi:
            continue
        idx = np.array([[i0]], dtype=np.int64)
        q = np.array([q0])
        acc = 0.0 + np.array([lin[offsets[0] + i0]])
        for m in range(1, mu):
            size = sizes[m]
            w = weights[offsets[m]:offsets[m] + size]
            qn = q[:, None] * w[None, :]
            rows, cols = np.nonzero(qn >= phi)
            if rows.size + count > budget:
                return best_val, best_z, -1
            term = lin[offsets[m] + cols]
            for k in range(m):
                poff = pair_offsets[k * mu + m]
                term = term + pair_flat[poff + idx[rows, k] * size + cols]
            acc = acc[rows] + term
            q = qn[rows, cols]
            idx = np.column_stack([idx[rows], cols])
        count += idx.shape[0]
        if count > budget:
            return best_val, best_z, -1
        if idx.shape[0]:
            j = int(np.argmin(acc))
            if acc[j] < best_val:
                best_val = float(acc[j])
                best_z = idx[j].copy()
    return best_val, best_z, count
