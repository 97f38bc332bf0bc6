# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``.

Every loop performs the same floating-point operations in the same order as
the NumPy reference, so results are bitwise identical across backends.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

BACKEND = "cython"


def accumulate_batch(const cnp.int64_t[:, ::1] points, const double[::1] values,
                     const cnp.int64_t[::1] axis_sizes, const cnp.int64_t[::1] axis_offsets,
                     double[::1] first_sums, cnp.int64_t[::1] first_counts,
                     const cnp.int64_t[:, ::1] pair_axes, const cnp.int64_t[::1] pair_offsets,
                     double[::1] pair_sums, cnp.int64_t[::1] pair_counts):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t npairs = pair_axes.shape[0]
    cdef Py_ssize_t s, m, p, a, b, cell
    cdef double v
    cdef double[::1] fs = np.zeros(first_sums.shape[0])
    cdef cnp.int64_t[::1] fc = np.zeros(first_counts.shape[0], dtype=np.int64)
    cdef double[::1] ps = np.zeros(pair_sums.shape[0])
    cdef cnp.int64_t[::1] pc = np.zeros(pair_counts.shape[0], dtype=np.int64)
    with nogil:
        for s in range(n):
            v = values[s]
            for m in range(d):
                cell = axis_offsets[m] + points[s, m]
                fs[cell] += v
                fc[cell] += 1
            for p in range(npairs):
                a = pair_axes[p, 0]
                b = pair_axes[p, 1]
                cell = pair_offsets[p] + points[s, a] * axis_sizes[b] + points[s, b]
                ps[cell] += v
                pc[cell] += 1
        for cell in range(fs.shape[0]):
            first_sums[cell] += fs[cell]
            first_counts[cell] += fc[cell]
        for cell in range(ps.shape[0]):
            pair_sums[cell] += ps[cell]
            pair_counts[cell] += pc[cell]


def secular_newton(D, bsq, upper, double r, double rtol=1e-14, int max_iter=200):
    cdef const double[::1] Dv = np.ascontiguousarray(D, dtype=float)
    cdef const double[:, ::1] B = np.ascontiguousarray(np.atleast_2d(bsq), dtype=float)
    cdef Py_ssize_t n = B.shape[0]
    cdef Py_ssize_t theta = B.shape[1]
    cdef const double[::1] up = np.array(
        np.broadcast_to(np.asarray(upper, dtype=float), (n,)))
    out = np.empty(n)
    cdef double[::1] lam = out
    cdef double r2 = r * r
    cdef double lo, hi, x, xn, s, s3, t, dl, total, norm, step
    cdef Py_ssize_t row, i
    cdef int it
    with nogil:
        for row in range(n):
            hi = up[row]
            total = 0.0
            for i in range(theta):
                total = total + B[row, i]
            lo = hi - sqrt(total) / r
            x = lo
            for it in range(max_iter):
                s = 0.0
                s3 = 0.0
                for i in range(theta):
                    if B[row, i] > 0.0:
                        dl = Dv[i] - x
                        t = B[row, i] / (dl * dl)
                        s = s + t
                        s3 = s3 + t / dl
                if fabs(s - r2) <= rtol * r2:
                    break
                if s < r2:
                    lo = x
                else:
                    hi = x
                norm = sqrt(s)
                step = (1.0 / r - 1.0 / norm) / (s3 / (norm * norm * norm))
                xn = x - step
                if not (lo < xn and xn < hi):
                    xn = 0.5 * (lo + hi)
                if xn == x:
                    break
                x = xn
            lam[row] = x
    return out


def candidate_min(sizes, offsets, weights, double phi, lin, pair_flat, pair_offsets,
                  long long budget):
    cdef const cnp.int64_t[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef const cnp.int64_t[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=float)
    cdef const double[::1] ln = np.ascontiguousarray(lin, dtype=float)
    cdef const double[::1] pf = np.ascontiguousarray(pair_flat, dtype=float)
    cdef const cnp.int64_t[::1] po = np.ascontiguousarray(pair_offsets, dtype=np.int64)
    cdef Py_ssize_t mu = sz.shape[0]
    cdef cnp.int64_t[::1] idx = np.zeros(mu, dtype=np.int64)
    cdef double[::1] q = np.zeros(mu)
    cdef double[::1] acc = np.zeros(mu)
    best = np.zeros(mu, dtype=np.int64)
    cdef cnp.int64_t[::1] best_z = best
    cdef double best_val = INFINITY
    cdef long long count = 0
    cdef Py_ssize_t depth, k, i
    cdef double qp, ap, term, qq
    cdef bint over = False
    with nogil:
        depth = 0
        idx[0] = -1
        while depth >= 0:
            idx[depth] += 1
            if idx[depth] >= sz[depth]:
                depth -= 1
                continue
            i = idx[depth]
            if depth == 0:
                qp = 1.0
                ap = 0.0
            else:
                qp = q[depth - 1]
                ap = acc[depth - 1]
            qq = qp * w[off[depth] + i] if depth > 0 else w[off[0] + i]
            if qq < phi:
                continue
            term = ln[off[depth] + i]
            for k in range(depth):
                term = term + pf[po[k * mu + depth] + idx[k] * sz[depth] + i]
            q[depth] = qq
            acc[depth] = ap + term
            if depth == mu - 1:
                count += 1
                if count > budget:
                    over = True
                    break
                if acc[depth] < best_val:
                    best_val = acc[depth]
                    for k in range(mu):
                        best_z[k] = idx[k]
            else:
                depth += 1
                idx[depth] = -1
    if over:
        return best_val, best, -1
    return best_val, best, count
