"""Independent reference implementations used as test oracles.

Everything here is written from the defining formulas with plain loops and
dictionaries, sharing no code with the package beyond the model container.
"""
from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np


def literal_value(model, x) -> float:
    """g0 + sum_m g_m(x_m) + 1/2 sum_{m != n} g_mn(x_m, x_n), symmetric lookup."""
    d = len(x)
    sym = {}
    for (m, n), t in model.second_order.items():
        sym[(m, n)] = lambda i, j, t=t: t[i, j]
        sym[(n, m)] = lambda i, j, t=t: t[j, i]
    total = model.g0
    for m in range(d):
        total += model.first_order[m][x[m]]
    half = 0.0
    for m in range(d):
        for n in range(d):
            if m != n and (m, n) in sym:
                half += sym[(m, n)](x[m], x[n])
    return total + 0.5 * half


def stagewise_means(sizes, samples):
    """Three-stage weighted means over the sample multiset (unvisited -> 0).

    Returns raw (g0, first, second) before any rebalancing.
    """
    d = len(sizes)
    vals = [v for _, v in samples]
    g0 = sum(vals) / len(vals)
    first = []
    for m in range(d):
        s, c = defaultdict(float), defaultdict(int)
        for x, v in samples:
            s[x[m]] += v
            c[x[m]] += 1
        first.append(np.array([s[i] / c[i] - g0 if c[i] else 0.0 for i in range(sizes[m])]))
    second = {}
    for m, n in itertools.combinations(range(d), 2):
        s, c = defaultdict(float), defaultdict(int)
        for x, v in samples:
            s[(x[m], x[n])] += v
            c[(x[m], x[n])] += 1
        t = np.zeros((sizes[m], sizes[n]))
        for i in range(sizes[m]):
            for j in range(sizes[n]):
                if c[(i, j)]:
                    t[i, j] = s[(i, j)] / c[(i, j)] - first[m][i] - first[n][j] - g0
        second[(m, n)] = t
    return g0, first, second


def design_matrix(sizes, points):
    """Indicator columns for every parameter of a second-order form."""
    cols = []
    pts = [tuple(p) for p in points]
    cols.append([1.0] * len(pts))
    for m, s in enumerate(sizes):
        for i in range(s):
            cols.append([1.0 if p[m] == i else 0.0 for p in pts])
    for m, n in itertools.combinations(range(len(sizes)), 2):
        for i in range(sizes[m]):
            for j in range(sizes[n]):
                cols.append([1.0 if (p[m], p[n]) == (i, j) else 0.0 for p in pts])
    return np.array(cols).T


def least_squares_error(sizes, points, values) -> float:
    """Minimum of sum (value - form(x))^2 over all second-order forms."""
    A = design_matrix(sizes, points)
    y = np.asarray(values, dtype=float)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    return float(r @ r)


def brute_min(model, parameter_axes, decision_axes, x):
    """Scan every decision point in lexicographic order; first strict minimum wins."""
    sizes = [model.domain.axis_sizes[a] for a in decision_axes]
    best, best_z = np.inf, None
    for z in itertools.product(*[range(s) for s in sizes]):
        pt = [0] * model.domain.ndim
        for a, v in zip(parameter_axes, x):
            pt[a] = v
        for a, v in zip(decision_axes, z):
            pt[a] = v
        val = literal_value(model, pt)
        if val < best:
            best, best_z = val, z
    return best, best_z


def secular_bisection(D, b, r, tol=1e-15):
    """Root of sum_{i>=k} (b_i/(D_i - lam))^2 = r^2 below D_k by bisection."""
    D = np.asarray(D, float)
    b = np.asarray(b, float)
    k = int(np.argmax(b != 0))
    f = lambda lam: np.sum((b[k:] / (D[k:] - lam)) ** 2) - r * r  # noqa: E731
    hi = D[k]
    lo = D[k] - 1.0
    while f(lo) > 0:
        lo = D[k] - 2 * (D[k] - lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def score_filter(w, sizes, phi):
    """All z with prod_m w_m[z_m] >= phi, by exhaustive product."""
    offs = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    out = []
    for z in itertools.product(*[range(s) for s in sizes]):
        q = 1.0
        for m, i in enumerate(z):
            q = q * w[offs[m] + i]
        if q >= phi:
            out.append(z)
    return out
