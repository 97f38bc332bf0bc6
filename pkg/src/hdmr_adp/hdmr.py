"""Second-order HDMR on finite product grids.

A model stores a constant, one table per axis and one table per unordered
axis pair.  Models are built by streaming ``(point, value)`` samples into a
:class:`MarginalAccumulator`; the visited multiset acts as the weight, so a
full-grid sweep yields the ANOVA projection and a partial sweep the
stage-wise weighted variant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, EmptyAccumulatorError, PreconditionError

Pair = tuple[int, int]


@dataclass(frozen=True)
class GridDomain:
    """Finite product domain given by its axis cardinalities."""

    axis_sizes: tuple[int, ...]

    def __init__(self, axis_sizes: Iterable[int]):
        sizes = tuple(int(s) for s in axis_sizes)
        if not sizes:
            raise PreconditionError("a grid domain needs at least one axis")
        if any(s < 1 for s in sizes):
            raise PreconditionError(f"axis sizes must be positive, got {sizes}")
        object.__setattr__(self, "axis_sizes", sizes)

    @property
    def ndim(self) -> int:
        return len(self.axis_sizes)

    @property
    def cardinality(self) -> int:
        """Exact number of grid points (a Python int, never overflows)."""
        return math.prod(self.axis_sizes)

    def fits_int64(self) -> bool:
        return self.cardinality <= np.iinfo(np.int64).max

    def pairs(self) -> list[Pair]:
        return list(combinations(range(self.ndim), 2))

    def check_point(self, x: Sequence[int]) -> tuple[int, ...]:
        if len(x) != self.ndim:
            raise PreconditionError(
                f"point has {len(x)} coordinates, domain has {self.ndim} axes"
            )
        out = tuple(int(v) for v in x)
        for m, (v, size) in enumerate(zip(out, self.axis_sizes)):
            if not 0 <= v < size:
                raise DomainError(m, v, size)
        return out

    def check_points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[1] != self.ndim:
            raise PreconditionError(
                f"points must have shape (n, {self.ndim}), got {pts.shape}"
            )
        if pts.shape[0]:
            sizes = np.asarray(self.axis_sizes)
            bad = (pts < 0) | (pts >= sizes)
            if bad.any():
                row, m = np.argwhere(bad)[0]
                raise DomainError(int(m), int(pts[row, m]), self.axis_sizes[m])
        return np.ascontiguousarray(pts)

    def iter_points(self):
        """All grid points in lexicographic order, as an (|X|, d) array."""
        grids = np.meshgrid(*[np.arange(s) for s in self.axis_sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HdmrModel:
    """Zero-, first- and second-order component tables over a grid.

    ``second_order`` maps each pair ``(m, n)`` with ``m < n`` to a
    ``(|X_m|, |X_n|)`` table; diagonal pairs are identically zero and never
    stored.  Pairs missing from the mapping are treated as zero tables.
    """

    domain: GridDomain
    g0: float
    first_order: tuple[np.ndarray, ...]
    second_order: dict[Pair, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        d = self.domain.ndim
        sizes = self.domain.axis_sizes
        if len(self.first_order) != d:
            raise PreconditionError(f"expected {d} first-order tables")
        first = tuple(_frozen(t) for t in self.first_order)
        for m, t in enumerate(first):
            if t.shape != (sizes[m],):
                raise PreconditionError(
                    f"first-order table {m + 1} has shape {t.shape}, expected ({sizes[m]},)"
                )
        second = {}
        for (m, n), t in self.second_order.items():
            m, n = int(m), int(n)
            t = _frozen(t)
            if m > n:
                m, n, t = n, m, _frozen(t.T)
            if m == n or not (0 <= m < d and 0 <= n < d):
                raise PreconditionError(f"invalid second-order pair ({m + 1}, {n + 1})")
            if t.shape != (sizes[m], sizes[n]):
                raise PreconditionError(
                    f"second-order table ({m + 1},{n + 1}) has shape {t.shape}, "
                    f"expected ({sizes[m]}, {sizes[n]})"
                )
            second[(m, n)] = t
        object.__setattr__(self, "g0", float(self.g0))
        object.__setattr__(self, "first_order", first)
        object.__setattr__(self, "second_order", dict(sorted(second.items())))

    @classmethod
    def zeros(cls, domain: GridDomain, g0: float = 0.0) -> "HdmrModel":
        return cls(domain, g0, tuple(np.zeros(s) for s in domain.axis_sizes), {})

    def pair_table(self, m: int, n: int) -> np.ndarray:
        """Table of the pair component oriented as ``(|X_m|, |X_n|)``."""
        if m == n:
            return np.zeros((self.domain.axis_sizes[m],) * 2)
        if m < n:
            t = self.second_order.get((m, n))
            return t if t is not None else np.zeros(
                (self.domain.axis_sizes[m], self.domain.axis_sizes[n]))
        return self.pair_table(n, m).T

    def second(self, m: int, n: int, i: int, j: int) -> float:
        """Symmetric lookup ``g_mn(i, j)``; the diagonal pair is zero."""
        if m == n:
            return 0.0
        if m > n:
            m, n, i, j = n, m, j, i
        t = self.second_order.get((m, n))
        return 0.0 if t is None else float(t[i, j])

    def evaluate(self, x: Sequence[int]) -> float:
        return evaluate(self, x)

    def evaluate_many(self, points) -> np.ndarray:
        """Vectorized :func:`evaluate` over an ``(n, d)`` index array."""
        pts = self.domain.check_points(points)
        return self.partial_evaluate(range(self.domain.ndim), pts)

    def partial_evaluate(self, axes: Iterable[int], points) -> np.ndarray:
        """Sum of the components whose axes all lie in ``axes``.

        ``points`` holds one column per entry of ``axes`` (same order); the
        constant is always included.
        """
        axes = list(axes)
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        col = {a: k for k, a in enumerate(axes)}
        out = np.full(pts.shape[0], self.g0)
        for a in sorted(axes):
            out = out + self.first_order[a][pts[:, col[a]]]
        for (m, n), t in self.second_order.items():
            if m in col and n in col:
                out = out + t[pts[:, col[m]], pts[:, col[n]]]
        return out

    def component_means(self) -> tuple[list[float], dict[Pair, float]]:
        return ([float(t.mean()) for t in self.first_order],
                {k: float(t.mean()) for k, t in self.second_order.items()})

    def is_balanced(self, rtol: float = 1e-10) -> bool:
        """Whether every table sums to zero within ``rtol * size * max|entry|``."""
        for t in (*self.first_order, *self.second_order.values()):
            if t.size == 0:
                continue
            scale = t.size * max(float(np.abs(t).max()), 1e-300)
            if abs(float(t.sum())) > rtol * scale:
                return False
        return True

    def n_parameters(self) -> int:
        return 1 + sum(t.size for t in self.first_order) + sum(
            t.size for t in self.second_order.values())

    def to_bytes(self) -> bytes:
        """Dense little-endian float64 encoding of every stored entry."""
        parts = [np.array([self.g0], dtype="<f8")]
        parts += [t.astype("<f8").ravel() for t in self.first_order]
        parts += [t.astype("<f8").ravel() for t in self.second_order.values()]
        return b"".join(p.tobytes() for p in parts)

    def equals(self, other: "HdmrModel") -> bool:
        """Field-by-field exact equality."""
        if self.domain != other.domain or self.g0 != other.g0:
            return False
        if any(not np.array_equal(a, b) for a, b in zip(self.first_order, other.first_order)):
            return False
        if self.second_order.keys() != other.second_order.keys():
            return False
        return all(np.array_equal(t, other.second_order[k])
                   for k, t in self.second_order.items())


def evaluate(model: HdmrModel, x: Sequence[int]) -> float:
    """g0 + sum_m g_m(x_m) + sum_{m<n} g_mn(x_m, x_n)."""
    x = model.domain.check_point(x)
    val = model.g0
    for m, t in enumerate(model.first_order):
        val += float(t[x[m]])
    for (m, n), t in model.second_order.items():
        val += float(t[x[m], x[n]])
    return val


class MarginalAccumulator:
    """Streaming sums and visit counts for the marginal operators.

    Every accumulated sample adds its value to the global sum, the matching
    cell of each per-axis table and the matching cell of each per-pair table,
    and increments the corresponding counts.  Repeated samples are legal and
    act as weights.  Accumulators over the same domain merge associatively.

    With ``compensated=True`` each table keeps a Neumaier compensation term
    for the additions of batch partial sums.
    """

    def __init__(self, domain: GridDomain, compensated: bool = False):
        self.domain = domain
        self.compensated = compensated
        sizes = np.asarray(domain.axis_sizes, dtype=np.int64)
        self._sizes = sizes
        self._axis_offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        self._pairs = np.array(domain.pairs(), dtype=np.int64).reshape(-1, 2)
        pair_sizes = sizes[self._pairs[:, 0]] * sizes[self._pairs[:, 1]] if len(self._pairs) else np.zeros(0, np.int64)
        self._pair_offsets = np.concatenate([[0], np.cumsum(pair_sizes)[:-1]]).astype(np.int64) if len(self._pairs) else np.zeros(0, np.int64)
        nfirst = int(sizes.sum())
        npair = int(pair_sizes.sum())
        self.sum0 = 0.0
        self.count0 = 0
        self.first_sums = np.zeros(nfirst)
        self.first_counts = np.zeros(nfirst, dtype=np.int64)
        self.pair_sums = np.zeros(npair)
        self.pair_counts = np.zeros(npair, dtype=np.int64)
        if compensated:
            self._c0 = 0.0
            self._cf = np.zeros(nfirst)
            self._cp = np.zeros(npair)

    # views ------------------------------------------------------------
    def first(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        off, size = self._axis_offsets[m], self._sizes[m]
        return self._total(self.first_sums, "_cf")[off:off + size], self.first_counts[off:off + size]

    def pair(self, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Sums and counts of pair ``(m, n)`` oriented ``(|X_m|, |X_n|)``."""
        if m > n:
            s, c = self.pair(n, m)
            return s.T, c.T
        p = self._pair_index(m, n)
        off = self._pair_offsets[p]
        shape = (int(self._sizes[m]), int(self._sizes[n]))
        size = shape[0] * shape[1]
        sums = self._total(self.pair_sums, "_cp")[off:off + size].reshape(shape)
        return sums, self.pair_counts[off:off + size].reshape(shape)

    def total(self) -> float:
        return self.sum0 + (self._c0 if self.compensated else 0.0)

    def _total(self, arr, comp):
        return arr + getattr(self, comp) if self.compensated else arr

    def _pair_index(self, m: int, n: int) -> int:
        d = self.domain.ndim
        # index of (m, n) in lexicographic pair order
        return m * d - m * (m + 1) // 2 + (n - m - 1)

    # updates ----------------------------------------------------------
    def accumulate(self, x: Sequence[int], value: float) -> "MarginalAccumulator":
        self.domain.check_point(x)
        return self.accumulate_batch(np.asarray([x], dtype=np.int64), [value], checked=True)

    def accumulate_batch(self, points, values, checked: bool = False) -> "MarginalAccumulator":
        """Add samples row by row, in the given order."""
        pts = np.ascontiguousarray(points, dtype=np.int64) if checked else self.domain.check_points(points)
        vals = np.ascontiguousarray(values, dtype=float).ravel()
        if pts.shape[0] != vals.shape[0]:
            raise PreconditionError("points and values differ in length")
        if pts.shape[0] == 0:
            return self
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("accumulated values must be finite")
        if not self.compensated:
            self.sum0 += _seqsum(vals)
            kernels.accumulate_batch(pts, vals, self._sizes, self._axis_offsets,
                                     self.first_sums, self.first_counts, self._pairs,
                                     self._pair_offsets, self.pair_sums, self.pair_counts)
            self.count0 += pts.shape[0]
            return self
        fs = np.zeros_like(self.first_sums)
        ps = np.zeros_like(self.pair_sums)
        kernels.accumulate_batch(pts, vals, self._sizes, self._axis_offsets, fs,
                                 self.first_counts, self._pairs, self._pair_offsets,
                                 ps, self.pair_counts)
        self.sum0, self._c0 = _neumaier(self.sum0, self._c0, _seqsum(vals))
        self.first_sums, self._cf = _neumaier(self.first_sums, self._cf, fs)
        self.pair_sums, self._cp = _neumaier(self.pair_sums, self._cp, ps)
        self.count0 += pts.shape[0]
        return self

    def merge(self, other: "MarginalAccumulator") -> "MarginalAccumulator":
        """Return a new accumulator holding the samples of both operands."""
        if other.domain != self.domain:
            raise PreconditionError("cannot merge accumulators over different domains")
        out = MarginalAccumulator(self.domain, compensated=self.compensated)
        out.count0 = self.count0 + other.count0
        out.first_counts = self.first_counts + other.first_counts
        out.pair_counts = self.pair_counts + other.pair_counts
        if self.compensated:
            out.sum0, out._c0 = _neumaier(self.sum0, self._c0, other.total())
            out.first_sums, out._cf = _neumaier(
                self.first_sums, self._cf, other._total(other.first_sums, "_cf"))
            out.pair_sums, out._cp = _neumaier(
                self.pair_sums, self._cp, other._total(other.pair_sums, "_cp"))
        else:
            out.sum0 = self.sum0 + other.total()
            out.first_sums = self.first_sums + other._total(other.first_sums, "_cf")
            out.pair_sums = self.pair_sums + other._total(other.pair_sums, "_cp")
        return out

    def __add__(self, other: "MarginalAccumulator") -> "MarginalAccumulator":
        return self.merge(other)


def _seqsum(vals: np.ndarray) -> float:
    # sequential left-to-right sum so the global total matches per-cell order
    return float(np.add.accumulate(vals)[-1]) if vals.size else 0.0


def _neumaier(total, comp, x):
    t = total + x
    big = np.abs(total) >= np.abs(x)
    comp = comp + np.where(big, (total - t) + x, (x - t) + total)
    if np.ndim(t) == 0:
        return float(t), float(comp)
    return t, comp


def accumulate(acc: MarginalAccumulator, x: Sequence[int], value: float) -> MarginalAccumulator:
    return acc.accumulate(x, value)


def stagewise_components(acc: MarginalAccumulator):
    """Stage-wise weighted means before rebalancing.

    Returns ``(g0, first, second)`` where cells never visited are set to 0.
    """
    if acc.count0 == 0:
        raise EmptyAccumulatorError("cannot finalize an accumulator without samples")
    d = acc.domain.ndim
    g0 = acc.total() / acc.count0
    first = []
    for m in range(d):
        s, c = acc.first(m)
        t = np.zeros(s.shape)
        seen = c > 0
        t[seen] = s[seen] / c[seen] - g0
        first.append(t)
    second = {}
    for m, n in acc.domain.pairs():
        s, c = acc.pair(m, n)
        t = np.zeros(s.shape)
        seen = c > 0
        gm = np.broadcast_to(first[m][:, None], s.shape)
        gn = np.broadcast_to(first[n][None, :], s.shape)
        t[seen] = s[seen] / c[seen] - gm[seen] - gn[seen] - g0
        second[(m, n)] = t
    return g0, first, second


def finalize(acc: MarginalAccumulator) -> HdmrModel:
    """Build the weighted HDMR from accumulated marginals and rebalance it."""
    g0, first, second = stagewise_components(acc)
    return rebalance(HdmrModel(acc.domain, g0, tuple(first), second))


def rebalance(model: HdmrModel) -> HdmrModel:
    """Shift every table to zero mean; the constant absorbs all shifts."""
    first_means, pair_means = model.component_means()
    shift = sum(first_means) + sum(pair_means.values())
    first = tuple(t - mu for t, mu in zip(model.first_order, first_means))
    second = {k: t - pair_means[k] for k, t in model.second_order.items()}
    return HdmrModel(model.domain, model.g0 + shift, first, second)


def weighted_error(model: HdmrModel, samples) -> float:
    """Sum of squared residuals over a sample multiset ``[(x, value), ...]``."""
    samples = list(samples)
    if not samples:
        return 0.0
    pts = model.domain.check_points([x for x, _ in samples])
    vals = np.asarray([v for _, v in samples], dtype=float)
    res = vals - model.partial_evaluate(range(model.domain.ndim), pts)
    return float(np.dot(res, res))


def model_from_function(domain: GridDomain, func, points=None) -> HdmrModel:
    """Convenience: sample ``func`` on ``points`` (default: the full grid)."""
    pts = domain.iter_points() if points is None else domain.check_points(points)
    vals = np.array([func(tuple(p)) for p in pts], dtype=float)
    return finalize(MarginalAccumulator(domain).accumulate_batch(pts, vals))
