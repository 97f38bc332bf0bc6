"""Approximate parametrized minimization of HDMR-form functions.

For ``p(x) = min_z g(x, z)`` the decision-dependent components are written as
a quadratic form over one-hot encodings of ``z``.  Relaxing the encodings to
a sphere gives a trust-region problem whose matrix does not depend on ``x``,
so one eigendecomposition serves every query.  The relaxed minimizer yields
a lower bound and, after normalization, a score ``q(z)`` used to restrict the
search to the candidates ``Z^phi = {z : q(z) >= phi}``; the best candidate is
an upper bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceededError, HdmrAdpError, NumericError, PreconditionError
from .hdmr import HdmrModel

DEFAULT_BUDGET = 10**7
DENSE_LIMIT = 4096

MODE_EASY = 0
MODE_HARD = 1
MODE_ZERO_B = 2
MODE_ZERO_F = 3
MODE_DEGENERATE = 4


class HardCase(HdmrAdpError):
    """The secular equation has no root because ``b`` vanishes."""


@dataclass(frozen=True)
class AxisSplit:
    """Partition of the model axes into parameter axes and decision axes."""

    parameter_axes: tuple[int, ...]
    decision_axes: tuple[int, ...]

    def __init__(self, parameter_axes: Sequence[int], decision_axes: Sequence[int]):
        object.__setattr__(self, "parameter_axes", tuple(int(a) for a in parameter_axes))
        object.__setattr__(self, "decision_axes", tuple(int(a) for a in decision_axes))

    def validate(self, ndim: int) -> None:
        both = self.parameter_axes + self.decision_axes
        if not self.decision_axes:
            raise PreconditionError("at least one decision axis is required")
        if len(set(both)) != len(both):
            raise PreconditionError("parameter and decision axes overlap or repeat")
        if sorted(both) != list(range(ndim)):
            raise PreconditionError(f"axes {both} do not cover 0..{ndim - 1}")


def _queries(X, kappa: int, single: bool = False) -> np.ndarray:
    """Coerce parameter points to an ``(n, kappa)`` int64 array."""
    X = np.asarray(X, dtype=np.int64)
    if single or X.ndim <= 1:
        X = X.reshape(1, kappa)
    if X.ndim != 2 or X.shape[1] != kappa:
        raise PreconditionError(f"parameter points must have {kappa} coordinates")
    return X


def _offsets(sizes) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64) if len(sizes) else np.zeros(0, np.int64)


class SplitObjective:
    """The model viewed as a function of ``(x, z)``, using the raw tables.

    This is the single evaluation path behind :func:`exact_min` and
    :func:`approx_min`, so both see bitwise-identical objective values.
    The decision part of ``z`` is accumulated axis by axis: for each decision
    axis ``m`` the term ``lin_m(z_m) + sum_{k<m} pair_km(z_k, z_m)`` is added.
    """

    def __init__(self, model: HdmrModel, split: AxisSplit):
        split.validate(model.domain.ndim)
        self.model = model
        self.split = split
        dec, par = split.decision_axes, split.parameter_axes
        sizes = model.domain.axis_sizes
        self.sizes = np.array([sizes[a] for a in dec], dtype=np.int64)
        self.offsets = _offsets(self.sizes)
        self.theta = int(self.sizes.sum())
        self.param_sizes = np.array([sizes[a] for a in par], dtype=np.int64)
        self.param_offsets = _offsets(self.param_sizes)
        mu = len(dec)
        self.lin_base = np.concatenate([model.first_order[a] for a in dec])
        # rows: parameter one-hot positions, columns: decision positions
        self.mixed = np.zeros((int(self.param_sizes.sum()), self.theta))
        for k, pa in enumerate(par):
            ko = self.param_offsets[k]
            for m, da in enumerate(dec):
                mo = self.offsets[m]
                self.mixed[ko:ko + sizes[pa], mo:mo + sizes[da]] = model.pair_table(pa, da)
        self.pair_offsets = np.zeros(mu * mu, dtype=np.int64)
        chunks = []
        pos = 0
        for m in range(mu):
            for n in range(m + 1, mu):
                t = np.ascontiguousarray(model.pair_table(dec[m], dec[n]))
                self.pair_offsets[m * mu + n] = pos
                chunks.append(t.ravel())
                pos += t.size
        self.pair_flat = np.concatenate(chunks) if chunks else np.zeros(0)

    @property
    def n_candidates(self) -> int:
        return math.prod(int(s) for s in self.sizes)

    def pair(self, m: int, n: int) -> np.ndarray:
        off = self.pair_offsets[m * len(self.sizes) + n]
        shape = (int(self.sizes[m]), int(self.sizes[n]))
        return self.pair_flat[off:off + shape[0] * shape[1]].reshape(shape)

    def lin(self, X) -> np.ndarray:
        """Per-query linear coefficients over decision positions, ``(n, theta)``."""
        X = _queries(X, len(self.param_sizes))
        out = np.broadcast_to(self.lin_base, (X.shape[0], self.theta)).copy()
        for k in range(len(self.param_sizes)):
            out = out + self.mixed[self.param_offsets[k] + X[:, k]]
        return out

    def parameter_part(self, X) -> np.ndarray:
        X = _queries(X, len(self.param_sizes))
        return self.model.partial_evaluate(self.split.parameter_axes, X)

    def decision_values(self, LIN: np.ndarray, zs: np.ndarray) -> np.ndarray:
        """Decision part for every (query, candidate) pair, ``(n, len(zs))``."""
        mu = len(self.sizes)
        acc = 0.0 + LIN[:, self.offsets[0] + zs[:, 0]]
        for m in range(1, mu):
            term = LIN[:, self.offsets[m] + zs[:, m]]
            for k in range(m):
                term = term + self.pair(k, m)[zs[:, k], zs[:, m]]
            acc = acc + term
        return acc

    def mean_over_decisions(self, X) -> np.ndarray:
        """Exact mean of ``g(x, .)`` over the full decision grid."""
        LIN = self.lin(X)
        mu = len(self.sizes)
        out = self.parameter_part(X)
        for m in range(mu):
            o, s = self.offsets[m], self.sizes[m]
            out = out + LIN[:, o:o + s].mean(axis=1)
        for m in range(mu):
            for n in range(m + 1, mu):
                out = out + self.pair(m, n).mean()
        return out

    def all_decisions(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(s) for s in self.sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def full_point(self, x: Sequence[int], z: Sequence[int]) -> tuple[int, ...]:
        pt = [0] * self.model.domain.ndim
        for a, v in zip(self.split.parameter_axes, x):
            pt[a] = int(v)
        for a, v in zip(self.split.decision_axes, z):
            pt[a] = int(v)
        return tuple(pt)


@dataclass(frozen=True, eq=False)
class RelaxedProblem:
    """Quadratic form ``1/2 v'Fv + h'v + u'Gv`` with sphere radius ``r``.

    ``G`` has one row per parameter one-hot position and one column per
    decision position.  Decision blocks are doubly centered, so every block
    row and column averages to zero; the constant and parameter-only terms
    moved out by the centering live in ``param_const`` and ``param_offset``.
    """

    F: np.ndarray
    G: np.ndarray
    h: np.ndarray
    r: float
    sizes: np.ndarray
    offsets: np.ndarray
    param_sizes: np.ndarray
    param_offsets: np.ndarray
    param_const: float
    param_offset: np.ndarray
    objective: SplitObjective = field(repr=False)

    @property
    def theta(self) -> int:
        return int(self.sizes.sum())

    @property
    def mu(self) -> int:
        return len(self.sizes)

    def gradient(self, X) -> np.ndarray:
        """``h + G'u(x)`` for each query row, ``(n, theta)``."""
        X = _queries(X, len(self.param_sizes))
        out = np.broadcast_to(self.h, (X.shape[0], self.theta)).copy()
        for k in range(len(self.param_sizes)):
            out = out + self.G[self.param_offsets[k] + X[:, k]]
        return out

    def parameter_part(self, X) -> np.ndarray:
        """Everything of ``g(x, z)`` not represented by ``gamma``."""
        X = _queries(X, len(self.param_sizes))
        out = self.objective.parameter_part(X) + self.param_const
        for k in range(len(self.param_sizes)):
            out = out + self.param_offset[self.param_offsets[k] + X[:, k]]
        return out

    def gamma(self, X, V) -> np.ndarray:
        V = np.atleast_2d(V)
        C = self.gradient(X)
        return 0.5 * np.einsum("ij,jk,ik->i", V, self.F, V) + np.einsum("ij,ij->i", C, V)

    def encode(self, zs, shifted: bool = False) -> np.ndarray:
        """One-hot (or mean-shifted one-hot) encodings of decision index rows."""
        zs = np.atleast_2d(np.asarray(zs, dtype=np.int64))
        V = np.zeros((zs.shape[0], self.theta))
        rows = np.arange(zs.shape[0])
        for m in range(self.mu):
            V[rows, self.offsets[m] + zs[:, m]] = 1.0
            if shifted:
                V[:, self.offsets[m]:self.offsets[m] + self.sizes[m]] -= 1.0 / self.sizes[m]
        return V


def assemble(model: HdmrModel, split: AxisSplit, check: bool = True) -> RelaxedProblem:
    """Build the relaxed quadratic problem for ``min_z g(x, z)``."""
    split.validate(model.domain.ndim)
    if check and not model.is_balanced():
        raise PreconditionError("model is not rebalanced (component tables must have zero mean)")
    obj = SplitObjective(model, split)
    mu, theta = len(obj.sizes), obj.theta
    sizes, offs = obj.sizes, obj.offsets
    h = obj.lin_base.copy()
    G = obj.mixed.copy()
    F = np.zeros((theta, theta))
    param_offset = np.zeros(G.shape[0])
    const = 0.0
    for m in range(mu):
        for n in range(m + 1, mu):
            t = obj.pair(m, n)
            rmean = t.mean(axis=1)
            t = t - rmean[:, None]
            cmean = t.mean(axis=0)
            t = t - cmean[None, :]
            h[offs[m]:offs[m] + sizes[m]] += rmean
            h[offs[n]:offs[n] + sizes[n]] += cmean
            F[offs[m]:offs[m] + sizes[m], offs[n]:offs[n] + sizes[n]] = t
            F[offs[n]:offs[n] + sizes[n], offs[m]:offs[m] + sizes[m]] = t.T
    for m in range(mu):
        blk = slice(offs[m], offs[m] + sizes[m])
        cm = G[:, blk].mean(axis=1)
        G[:, blk] -= cm[:, None]
        param_offset += cm
        hm = h[blk].mean()
        h[blk] -= hm
        const += hm
    r = math.sqrt(mu - sum(1.0 / s for s in sizes))
    for a in (F, G, h):
        a.setflags(write=False)
    return RelaxedProblem(F, G, h, r, sizes, offs, obj.param_sizes, obj.param_offsets,
                          const, param_offset, obj)


@dataclass(frozen=True, eq=False)
class SpectralCache:
    """Eigendecomposition ``F = U' diag(D) U`` (rows of ``U`` are eigenvectors)."""

    U: np.ndarray
    D: np.ndarray
    Uh: np.ndarray
    UGt: np.ndarray
    f_scale: float
    zero_f: bool

    def b(self, X, param_offsets) -> np.ndarray:
        X = _queries(X, len(param_offsets))
        out = np.broadcast_to(self.Uh, (X.shape[0], self.Uh.size)).copy()
        for k in range(len(param_offsets)):
            out = out + self.UGt[:, param_offsets[k] + X[:, k]].T
        return out


def decompose(problem: RelaxedProblem) -> SpectralCache:
    """Symmetric eigendecomposition with ascending eigenvalues."""
    F = problem.F
    if not np.all(np.isfinite(F)):
        raise NumericError("F contains NaN or Inf")
    f_scale = float(np.abs(F).max()) if F.size else 0.0
    if f_scale == 0.0:
        D = np.zeros(problem.theta)
        U = np.eye(problem.theta)
    else:
        D, V = np.linalg.eigh(F)
        U = np.ascontiguousarray(V.T)
    h_scale = float(np.abs(problem.h).max()) if problem.h.size else 0.0
    zero_f = f_scale <= 1e-12 * max(1.0, h_scale)
    Uh = U @ problem.h
    UGt = U @ problem.G.T if problem.G.size else np.zeros((problem.theta, 0))
    return SpectralCache(U, D, Uh, np.ascontiguousarray(UGt), f_scale, zero_f)


def _b_tolerance(cache: SpectralCache, B: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(B).max(axis=1), max(cache.f_scale, 1e-300))
    return 1e-13 * math.sqrt(B.shape[1]) * scale


def _secular_batch(cache: SpectralCache, B: np.ndarray, r: float):
    """Classify rows and solve the secular equation where it has a root.

    Returns ``(lam, mode)``.  ``mode`` is easy, hard (lam = D_1, root absent
    below the smallest eigenvalue) or zero-b.
    """
    D = cache.D
    n, theta = B.shape
    tol = _b_tolerance(cache, B)
    active = np.abs(B) > tol[:, None]
    any_active = active.any(axis=1)
    cluster = D <= D[0] + 1e-12 * max(1.0, cache.f_scale) * theta
    first_in_cluster = (active & cluster[None, :]).any(axis=1)
    lam = np.full(n, D[0])
    mode = np.full(n, MODE_ZERO_B)
    bsq = np.where(active, B * B, 0.0)
    upper = np.full(n, D[0])
    easy = np.zeros(n, dtype=bool)
    # lowest eigen-cluster carries weight: root below the first active eigenvalue
    k = np.argmax(active, axis=1)
    upper[first_in_cluster] = D[k[first_in_cluster]]
    easy |= first_in_cluster
    rest = any_active & ~first_in_cluster
    if rest.any():
        gap = D[None, :] - D[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            lim = np.where(active[rest], bsq[rest] / (gap * gap), 0.0).sum(axis=1)
        ok = lim > r * r * (1.0 + 1e-12)
        idx = np.nonzero(rest)[0]
        easy[idx[ok]] = True
        mode[idx[~ok]] = MODE_HARD
    if easy.any():
        rows = np.nonzero(easy)[0]
        lam[rows] = kernels.secular_newton(D, np.ascontiguousarray(bsq[rows]), upper[rows], r)
        mode[rows] = MODE_EASY
    return lam, mode, active


def solve_secular(cache: SpectralCache, b, r: float) -> float:
    """Root ``lam < D_k`` of ``sum_{i>=k} (b_i / (D_i - lam))^2 = r^2``.

    ``k`` is the first non-negligible entry of ``b``.  Raises
    :class:`HardCase` when ``b`` vanishes.  When the root would not lie below
    the smallest eigenvalue (the degenerate hard case) ``D_1`` is returned.
    """
    if r <= 0:
        raise PreconditionError("radius must be positive")
    B = np.asarray(b, dtype=float).reshape(1, -1)
    lam, mode, _ = _secular_batch(cache, B, r)
    if mode[0] == MODE_ZERO_B:
        raise HardCase("b vanishes; the minimizer lies in the lowest eigenspace")
    return float(lam[0])


def secular_residual(cache: SpectralCache, b, lam: float, r: float) -> float:
    """``|sum_{i>=k} (b_i/(D_i - lam))^2 - r^2|`` with ``k`` as in :func:`solve_secular`."""
    B = np.asarray(b, dtype=float).reshape(1, -1)
    active = np.abs(B) > _b_tolerance(cache, B)[:, None]
    k = int(np.argmax(active[0]))
    s = np.sum((B[0, k:] / (cache.D[k:] - lam)) ** 2)
    return abs(float(s) - r * r)


@dataclass
class RelaxedSolution:
    V: np.ndarray          # (n, theta) relaxed minimizers
    lower: np.ndarray      # gamma(u, v_hat)
    lam: np.ndarray
    mode: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.mode == MODE_DEGENERATE


def relaxed_minimizer_batch(cache: SpectralCache, problem: RelaxedProblem, X) -> RelaxedSolution:
    """Exact minimizers of the relaxed problem for a batch of parameter rows."""
    X = _queries(X, len(problem.param_sizes))
    n, theta, r = X.shape[0], problem.theta, problem.r
    C = problem.gradient(X)
    V = np.zeros((n, theta))
    lam = np.full(n, np.nan)
    mode = np.full(n, MODE_EASY)
    if cache.zero_f:
        norm = np.linalg.norm(C, axis=1)
        ok = norm > 1e-14 * max(1.0, float(np.abs(C).max()) if C.size else 0.0)
        V[ok] = -r * C[ok] / norm[ok, None]
        mode[ok] = MODE_ZERO_F
        mode[~ok] = MODE_DEGENERATE
        V[~ok] = r * cache.U[0]
    else:
        B = cache.b(X, problem.param_offsets)
        lam, mode, active = _secular_batch(cache, B, r)
        W = np.zeros((n, theta))
        easy = mode == MODE_EASY
        if easy.any():
            W[easy] = -B[easy] / (cache.D[None, :] - lam[easy, None])
        hard = mode == MODE_HARD
        if hard.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                Wh = np.where(active[hard], -B[hard] / (cache.D[None, :] - cache.D[0]), 0.0)
            tau = np.sqrt(np.maximum(r * r - (Wh * Wh).sum(axis=1), 0.0))
            Wh[:, 0] = tau
            W[hard] = Wh
        zero = mode == MODE_ZERO_B
        if zero.any():
            W[zero, 0] = r
        V = W @ cache.U
        # the eigenvector sign in the hard/zero-b cases is free: keep the better one
        free = hard | zero
        if free.any():
            rows = np.nonzero(free)[0]
            W2 = W[rows].copy()
            W2[:, 0] = -W2[:, 0]
            V2 = W2 @ cache.U
            g1 = problem.gamma(X[rows], V[rows])
            g2 = problem.gamma(X[rows], V2)
            flip = g2 < g1
            V[rows[flip]] = V2[flip]
        mode = np.where(zero, MODE_DEGENERATE, mode)
    lower = problem.gamma(X, V)
    return RelaxedSolution(V, lower, lam, mode)


def relaxed_minimizer(cache: SpectralCache, problem: RelaxedProblem, x):
    """``(v_hat, gamma(u, v_hat))`` for one parameter point ``x``."""
    sol = relaxed_minimizer_batch(cache, problem, _queries(x, len(problem.param_sizes), single=True))
    return sol.V[0], float(sol.lower[0])


def lower_bound(cache: SpectralCache, problem: RelaxedProblem, X) -> np.ndarray:
    """Full lower bound on ``p(x)``: relaxed minimum plus the parameter-only part."""
    sol = relaxed_minimizer_batch(cache, problem, X)
    return sol.lower + problem.parameter_part(X)


def normalize_scores(V: np.ndarray, sizes, offsets) -> np.ndarray:
    """Shift rows to be nonnegative and scale every block to a maximum of 1.

    A block that is identically zero after the shift becomes all ones.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    W = V - V.min(axis=1, keepdims=True)
    for o, s in zip(offsets, sizes):
        blk = W[:, o:o + s]
        top = blk.max(axis=1)
        flat = top <= 0.0
        safe = np.where(flat, 1.0, top)
        blk = blk / safe[:, None]
        blk[flat] = 1.0
        W[:, o:o + s] = blk
    return W


@dataclass
class CandidateSet:
    """Decision points with score ``q(z) >= phi``, in lexicographic order."""

    phi: float
    axis_indices: list[np.ndarray]
    candidates: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return self.candidates.shape[0]


def _validate_phi(phi: float) -> float:
    phi = float(phi)
    if not 0.0 <= phi <= 1.0:
        raise PreconditionError(f"phi must lie in [0, 1], got {phi}")
    return phi


def candidate_set(v_hat, problem: RelaxedProblem, phi: float,
                  budget: int = DEFAULT_BUDGET) -> CandidateSet:
    """Enumerate ``Z^phi`` axis by axis, pruning prefixes whose product drops below phi."""
    phi = _validate_phi(phi)
    v_hat = np.asarray(v_hat, dtype=float).ravel()
    if v_hat.size != problem.theta:
        raise PreconditionError(f"v_hat has {v_hat.size} entries, expected {problem.theta}")
    w = normalize_scores(v_hat, problem.sizes, problem.offsets)[0]
    return _enumerate(w, problem.sizes, problem.offsets, phi, budget)


def _enumerate(w, sizes, offsets, phi, budget) -> CandidateSet:
    blocks = [w[o:o + s] for o, s in zip(offsets, sizes)]
    axis_idx = [np.nonzero(b >= phi)[0] for b in blocks]
    idx = np.zeros((1, 0), dtype=np.int64)
    q = np.ones(1)
    for m, b in enumerate(blocks):
        qn = q[:, None] * b[None, :] if m else b[None, :].copy()
        rows, cols = np.nonzero(qn >= phi)
        if rows.size > budget:
            raise BudgetExceededError("candidate enumeration", int(rows.size), budget)
        q = qn[rows, cols]
        idx = np.column_stack([idx[rows], cols]).astype(np.int64)
    return CandidateSet(phi, axis_idx, idx, q)


@dataclass
class BatchMinimum:
    value: np.ndarray       # (n,) best objective value found
    z: np.ndarray           # (n, mu) argmin decision indices
    evaluations: np.ndarray  # (n,) candidates evaluated per query


def _minimize(obj: SplitObjective, X, W, phi, budget, dense_limit) -> BatchMinimum:
    n = X.shape[0]
    mu = len(obj.sizes)
    LIN = obj.lin(X)
    param = obj.parameter_part(X)
    if obj.n_candidates <= dense_limit:
        zs = obj.all_decisions()
        vals = obj.decision_values(LIN, zs)
        Q = W[:, obj.offsets[0] + zs[:, 0]]
        for m in range(1, mu):
            Q = Q * W[:, obj.offsets[m] + zs[:, m]]
        mask = Q >= phi
        evals = mask.sum(axis=1)
        if evals.max(initial=0) > budget:
            raise BudgetExceededError("candidate minimization", int(evals.max()), budget)
        vals = np.where(mask, vals, np.inf)
        j = np.argmin(vals, axis=1)
        best = vals[np.arange(n), j]
        return BatchMinimum(param + best, zs[j], evals)
    value = np.empty(n)
    z = np.empty((n, mu), dtype=np.int64)
    evals = np.empty(n, dtype=np.int64)
    for i in range(n):
        best, bz, count = kernels.candidate_min(obj.sizes, obj.offsets, W[i], phi, LIN[i],
                                                obj.pair_flat, obj.pair_offsets, budget)
        if count < 0:
            raise BudgetExceededError("candidate minimization", budget + 1, budget)
        value[i] = param[i] + best
        z[i] = bz
        evals[i] = count
    return BatchMinimum(value, z, evals)


def approx_min_batch(model: HdmrModel, split: AxisSplit, cache: SpectralCache,
                     problem: RelaxedProblem, X, phi: float, budget: int = DEFAULT_BUDGET,
                     dense_limit: int = DENSE_LIMIT, solution: RelaxedSolution | None = None
                     ) -> BatchMinimum:
    """Upper bounds ``min_{z in Z^phi} g(x, z)`` for every parameter row of ``X``."""
    phi = _validate_phi(phi)
    obj = problem.objective
    if (obj.model is not model and not obj.model.equals(model)) or obj.split != split:
        raise PreconditionError("problem was not assembled from this model and split")
    X = _queries(X, len(problem.param_sizes))
    if solution is None:
        solution = relaxed_minimizer_batch(cache, problem, X)
    W = normalize_scores(solution.V, problem.sizes, problem.offsets)
    return _minimize(obj, X, W, phi, budget, dense_limit)


def approx_min(model: HdmrModel, split: AxisSplit, cache: SpectralCache,
               problem: RelaxedProblem, x, phi: float, budget: int = DEFAULT_BUDGET):
    """``(p_bar_phi(x), z_hat)``: best value over ``Z^phi`` and its argmin."""
    res = approx_min_batch(model, split, cache, problem, _queries(x, len(split.parameter_axes), single=True), phi,
                           budget=budget)
    return float(res.value[0]), tuple(int(v) for v in res.z[0])


def exact_min_batch(model: HdmrModel, split: AxisSplit, X, budget: int = DEFAULT_BUDGET,
                    dense_limit: int = DENSE_LIMIT, objective: SplitObjective | None = None
                    ) -> BatchMinimum:
    obj = objective if objective is not None else SplitObjective(model, split)
    if obj.n_candidates > budget:
        raise BudgetExceededError("exact minimization", obj.n_candidates, budget)
    X = _queries(X, len(obj.param_sizes))
    W = np.ones((X.shape[0], obj.theta))
    return _minimize(obj, X, W, 0.0, budget, dense_limit)


def exact_min(model: HdmrModel, split: AxisSplit, x, budget: int = DEFAULT_BUDGET):
    """Exhaustive ``(p(x), z*)`` with lexicographic tie-breaking."""
    res = exact_min_batch(model, split, _queries(x, len(split.parameter_axes), single=True), budget=budget)
    return float(res.value[0]), tuple(int(v) for v in res.z[0])
