"""Finite-horizon dynamic programming in expected loss-to-go form.

Stage ``t`` (``1 <= t <= horizon``) tabulates ``E_t(a, y)``, the expected
loss of taking action ``a`` after observing state ``y = y_{t-1}`` and acting
optimally afterwards.  :func:`exact_backward` computes these tables over the
reachable states; :func:`offline_pass` replaces each table by a second-order
HDMR whose inner minimization uses the trust-region relaxation.
"""
from __future__ import annotations

import abc
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import trmin
from .errors import BudgetExceededError, LookupStateError, NumericError, PreconditionError
from .hdmr import GridDomain, HdmrModel, MarginalAccumulator, finalize

log = logging.getLogger(__name__)

PROB_TOL = 1e-12


@dataclass
class Transitions:
    """Flattened successor lists for a batch of parent states.

    Row ``i`` is one successor of parent ``parent[i]``; successors of a parent
    appear contiguously and in a fixed order.
    """

    parent: np.ndarray
    states: np.ndarray
    prob: np.ndarray
    loss: np.ndarray


class DecisionProblem(abc.ABC):
    """Finite-horizon stochastic decision problem on product grids.

    Subclasses provide the reachable states of every stage, the successor
    distribution and the loss.  :meth:`transitions` has a generic scalar
    implementation; problems with many states should vectorize it.
    """

    horizon: int
    action_domain: GridDomain
    state_domain: GridDomain

    def actions(self, t: int) -> np.ndarray:
        """All actions of stage ``t`` in lexicographic order."""
        return self.action_domain.iter_points()

    @abc.abstractmethod
    def reachable(self, t: int) -> np.ndarray:
        """States ``y_{t-1}`` that can occur at stage ``t``, one per row."""

    @abc.abstractmethod
    def successors(self, t: int, a: Sequence[int], y: Sequence[int]) -> Iterable[tuple[Sequence[int], float]]:
        """``(y_t, f_t(y_t | a, y))`` pairs with positive probability."""

    @abc.abstractmethod
    def loss(self, t: int, y: Sequence[int], y_next: Sequence[int], a: Sequence[int]) -> float:
        """Loss of the transition ``y -> y_next`` under action ``a``."""

    def reachable_count(self, t: int) -> int:
        return self.reachable(t).shape[0]

    def transitions(self, t: int, a: np.ndarray, states: np.ndarray) -> Transitions:
        parent, nxt, prob, loss = [], [], [], []
        a_t = tuple(int(v) for v in a)
        for i, y in enumerate(states):
            y_t = tuple(int(v) for v in y)
            for y_next, p in self.successors(t, a_t, y_t):
                parent.append(i)
                nxt.append(tuple(y_next))
                prob.append(p)
                loss.append(self.loss(t, y_t, y_next, a_t))
        ns = self.state_domain.ndim
        return Transitions(np.asarray(parent, dtype=np.int64),
                           np.asarray(nxt, dtype=np.int64).reshape(-1, ns),
                           np.asarray(prob, dtype=float), np.asarray(loss, dtype=float))


class StateIndex:
    """Sorted reachable states with vectorized row lookup."""

    def __init__(self, domain: GridDomain, states: np.ndarray):
        self.domain = domain
        states = np.asarray(states, dtype=np.int64).reshape(-1, domain.ndim)
        if domain.fits_int64():
            self._radix = np.array(
                [int(np.prod(domain.axis_sizes[m + 1:], dtype=object)) for m in range(domain.ndim)],
                dtype=np.int64)
            keys = states @ self._radix
            order = np.argsort(keys, kind="stable")
            self.keys = keys[order]
            if np.any(np.diff(self.keys) == 0):
                raise PreconditionError("duplicate reachable states")
            self._map = None
        else:
            # keys would overflow int64: fall back to a tuple dictionary
            order = np.lexsort(states.T[::-1])
            self._radix = None
            self.keys = None
            self._map = {tuple(r): i for i, r in enumerate(states[order])}
        self.states = np.ascontiguousarray(states[order])

    def __len__(self) -> int:
        return self.states.shape[0]

    def lookup(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=np.int64).reshape(-1, self.domain.ndim)
        if self._map is not None:
            try:
                return np.array([self._map[tuple(r)] for r in Y], dtype=np.int64)
            except KeyError as exc:
                raise LookupStateError(f"state {list(exc.args[0])} is not reachable") from None
        keys = Y @ self._radix
        idx = np.searchsorted(self.keys, keys)
        idx = np.minimum(idx, len(self.keys) - 1)
        miss = self.keys[idx] != keys
        if miss.any():
            bad = Y[np.argmax(miss)]
            raise LookupStateError(f"state {bad.tolist()} is not reachable")
        return idx


@dataclass
class ExactStageTable:
    """``E_t(a, y)`` for every action and every reachable ``y``."""

    t: int
    actions: np.ndarray
    index: StateIndex
    values: np.ndarray  # (n_actions, n_states)

    def value(self, a, y) -> float:
        a_idx = _action_index(self.actions, a)
        return float(self.values[a_idx, self.index.lookup(y)[0]])

    def greedy_batch(self, Y) -> np.ndarray:
        """Index (into ``actions``) of the first minimizing action per state."""
        cols = self.index.lookup(Y)
        return first_argmin(self.values[:, cols])

    def bellman(self, Y) -> np.ndarray:
        """``V_{t-1}(y) = min_a E_t(a, y)``."""
        return self.values[:, self.index.lookup(Y)].min(axis=0)

    def to_bytes(self) -> bytes:
        return np.ascontiguousarray(self.values, dtype="<f8").tobytes()


@dataclass
class HdmrStageTable:
    """HDMR of ``E_t`` over the grid (action axes, then state axes)."""

    t: int
    actions: np.ndarray
    model: HdmrModel
    n_action_axes: int

    @property
    def axis_roles(self) -> list[str]:
        nd = self.model.domain.ndim
        return ["action"] * self.n_action_axes + ["state"] * (nd - self.n_action_axes)

    def value(self, a, y) -> float:
        return self.model.evaluate(tuple(a) + tuple(y))

    def action_values(self, Y) -> np.ndarray:
        """Model value for every (action, state) pair, ``(n_actions, n_states)``."""
        Y = np.asarray(Y, dtype=np.int64).reshape(-1, self.model.domain.ndim - self.n_action_axes)
        out = np.empty((self.actions.shape[0], Y.shape[0]))
        for i, a in enumerate(self.actions):
            pts = np.hstack([np.broadcast_to(a, (Y.shape[0], a.size)), Y])
            out[i] = self.model.evaluate_many(pts)
        return out

    def greedy_batch(self, Y) -> np.ndarray:
        return first_argmin(self.action_values(Y))

    def to_bytes(self) -> bytes:
        return self.model.to_bytes()


StageTable = ExactStageTable | HdmrStageTable


def _action_index(actions: np.ndarray, a) -> int:
    hit = np.nonzero((actions == np.asarray(a, dtype=np.int64)).all(axis=1))[0]
    if hit.size == 0:
        raise LookupStateError(f"action {list(a)} is not available")
    return int(hit[0])


TIE_RTOL = 1e-12


def first_argmin(values: np.ndarray) -> np.ndarray:
    """Per column, the first row within rounding of the column minimum.

    Values closer than ``TIE_RTOL * (1 + |min|)`` count as tied, so ties that
    rounding noise would split still go to the lexicographically first action.
    """
    lo = values.min(axis=0)
    return np.argmax(values <= lo + TIE_RTOL * (1.0 + np.abs(lo)), axis=0)


def greedy_action(table: StageTable, y) -> tuple[int, ...]:
    """Lexicographically first ``argmin_a E_t(a, y)``."""
    i = int(table.greedy_batch(np.asarray(y, dtype=np.int64).reshape(1, -1))[0])
    return tuple(int(v) for v in table.actions[i])


def bellman_value(table: StageTable, y) -> float:
    """``V_{t-1}(y) = min_a E_t(a, y)`` (derived, never stored)."""
    Y = np.asarray(y, dtype=np.int64).reshape(1, -1)
    if isinstance(table, ExactStageTable):
        return float(table.bellman(Y)[0])
    return float(table.action_values(Y).min())


def _check_budget(dp: DecisionProblem, budget: int) -> None:
    total = 0
    for t in range(1, dp.horizon + 1):
        total += dp.reachable_count(t) * dp.actions(t).shape[0]
        if total > budget:
            raise BudgetExceededError("reachable (action, state) pairs", total, budget)


def _expectation(tr: Transitions, n_parents: int, future: np.ndarray | None) -> np.ndarray:
    sums = np.bincount(tr.parent, weights=tr.prob, minlength=n_parents)
    if tr.prob.size and (tr.prob.min() < 0 or np.abs(sums - 1.0).max() > PROB_TOL):
        raise PreconditionError("successor probabilities do not sum to one")
    inner = tr.loss if future is None else tr.loss + future
    return np.bincount(tr.parent, weights=tr.prob * inner, minlength=n_parents)


def exact_backward(dp: DecisionProblem, budget: int = 10**8) -> list[ExactStageTable]:
    """Exact ``E_t`` tables, returned in stage order ``t = 1..horizon``."""
    _check_budget(dp, budget)
    tables: dict[int, ExactStageTable] = {}
    nxt: ExactStageTable | None = None
    for t in range(dp.horizon, 0, -1):
        index = StateIndex(dp.state_domain, dp.reachable(t))
        acts = dp.actions(t)
        values = np.empty((acts.shape[0], len(index)))
        for i, a in enumerate(acts):
            tr = dp.transitions(t, a, index.states)
            future = None if nxt is None else nxt.bellman(tr.states)
            values[i] = _expectation(tr, len(index), future)
        nxt = tables[t] = ExactStageTable(t, acts, index, values)
        log.debug("exact stage %d: %d states", t, len(index))
    return [tables[t] for t in range(1, dp.horizon + 1)]


@dataclass
class OfflineResult:
    """HDMR stage tables plus per-stage diagnostics."""

    phi: float
    tables: list[HdmrStageTable]
    decompositions: dict[int, int] = field(default_factory=dict)
    # stage t -> (successor states y_t, upper bound pi_bar(y_t), candidates evaluated)
    pi_bar: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=dict)


def stage_domain(dp: DecisionProblem) -> GridDomain:
    return GridDomain(dp.action_domain.axis_sizes + dp.state_domain.axis_sizes)


def stage_split(dp: DecisionProblem) -> trmin.AxisSplit:
    na, ns = dp.action_domain.ndim, dp.state_domain.ndim
    return trmin.AxisSplit(range(na, na + ns), range(na))


def offline_pass(dp: DecisionProblem, phi: float, budget: int = 10**8,
                 keep_pi_bar: Iterable[int] = ()) -> OfflineResult:
    """HDMR tables ``E~_t^phi`` built backwards with trust-region inner minimization.

    Samples ``(a, y)`` are streamed in lexicographic order (actions outer,
    sorted states inner).  ``keep_pi_bar`` lists stages whose upper bounds
    ``pi_bar_t`` should be retained for diagnostics.
    """
    phi = float(phi)
    if not 0.0 <= phi <= 1.0:
        raise PreconditionError(f"phi must lie in [0, 1], got {phi}")
    _check_budget(dp, budget)
    keep = set(keep_pi_bar)
    domain = stage_domain(dp)
    split = stage_split(dp)
    na = dp.action_domain.ndim
    result = OfflineResult(phi, [])
    tables: dict[int, HdmrStageTable] = {}
    nxt: HdmrStageTable | None = None
    for t in range(dp.horizon, 0, -1):
        states = StateIndex(dp.state_domain, dp.reachable(t)).states
        acts = dp.actions(t)
        succ_index = pi_bar = None
        if nxt is not None:
            problem = trmin.assemble(nxt.model, split)
            cache = trmin.decompose(problem)
            result.decompositions[t] = 1
            succ_index = StateIndex(dp.state_domain, dp.reachable(t + 1))
            # one bound per distinct successor state, shared by every (a, y)
            res = trmin.approx_min_batch(nxt.model, split, cache, problem,
                                         succ_index.states, phi, budget=budget)
            pi_bar = res.value
            if t in keep:
                result.pi_bar[t] = (succ_index.states, pi_bar, res.evaluations)
        else:
            result.decompositions[t] = 0
        acc = MarginalAccumulator(domain)
        for a in acts:
            tr = dp.transitions(t, a, states)
            future = None if pi_bar is None else pi_bar[succ_index.lookup(tr.states)]
            vals = _expectation(tr, states.shape[0], future)
            if not np.all(np.isfinite(vals)):
                raise NumericError(f"non-finite loss-to-go at stage {t}")
            pts = np.hstack([np.broadcast_to(a, (states.shape[0], na)), states])
            acc.accumulate_batch(pts, vals)
        nxt = tables[t] = HdmrStageTable(t, acts, finalize(acc), na)
        log.debug("offline stage %d: %d samples", t, acc.count0)
    result.tables = [tables[t] for t in range(1, dp.horizon + 1)]
    return result


class GreedyPolicy:
    """Online policy: at stage ``t`` pick ``argmin_a`` of the stage table."""

    def __init__(self, tables: Sequence[StageTable], name: str = "greedy"):
        self.tables = list(tables)
        self.name = name

    def act(self, t: int, Y) -> np.ndarray:
        return self.tables[t - 1].greedy_batch(Y)

    @property
    def actions(self) -> np.ndarray:
        return self.tables[0].actions
