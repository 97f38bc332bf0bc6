"""Bayesian Bernoulli multi-armed bandit with a finite horizon.

Arms are addressed by grid coordinates (0-based here).  A sufficient
statistic is an integer array ``s[y, i, j]`` counting how often outcome ``y``
followed a pull of arm ``(i, j)``.  Flattened, cell ``y * n_arms + k`` holds
``s[y, arm k]`` with ``k = i * arms[1] + j``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adp import DecisionProblem, Transitions
from .errors import BudgetExceededError, ConfigError, PolicyError, PreconditionError
from .hdmr import GridDomain


@dataclass(frozen=True)
class GameConfig:
    arms: tuple[int, ...] = (3, 3)
    horizon: int = 8
    prior: tuple[tuple[int, tuple[int, ...], int], ...] = ((0, (0, 0), 1),)
    plays: int = 20000
    seed: int = 0
    pinned: tuple[tuple[tuple[int, ...], float], ...] = (((0, 0), 0.1),)

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(int(a) for a in self.arms))
        object.__setattr__(self, "prior", tuple((int(y), tuple(int(v) for v in a), int(c))
                                                for y, a, c in self.prior))
        object.__setattr__(self, "pinned", tuple((tuple(int(v) for v in a), float(p))
                                                 for a, p in self.pinned))
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.plays < 1:
            raise ConfigError("plays must be at least 1")
        if not self.arms or min(self.arms) < 1:
            raise ConfigError("every arm axis needs at least one arm")
        for y, a, c in self.prior:
            if y not in (0, 1) or c < 0:
                raise ConfigError(f"bad prior entry {(y, a, c)}")
            self.arm_index(a)
        for a, p in self.pinned:
            self.arm_index(a)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"pinned payoff {p} outside [0, 1]")

    @property
    def n_arms(self) -> int:
        return math.prod(self.arms)

    @property
    def n_cells(self) -> int:
        return 2 * self.n_arms

    def arm_index(self, a: Sequence[int]) -> int:
        a = tuple(int(v) for v in a)
        if len(a) != len(self.arms) or any(not 0 <= v < n for v, n in zip(a, self.arms)):
            raise ConfigError(f"arm {list(a)} outside the {self.arms} arm grid")
        return int(np.ravel_multi_index(a, self.arms))

    def prior_statistic(self) -> np.ndarray:
        s = np.zeros((2,) + self.arms, dtype=np.int64)
        for y, a, c in self.prior:
            s[(y,) + a] += c
        return s

    @property
    def prior_mass(self) -> int:
        return int(sum(c for _, _, c in self.prior))

    @property
    def axis_size(self) -> int:
        # counts at stage t total t-1+prior, so no cell exceeds horizon-1+prior
        return self.horizon + self.prior_mass


def predict(s: np.ndarray, a: Sequence[int]) -> float:
    """Posterior predictive ``Prob(y = 1 | a, s)`` under a uniform Beta prior."""
    s = np.asarray(s)
    a = tuple(a)
    s1, s0 = int(s[(1,) + a]), int(s[(0,) + a])
    return (s1 + 1) / (s0 + s1 + 2)


def predict_batch(S: np.ndarray, k: int, n_arms: int) -> np.ndarray:
    """``Prob(y = 1)`` for arm ``k`` on flattened statistics, one per row."""
    s0 = S[:, k]
    s1 = S[:, n_arms + k]
    return (s1 + 1) / (s0 + s1 + 2)


def update(s: np.ndarray, a: Sequence[int], y: int) -> np.ndarray:
    if y not in (0, 1):
        raise PreconditionError(f"outcome must be 0 or 1, got {y}")
    out = np.array(s, dtype=np.int64, copy=True)
    out[(int(y),) + tuple(a)] += 1
    return out


def reachable_count(cfg: GameConfig, t: int) -> int:
    """``|R_t|``: count vectors over all cells with ``t - 1`` increments."""
    return math.comb(t - 1 + cfg.n_cells - 1, cfg.n_cells - 1)


class BanditProblem(DecisionProblem):
    """The bandit as a :class:`DecisionProblem` with loss ``-y``."""

    def __init__(self, cfg: GameConfig):
        self.cfg = cfg
        self.horizon = cfg.horizon
        self.action_domain = GridDomain(cfg.arms)
        self.state_domain = GridDomain((cfg.axis_size,) * cfg.n_cells)
        self._reachable = {1: cfg.prior_statistic().reshape(1, -1)}

    def reachable(self, t: int) -> np.ndarray:
        if not 1 <= t <= self.horizon + 1:
            raise PreconditionError(f"stage {t} outside 1..{self.horizon + 1}")
        for u in range(max(self._reachable) + 1, t + 1):
            prev = self._reachable[u - 1]
            nc = self.cfg.n_cells
            grown = np.repeat(prev, nc, axis=0)
            grown[np.arange(grown.shape[0]), np.tile(np.arange(nc), prev.shape[0])] += 1
            self._reachable[u] = np.unique(grown, axis=0)
        return self._reachable[t]

    def reachable_count(self, t: int) -> int:
        return reachable_count(self.cfg, t)

    def successors(self, t, a, y):
        s = np.asarray(y, dtype=np.int64).reshape((2,) + self.cfg.arms)
        p1 = predict(s, a)
        return [(tuple(update(s, a, 0).ravel()), 1.0 - p1), (tuple(update(s, a, 1).ravel()), p1)]

    def loss(self, t, y, y_next, a) -> float:
        # the outcome is whichever cell of arm a grew; loss is minus the payoff
        c = self.cfg.n_arms + self.cfg.arm_index(a)
        return -1.0 if y_next[c] > y[c] else 0.0

    def transitions(self, t: int, a: np.ndarray, states: np.ndarray) -> Transitions:
        cfg = self.cfg
        k = cfg.arm_index(a)
        n = states.shape[0]
        p1 = predict_batch(states, k, cfg.n_arms)
        prob = np.empty(2 * n)
        prob[0::2] = 1.0 - p1
        prob[1::2] = p1
        nxt = np.repeat(states, 2, axis=0)
        nxt[0::2, k] += 1
        nxt[1::2, cfg.n_arms + k] += 1
        loss = np.zeros(2 * n)
        loss[1::2] = -1.0
        return Transitions(np.repeat(np.arange(n, dtype=np.int64), 2), nxt, prob, loss)


def make_problem(cfg: GameConfig, budget: int = 10**7) -> BanditProblem:
    """Bandit decision problem; refuses when the reachable sets exceed ``budget``."""
    total = sum(reachable_count(cfg, t) for t in range(1, cfg.horizon + 1))
    if total > budget:
        raise BudgetExceededError("reachable statistics", total, budget)
    return BanditProblem(cfg)


@dataclass
class PlayDraws:
    """Common random numbers: payoff matrices and per-round uniforms."""

    P: np.ndarray  # (plays, n_arms)
    U: np.ndarray  # (plays, horizon)


def draw_plays(cfg: GameConfig, seed: int | None = None) -> PlayDraws:
    """Independent stream per play, keyed by ``(seed, play index)``."""
    seed = cfg.seed if seed is None else seed
    P = np.empty((cfg.plays, cfg.n_arms))
    U = np.empty((cfg.plays, cfg.horizon))
    for i in range(cfg.plays):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        P[i] = rng.random(cfg.n_arms)
        U[i] = rng.random(cfg.horizon)
    for a, p in cfg.pinned:
        P[:, cfg.arm_index(a)] = p
    return PlayDraws(P, U)


@dataclass
class PlayStats:
    mean: float
    stderr: float
    n: int
    payoffs: np.ndarray
    arms: np.ndarray | None = field(default=None, repr=False)      # (plays, horizon)
    outcomes: np.ndarray | None = field(default=None, repr=False)  # (plays, horizon)

    def write_traces(self, path, arm_shape: Sequence[int]) -> None:
        """CSV with columns play, round, arm, outcome, payoff (1-based labels)."""
        if self.arms is None:
            raise PreconditionError("traces were not recorded")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["play", "round", "arm", "outcome", "payoff"])
            for i in range(self.arms.shape[0]):
                for t in range(self.arms.shape[1]):
                    coords = np.unravel_index(int(self.arms[i, t]), tuple(arm_shape))
                    label = "[" + ",".join(str(c + 1) for c in coords) + "]"
                    w.writerow([i + 1, t + 1, label, int(self.outcomes[i, t]), repr(float(self.payoffs[i]))])


class ConstantPolicy:
    """Always pulls the same arm."""

    def __init__(self, cfg: GameConfig, arm: Sequence[int]):
        self.actions = GridDomain(cfg.arms).iter_points()
        self._i = cfg.arm_index(arm)

    def act(self, t: int, Y) -> np.ndarray:
        return np.full(np.asarray(Y).shape[0], self._i, dtype=np.int64)


def simulate(cfg: GameConfig, policy, seed: int | None = None,
             draws: PlayDraws | None = None, traces: bool = False) -> PlayStats:
    """Play ``cfg.plays`` games; payoff of a play is the mean outcome per round.

    ``policy.act(t, Y)`` returns row indices into ``policy.actions`` for a
    batch of statistics.  Pass ``draws`` to share random numbers between
    policies.
    """
    if draws is None:
        draws = draw_plays(cfg, seed)
    n = draws.P.shape[0]
    S = np.repeat(cfg.prior_statistic().reshape(1, -1), n, axis=0)
    arm_of_row = np.array([cfg.arm_index(a) for a in policy.actions], dtype=np.int64)
    total = np.zeros(n)
    arms = np.empty((n, cfg.horizon), dtype=np.int64)
    outcomes = np.empty((n, cfg.horizon), dtype=np.int64)
    rows = np.arange(n)
    for t in range(1, cfg.horizon + 1):
        try:
            choice = np.asarray(policy.act(t, S), dtype=np.int64)
            if choice.shape != (n,) or choice.min() < 0 or choice.max() >= arm_of_row.size:
                raise ValueError(f"policy returned invalid actions {choice[:5]}...")
        except Exception as exc:  # dump the first state so failures are reproducible
            raise PolicyError(str(exc), t, S[0]) from exc
        k = arm_of_row[choice]
        y = (draws.U[:, t - 1] < draws.P[rows, k]).astype(np.int64)
        S[rows, y * cfg.n_arms + k] += 1
        total += y
        arms[:, t - 1] = k
        outcomes[:, t - 1] = y
    payoffs = total / cfg.horizon
    stderr = float(payoffs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return PlayStats(float(payoffs.mean()), stderr, n, payoffs,
                     arms if traces else None, outcomes if traces else None)
