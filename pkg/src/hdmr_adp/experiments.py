"""Replication experiments: random trust-region minimization and the bandit.

Each runner returns a :class:`Report`.  CSV files hold only deterministic
quantities (floats written with ``repr``); timings and environment details
go to the JSON report.
"""
from __future__ import annotations

import csv
import json
import math
import platform
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, adp, bandit, kernels, trmin
from .config import game_config
from .hdmr import GridDomain, HdmrModel, rebalance


CSV_SCHEMA_VERSION = 1  # bump when a column is added, removed or redefined


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]

    def column(self, name: str) -> list[Any]:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]


@dataclass
class Report:
    kind: str
    config: dict
    tables: dict[str, Table]
    meta: dict[str, Any] = field(default_factory=dict)

    def write(self, out_dir=None) -> Path:
        out = Path(out_dir if out_dir is not None else self.config["output"]["dir"])
        out.mkdir(parents=True, exist_ok=True)
        for name, tab in self.tables.items():
            write_csv(out / f"{name}.csv", tab)
        doc = {"kind": self.kind, "version": __version__, "csv_schema_version": CSV_SCHEMA_VERSION,
               "config": self.config, **self.meta}
        (out / "report.json").write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n",
                                         encoding="utf-8")
        return out


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def write_csv(path, table: Table) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def _median_time(fn: Callable[[], Any], repeats: int):
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def _mean_stderr(xs) -> tuple[float, float]:
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        return float(xs.mean()), 0.0
    return float(xs.mean()), float(xs.std(ddof=1) / math.sqrt(xs.size))


def _env() -> dict:
    return {"backend": kernels.BACKEND, "python": platform.python_version(), "numpy": np.__version__}


# ---------------------------------------------------------------- randmin

def random_model(axes, seed: int, first_order: bool = True) -> HdmrModel:
    """Uniform ``[0, 1]`` pair tables (and first-order tables), rebalanced."""
    domain = GridDomain(axes)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    second = {(m, n): rng.random((domain.axis_sizes[m], domain.axis_sizes[n])) for m, n in domain.pairs()}
    if first_order:
        first = tuple(rng.random(s) for s in domain.axis_sizes)
    else:
        first = tuple(np.zeros(s) for s in domain.axis_sizes)
    return rebalance(HdmrModel(domain, 0.0, first, second))


RANDMIN_COLUMNS = ["seed", "phi", "p_exact", "p_mean", "p_lower", "p_upper",
                   "scaled_lower", "scaled_upper", "n_candidates", "log_n_candidates",
                   "exact_evaluations", "sandwich_ok"]


def run_randmin(config: dict) -> Report:
    """Exact, relaxed and candidate-set minima on random HDMR instances."""
    axes = config["axes"]
    phis = [float(p) for p in config["phi"]]
    budget = config["budget"]
    reps = config["timing_repeats"]
    split = trmin.AxisSplit((), range(len(axes)))
    X = np.zeros((1, 0), dtype=np.int64)
    rows, timings = [], []
    for seed in config["seeds"]:
        model = random_model(axes, seed, config["first_order"])
        problem = trmin.assemble(model, split)
        cache, t_dec = _median_time(lambda: trmin.decompose(problem), reps)
        obj = problem.objective
        exact, t_exact = _median_time(lambda: trmin.exact_min_batch(model, split, X, budget=budget,
                                                                    objective=obj), reps)
        sol, t_relax = _median_time(lambda: trmin.relaxed_minimizer_batch(cache, problem, X), reps)
        p = float(exact.value[0])
        mean = float(obj.mean_over_decisions(X)[0])
        lower = float(sol.lower[0] + problem.parameter_part(X)[0])
        scale = mean - p
        t_phi = {}
        for phi in phis:
            res, t_phi[phi] = _median_time(
                lambda: trmin.approx_min_batch(model, split, cache, problem, X, phi,
                                               budget=budget, solution=sol), reps)
            upper = float(res.value[0])
            n_cand = int(res.evaluations[0])
            slack = 1e-10 * (1.0 + abs(p))
            ok = lower <= p + slack and p <= upper
            rows.append([seed, phi, p, mean, lower, upper, (lower - p) / scale, (upper - p) / scale,
                         n_cand, math.log(n_cand) if n_cand > 0 else float("-inf"),
                         int(exact.evaluations[0]), ok])
        timings.append({"seed": seed, "decompose_s": t_dec, "exact_scan_s": t_exact,
                        "relaxed_s": t_relax, "approx_s": {repr(k): v for k, v in t_phi.items()}})
    per_seed = Table(RANDMIN_COLUMNS, rows)
    summary = Table(["phi", "n", "mean_scaled_upper", "stderr_scaled_upper", "mean_scaled_lower",
                     "stderr_scaled_lower", "mean_log_n_candidates", "mean_n_candidates",
                     "evaluation_ratio"], [])
    for phi in phis:
        sel = [r for r in rows if r[1] == phi]
        up = _mean_stderr([r[7] for r in sel])
        lo = _mean_stderr([r[6] for r in sel])
        cand = [r[8] for r in sel]
        summary.rows.append([phi, len(sel), up[0], up[1], lo[0], lo[1],
                             float(np.mean([r[9] for r in sel])), float(np.mean(cand)),
                             float(np.mean([r[10] for r in sel])) / float(np.mean(cand))])
    meta = {"environment": _env(), "timing": {"method": f"wall clock, median of {reps}", "per_seed": timings},
            "decompositions_per_seed": 1, "scaled_error": "(value - exact) / (mean over Z - exact)",
            "log": "natural logarithm"}
    return Report("randmin", config, {"randmin_rows": per_seed, "randmin_summary": summary}, meta)


# ----------------------------------------------------------------- bandit

def _fit_line(x, y) -> dict:
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return {"method": "least-squares line (our choice)", "slope": float(slope), "intercept": float(intercept)}


def run_bandit(config: dict, return_tables: bool = False) -> Report:
    """Exact and HDMR policies of the bandit, simulated on shared plays."""
    cfg = game_config(config)
    dp = bandit.make_problem(cfg, budget=config["budget"])
    budget = config["budget"]
    t0 = time.perf_counter()
    exact_tables = adp.exact_backward(dp, budget=budget)
    t_exact = time.perf_counter() - t0
    draws = bandit.draw_plays(cfg)
    traces = config["output"].get("traces", False)
    policies = [("exact", None, adp.GreedyPolicy(exact_tables, "exact"))]
    storage = [["exact", None, sum(len(t.to_bytes()) for t in exact_tables)]]
    gaps = Table(["phi", "stage", "n_states", "mean_gap", "max_gap", "mean_scaled_gap", "frac_exact",
                  "mean_candidates"], [])
    offline_times, decomps, offline = {}, {}, {}
    split = adp.stage_split(dp)
    tau = cfg.horizon
    for phi in [float(p) for p in config["phi"]]:
        t0 = time.perf_counter()
        res = adp.offline_pass(dp, phi, budget=budget, keep_pi_bar=[tau - 1] if tau > 1 else [])
        offline_times[repr(phi)] = time.perf_counter() - t0
        decomps[repr(phi)] = {str(t): c for t, c in sorted(res.decompositions.items())}
        offline[phi] = res
        policies.append(("hdmr", phi, adp.GreedyPolicy(res.tables, f"phi={phi!r}")))
        storage.append(["hdmr", phi, sum(len(t.to_bytes()) for t in res.tables)])
        if tau > 1:
            states, pi_bar, evals = res.pi_bar[tau - 1]
            model = res.tables[tau - 1].model
            pi = trmin.exact_min_batch(model, split, states, budget=budget).value
            mean = trmin.SplitObjective(model, split).mean_over_decisions(states)
            gap = pi_bar - pi
            spread = mean - pi
            scaled = np.divide(gap, spread, out=np.zeros_like(gap), where=spread > 0)
            gaps.rows.append([phi, tau - 1, int(states.shape[0]), float(gap.mean()), float(gap.max()),
                              float(scaled.mean()), float(np.mean(gap == 0.0)), float(evals.mean())])
    payoffs = Table(["policy", "phi", "mean_payoff", "stderr", "n_plays"], [])
    trace_stats = {}
    for kind, phi, pol in policies:
        st = bandit.simulate(cfg, pol, draws=draws, traces=traces)
        payoffs.rows.append([kind, phi, st.mean, st.stderr, st.n])
        trace_stats[pol.name] = st
    hd = [r for r in payoffs.rows if r[0] == "hdmr"]
    fit = _fit_line([r[1] for r in hd], [r[2] for r in hd]) if len(hd) >= 2 else None
    exact_bytes = storage[0][2]
    storage_tab = Table(["tables", "phi", "bytes", "ratio_exact_to_this"],
                        [[k, p, b, exact_bytes / b] for k, p, b in storage])
    meta = {
        "environment": _env(),
        "protocol": {"payoff_matrix": "resampled per play, uniform [0,1], pinned arms fixed",
                     "random_numbers": "one stream per (seed, play); shared by all policies",
                     "encoding": "dense little-endian float64 for both table kinds"},
        "timing": {"method": "wall clock, single run", "exact_backward_s": t_exact,
                   "offline_pass_s": offline_times},
        "decompositions_per_stage": decomps,
        "reachable_states": {str(t): dp.reachable_count(t) for t in range(1, tau + 1)},
        "trend_fit": fit,
    }
    report = Report("bandit", config, {"bandit_payoffs": payoffs, "bandit_gaps": gaps,
                                       "bandit_storage": storage_tab}, meta)
    report.plays = trace_stats
    report.game = cfg
    if return_tables:
        report.exact_tables = exact_tables
        report.offline = offline
    return report


def write_bandit_extras(report: Report, out_dir) -> None:
    """Per-policy play traces and HDMR stage manifests, when requested."""
    from .persistence import save_stage_tables

    out = Path(out_dir)
    if report.config["output"].get("traces"):
        for name, st in report.plays.items():
            safe = name.replace("=", "_")
            st.write_traces(out / f"traces_{safe}.csv", report.game.arms)
    if report.config["output"].get("save_tables") and hasattr(report, "offline"):
        for phi, res in report.offline.items():
            save_stage_tables(res.tables, out / f"tables_phi_{phi!r}", phi)
