import csv
import json

import numpy as np

from hdmr_adp import config, experiments, persistence


def _rows(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_tiny_randmin_sandwich_and_reproducible(tmp_path):
    cfg = config.validate({"kind": "randmin", "axes": [5, 5, 5], "seeds": [0, 1], "timing_repeats": 1})
    a = experiments.run_randmin(cfg).write(tmp_path / "a")
    b = experiments.run_randmin(cfg).write(tmp_path / "b")
    for name in ("randmin_rows.csv", "randmin_summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = _rows(a / "randmin_rows.csv")
    assert len(rows) == 2 * 11
    assert all(r["sandwich_ok"] == "1" for r in rows)
    for r in rows:
        if r["phi"] == "0.0":
            assert float(r["p_upper"]) == float(r["p_exact"])
            assert r["n_candidates"] == "125"
    summary = _rows(a / "randmin_summary.csv")
    cand = [float(r["mean_n_candidates"]) for r in summary]
    assert all(x >= y for x, y in zip(cand, cand[1:]))


def test_single_round_bandit_policies_match_exact():
    cfg = config.validate({"kind": "bandit", "horizon": 1, "plays": 300, "phi": [0.0, 0.5, 1.0]})
    rep = experiments.run_bandit(cfg, return_tables=True)
    (exact,) = rep.exact_tables
    y = exact.index.states
    for res in rep.offline.values():
        np.testing.assert_array_equal(res.tables[0].greedy_batch(y), exact.greedy_batch(y))
    means = rep.tables["bandit_payoffs"].column("mean_payoff")
    assert all(m == means[0] for m in means)
    assert rep.meta["decompositions_per_stage"]["1.0"] == {"1": 0}
    assert rep.tables["bandit_gaps"].rows == []


def test_small_bandit_report(tmp_path):
    cfg = config.validate({"kind": "bandit", "arms": [2, 2], "horizon": 3, "plays": 200, "phi": [0.0, 1.0],
                           "prior": [], "output": {"traces": True, "save_tables": True}})
    rep = experiments.run_bandit(cfg, return_tables=True)
    out = rep.write(tmp_path)
    experiments.write_bandit_extras(rep, out)
    doc = json.loads((out / "report.json").read_text())
    assert doc["decompositions_per_stage"]["0.0"] == {"1": 1, "2": 1, "3": 0}
    assert doc["reachable_states"] == {"1": 1, "2": 8, "3": 36}
    storage = _rows(out / "bandit_storage.csv")
    assert storage[0]["tables"] == "exact" and float(storage[1]["ratio_exact_to_this"]) > 0
    gaps = _rows(out / "bandit_gaps.csv")
    assert gaps[0]["phi"] == "0.0" and float(gaps[0]["max_gap"]) == 0.0
    assert len(_rows(out / "traces_exact.csv")) == 200 * 3
    tables = persistence.load_stage_tables(out / "tables_phi_1.0" / "manifest.json")
    assert [t.t for t in tables] == [1, 2, 3]
    for a, b in zip(tables, rep.offline[1.0].tables):
        assert a.model.equals(b.model)
    pol = np.array(rep.tables["bandit_payoffs"].column("mean_payoff"))
    assert np.all((pol >= 0) & (pol <= 1))


def test_reports_match_shipped_schema(tmp_path):
    import jsonschema

    schema = config.schema("report")
    rm = experiments.run_randmin(config.validate({"kind": "randmin", "axes": [3, 4], "seeds": [0],
                                                  "timing_repeats": 1})).write(tmp_path / "r")
    bd = experiments.run_bandit(config.validate({"kind": "bandit", "arms": [2, 1], "horizon": 2, "plays": 10,
                                                 "phi": [1.0]})).write(tmp_path / "b")
    for out in (rm, bd):
        jsonschema.validate(json.loads((out / "report.json").read_text()), schema)


def test_docs_schemas_are_the_shipped_ones():
    from pathlib import Path

    docs = Path(__file__).resolve().parents[1] / "docs" / "schemas"
    for kind in ("randmin", "bandit", "report"):
        assert json.loads((docs / f"{kind}.schema.json").read_text()) == config.schema(kind)
