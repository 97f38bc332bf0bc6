import json

import pytest

from hdmr_adp import cli, config, persistence
from hdmr_adp.errors import ConfigError
from hdmr_adp.experiments import random_model


def test_defaults_fill_in():
    cfg = config.validate({"kind": "randmin"})
    assert cfg["axes"] == [150, 150, 150] and cfg["seeds"] == list(range(20))
    assert cfg["phi"] == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    b = config.validate({"kind": "bandit", "output": {"traces": True}})
    assert b["output"] == {"dir": "results/bandit", "traces": True, "save_tables": False}
    assert b["horizon"] == 8 and b["plays"] == 20000


def test_one_based_arms_converted():
    cfg = config.validate({"kind": "bandit", "prior": [{"outcome": 1, "arm": [3, 2], "count": 2}],
                           "pinned": [{"arm": [2, 3], "p": 0.4}]})
    g = config.game_config(cfg)
    assert g.prior == ((1, (2, 1), 2),)
    assert g.pinned == (((1, 2), 0.4),)


@pytest.mark.parametrize("raw, where", [
    ({"kind": "bandit", "horizon": 0}, "horizon"),
    ({"kind": "bandit", "arms": [3, "x"]}, "arms/1"),
    ({"kind": "bandit", "pinned": [{"arm": [1, 1], "p": 1.5}]}, "pinned/0/p"),
    ({"kind": "randmin", "phi": [0.5, -0.1]}, "phi/1"),
    ({"kind": "randmin", "colour": "red"}, "<root>"),
    ({"kind": "bandit", "prior": [{"outcome": 0, "arm": [4, 1], "count": 1}]}, "outside"),
    ({"kind": "other"}, "kind"),
])
def test_validation_errors_name_the_field(raw, where):
    with pytest.raises(ConfigError, match=where):
        config.validate(raw)


def test_load_reports_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{ nope")
    with pytest.raises(ConfigError, match="not valid JSON"):
        config.load(p)
    with pytest.raises(ConfigError, match="not found"):
        config.load(tmp_path / "missing.json")


def _write(tmp_path, doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_cli_randmin_runs(tmp_path, capsys):
    cfg = _write(tmp_path, {"kind": "randmin", "axes": [4, 3, 5], "seeds": [0], "phi": [0.0, 1.0],
                            "timing_repeats": 1})
    assert cli.main(["randmin", "--config", cfg, "--out", str(tmp_path / "o"), "--seed", "5"]) == 0
    rows = (tmp_path / "o" / "randmin_rows.csv").read_text().splitlines()
    assert rows[1].startswith("5,0.0,")
    assert json.loads((tmp_path / "o" / "report.json").read_text())["config"]["seeds"] == [5]


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, {"kind": "randmin", "axes": [3, 0]})
    assert cli.main(["randmin", "--config", cfg]) == cli.EXIT_CONFIG
    assert "axes/1" in capsys.readouterr().err
    cfg = _write(tmp_path, {"kind": "bandit"})
    assert cli.main(["randmin", "--config", cfg]) == cli.EXIT_CONFIG


def test_cli_budget_refusal(tmp_path, capsys):
    cfg = _write(tmp_path, {"kind": "randmin", "axes": [30, 30, 30], "seeds": [0], "budget": 100,
                            "timing_repeats": 1})
    assert cli.main(["randmin", "--config", cfg, "--out", str(tmp_path / "o")]) == cli.EXIT_BUDGET
    assert "refused" in capsys.readouterr().err
    cfg = _write(tmp_path, {"kind": "bandit", "budget": 1000})
    assert cli.main(["bandit", "--config", cfg, "--out", str(tmp_path / "b")]) == cli.EXIT_BUDGET


def test_cli_model_inspect(tmp_path, capsys):
    persistence.save_model(random_model([3, 4], 0), tmp_path / "m.json")
    assert cli.main(["model", "inspect", str(tmp_path / "m.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["axis_sizes"] == [3, 4] and out["balanced"] and out["pairs"] == 1
    (tmp_path / "bad.json").write_text("{")
    assert cli.main(["model", "inspect", str(tmp_path / "bad.json")]) == cli.EXIT_FAIL
    assert cli.main(["model", "inspect", str(tmp_path / "none.json")]) == cli.EXIT_FAIL
