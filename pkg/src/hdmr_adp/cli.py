"""Command-line interface: ``hdmr-adp randmin|bandit|model inspect``.

Exit codes: 0 success, 1 other failure, 2 configuration error, 3 budget
refusal.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import config as config_mod
from .errors import BudgetExceededError, ConfigError, HdmrAdpError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdmr-adp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name, what in (("randmin", "random trust-region minimization experiment"),
                       ("bandit", "bandit dynamic programming experiment")):
        sp = sub.add_parser(name, help=what)
        sp.add_argument("--config", help="JSON config file (defaults reproduce the full experiment)")
        sp.add_argument("--seed", type=int, help="override the seed (randmin: shifts the seed list)")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
    mp = sub.add_parser("model", help="stored model utilities")
    msub = mp.add_subparsers(dest="action", required=True)
    ip = msub.add_parser("inspect", help="summarize a model file or stage manifest")
    ip.add_argument("path")
    return p


def _load(args, kind: str) -> dict:
    cfg = config_mod.load(args.config) if args.config else config_mod.validate({"kind": kind})
    if cfg["kind"] != kind:
        raise ConfigError(f"config is for {cfg['kind']!r}, not {kind!r}")
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if kind == "randmin":
            cfg["seeds"] = [args.seed + i for i in range(len(cfg["seeds"]))]
        else:
            cfg["seed"] = args.seed
    if args.out:
        cfg["output"]["dir"] = args.out
    return cfg


def _inspect(path) -> dict:
    from . import persistence

    with open(path, encoding="utf-8") as fh:
        head = fh.read(4096)
    if persistence.MANIFEST_FORMAT in head:
        tables = persistence.load_stage_tables(path)
        return {"kind": "stage manifest", "horizon": len(tables),
                "stages": [_summary(t.model) | {"t": t.t} for t in tables]}
    return {"kind": "model"} | _summary(persistence.load_model(path))


def _summary(model) -> dict:
    return {"axis_sizes": list(model.domain.axis_sizes), "g0": model.g0,
            "parameters": model.n_parameters(), "pairs": len(model.second_order),
            "balanced": model.is_balanced()}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "model":
            print(json.dumps(_inspect(args.path), indent=1))
            return EXIT_OK
        from . import experiments

        cfg = _load(args, args.command)
        if args.command == "randmin":
            report = experiments.run_randmin(cfg)
            out = report.write()
        else:
            report = experiments.run_bandit(cfg, return_tables=cfg["output"].get("save_tables", False))
            out = report.write()
            experiments.write_bandit_extras(report, out)
        print(f"wrote {out}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (HdmrAdpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
