"""Command line entry point: ``volpriv {simulate,tradeoff,audit,lp-dump}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import BACKENDS, MECHANISM_NAMES, ConfigError, ExperimentConfig, load_config
from .experiments import lp_dump, run_bound_audit, run_timeseries, run_tradeoff, write_csv


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig keys")
    common.add_argument("--system", help="'preset' or path to a JSON system file")
    common.add_argument("--horizon", type=int)
    common.add_argument("--runs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--mechanism", choices=MECHANISM_NAMES)
    common.add_argument("--eps-x", type=float, nargs="+", dest="eps_x")
    common.add_argument("--backend", choices=BACKENDS)
    common.add_argument("--ccg-cap", type=int, dest="ccg_cap")
    common.add_argument("--output-dir", dest="output_dir")

    p = argparse.ArgumentParser(prog="volpriv", description="Set-based privacy filter experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="per-step time series CSV")
    sub.add_parser("tradeoff", parents=[common], help="privacy/utility sweep CSV")
    sub.add_parser("audit", parents=[common], help="bound-check residuals CSV and summary")
    lp = sub.add_parser("lp-dump", parents=[common], help="print one release LP as text")
    lp.add_argument("--step", type=int, default=1, help="time step of the LP (default 1)")
    lp.add_argument("--out", help="write the listing to this file instead of stdout")
    return p


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for key in ("system", "horizon", "runs", "seed", "mechanism", "eps_x", "backend",
                "ccg_cap", "output_dir"):
        val = getattr(args, key)
        if val is not None:
            setattr(cfg, key, val)
    return cfg.validate()


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2

    out = Path(cfg.output_dir)
    if args.command == "simulate":
        path = write_csv(run_timeseries(cfg), out / "timeseries.csv")
        print(f"wrote {path}")
    elif args.command == "tradeoff":
        path = write_csv(run_tradeoff(cfg), out / f"tradeoff_{cfg.backend}.csv")
        print(f"wrote {path}")
    elif args.command == "audit":
        table = run_bound_audit(cfg)
        path = write_csv(table, out / "audit.csv")
        print(f"wrote {path}")
        print(json.dumps(table.summary, indent=2, sort_keys=True))
        failures = sum(table.summary["violations"].values())
        if cfg.mechanism != "gaussian":
            failures += sum(table.summary["soundness_failures"].values())
        return 1 if failures else 0
    elif args.command == "lp-dump":
        text = lp_dump(cfg, step=args.step)
        if args.out:
            Path(args.out).write_text(text)
            print(f"wrote {args.out}")
        else:
            print(text, end="")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
