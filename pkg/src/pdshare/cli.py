"""Command-line entry point: simulate -> analyze -> regress / rollpoint."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import pipeline, regression
from .config import ConfigError, load_config
from .simulate import simulate_sample

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _parse_pairs(raw: str | None) -> tuple[int, ...] | None:
    if raw is None:
        return None
    try:
        pairs = tuple(int(p) for p in raw.split(","))
    except ValueError:
        raise ConfigError(f"bad --pairs value {raw!r}, expected e.g. 1,2") from None
    if not pairs or any(p < 1 for p in pairs):
        raise ConfigError("--pairs entries must be >= 1")
    return pairs


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    scenario = cfg.scenario
    if scenario is None:
        raise ConfigError("config has no [scenario] section")
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    out = Path(args.out) if args.out else cfg.output_dir
    manifest = simulate_sample(scenario, out)
    print(f"simulated {len(manifest['days'])} sessions into {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else cfg.output_dir
    daily = pipeline.run_analyze(cfg, out, _parse_pairs(args.pairs))
    kept = int(daily["category"].notna().sum())
    print(f"analyzed {len(daily)} pair-days ({kept} estimable) -> {out}")
    return EXIT_OK


def cmd_regress(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else cfg.output_dir
    daily_path = out / "daily_shares.csv"
    if not daily_path.exists():
        raise pipeline.AnalysisError(
            f"daily shares file not found: {daily_path} (run analyze first)")
    import pandas as pd
    daily = pd.read_csv(daily_path, parse_dates=["date"])
    events = cfg.event_calendar()

    results = {}
    for k in sorted(daily["pair_index"].unique()):
        sub = daily[daily["pair_index"] == k]
        design = regression.build_design(sub, cfg.template, events)
        results[f"pair-{k}"] = regression.estimate(design)

    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        payload = {k: regression.result_to_dict(v) for k, v in results.items()}
        (out / "regression.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        regression.report_frame(results).to_csv(out / "regression.csv", index=False)
    text = regression.report_table(results)
    (out / "regression.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_rollpoint(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else cfg.output_dir
    frame = pipeline.run_rollpoint(cfg, out / "daily_shares.csv", out)
    print(frame.to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdshare",
        description="Price-discovery shares between nearby and deferred "
                    "futures contracts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides config)")

    p = sub.add_parser("simulate", help="generate synthetic tick data")
    common(p)
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="daily classification and shares")
    common(p)
    p.add_argument("--pairs", help="comma-separated pair indices, e.g. 1,2")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("regress", help="determinant regressions with HAC errors")
    common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("rollpoint", help="volume and share roll dates per contract")
    common(p)
    p.set_defaults(func=cmd_rollpoint)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - single-line machine-parsable failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
