"""Command-line entry points: run, simulate, report and metrics."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sim
from .errors import ArenaError, ConfigInvalid, DataUnloadable
from .metrics import compute_errors
from .orchestrator import RunConfig, resume, run
from .prediction import read_forecasts_csv, write_forecasts_csv
from .report import write_report

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def _overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "seed": args.seed, "out": args.out, "prompt_variant": args.prompt_variant,
        "alpha": args.alpha, "agents": args.agents, "epochs": args.epochs, "rounds": args.rounds,
    }
    return {k: v for k, v in mapping.items() if v is not None}


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    return config.replace(**_overrides(args))


def _execute(config: RunConfig, resume_run: bool) -> int:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    ledger_path = out / "ledger.jsonl"
    result = resume(config, ledger_path) if resume_run else run(config, ledger_path)
    write_forecasts_csv(out / "forecasts.csv", result.test_forecasts, result.actuals)
    write_report(ledger_path, out / "report")
    survivors = ", ".join(str(a.id) for a in result.survivors)
    print(f"ledger: {ledger_path}")
    print(f"report: {out / 'report'}")
    print(f"survivors: {survivors}")
    end = next((r for r in reversed(result.ledger.records) if r["type"] == "run_end"), None)
    if end and "errors" in end:
        print(f"ensemble MAPE on {end['split']}: {end['errors']['ensemble']['mape']:.4%}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    return _execute(_load_config(args), args.resume)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args).replace(llm_backend="simulated", embed_backend="scripted", predictor="scripted")
    if not config.series_path or not config.news_path:
        series, news = sim.generate_dataset(Path(config.out) / "data", seed=config.seed,
                                            lookback_days=config.lookback_days)
        config = config.replace(series_path=str(series), news_path=str(news))
    return _execute(config, args.resume)


def cmd_report(args: argparse.Namespace) -> int:
    out = Path(args.out) if args.out else Path(args.ledger).parent / "report"
    for path in write_report(args.ledger, out).values():
        print(path)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    """Recompute errors per forecaster from a forecast CSV holding ``actual`` rows."""
    try:
        by_agent, actual = read_forecasts_csv(args.forecasts)
    except (OSError, KeyError, ValueError) as exc:
        raise DataUnloadable(f"cannot read forecasts: {exc}") from None
    if not actual:
        raise DataUnloadable("forecast file has no 'actual' rows")
    print("member,windows,mae,mse,rmse,mape")
    for member in sorted(by_agent, key=lambda m: (not m.isdigit(), int(m) if m.isdigit() else 0, m)):
        windows = sorted(w for w in by_agent[member] if w in actual)
        truth = [v for w in windows for v in actual[w]]
        pred = [v for w in windows for v in by_agent[member][w]]
        e = compute_errors(truth, pred)
        print(f"{member},{len(windows)},{e.mae!r},{e.mse!r},{e.rmse!r},{e.mape!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newsarena", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p: argparse.ArgumentParser, config_required: bool) -> None:
        p.add_argument("--config", required=config_required, help="TOML or JSON run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output folder for ledger, forecasts and report")
        p.add_argument("--prompt-variant", choices=("original", "paraphrased"))
        p.add_argument("--alpha", type=float, help="share of agents kept at each epoch end")
        p.add_argument("--agents", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--rounds", type=int, help="rounds per epoch")
        p.add_argument("--resume", action="store_true", help="continue from the last completed round")

    p = sub.add_parser("run", help="execute a run from a config file")
    run_flags(p, config_required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="run offline with the simulated model and synthetic data")
    run_flags(p, config_required=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="write CSV analytics from a ledger")
    p.add_argument("ledger")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("metrics", help="recompute MAE/MSE/RMSE/MAPE from a forecast CSV")
    p.add_argument("forecasts")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigInvalid, DataUnloadable) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArenaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
