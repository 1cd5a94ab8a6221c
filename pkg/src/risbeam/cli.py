"""Command-line entry point: `risbeam sweep` and `risbeam compare`."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ConfigError, load_config
from .harness import (
    SWEEP_NAMES,
    paired_comparison,
    paired_differences,
    run_sweep,
    write_results,
)


def _parse_values(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(float(tok) if "." in tok or "e" in tok.lower() else int(tok))
    return out


def _common_flags(sub):
    sub.add_argument("--config", required=True, help="YAML config file")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--seed-base", type=int, default=None, help="override config seed_base")
    sub.add_argument("--trials", type=int, default=None, help="override config trials")
    sub.add_argument("--threads", type=int, default=1, help="parallel trial workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risbeam")
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="Monte-Carlo sweep over one experiment axis")
    _common_flags(sweep)
    sweep.add_argument("--sweep", required=True, choices=SWEEP_NAMES, help="sweep variable")
    sweep.add_argument("--values", required=True, help="comma-separated sweep values")

    compare = subs.add_parser(
        "compare", help="paired algorithm x mode comparison on shared channels"
    )
    _common_flags(compare)
    return parser


def _load(args):
    cfg = load_config(args.config)
    if args.seed_base is not None:
        cfg = replace(cfg, seed_base=args.seed_base)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "sweep":
            values = _parse_values(args.values)
            if not values:
                raise ConfigError("--values must contain at least one value")
            result = run_sweep(cfg, args.sweep, values, threads=args.threads)
            path = write_results(result, args.out, name=f"sweep_{args.sweep}")
            for value in values:
                print(f"{args.sweep}={value}: mean WSR {result.mean_wsr(value):.6f} bits/s/Hz")
            print(f"wrote {path}")
        else:
            seeds = [cfg.seed_base + t for t in range(cfg.trials)]
            results = paired_comparison(cfg, seeds, threads=args.threads)
            for arm, result in results.items():
                name = f"compare_{arm[0]}_{arm[1]}"
                write_results(result, args.out, name=name)
                print(f"{arm[0]}/{arm[1]}: mean WSR {result.mean_wsr(result.values[0]):.6f}")
            for mode in ("whole", "subarray"):
                d = paired_differences(results, ("bcd", mode), ("wmmse_ls", mode))
                print(
                    f"paired mean difference bcd - wmmse_ls ({mode}): {d.mean():+.6f} "
                    f"(positive on {int((d > 0).sum())}/{len(d)} trials)"
                )
            for algorithm in ("wmmse_ls", "bcd"):
                d = paired_differences(
                    results, (algorithm, "subarray"), (algorithm, "whole")
                )
                print(
                    f"paired mean difference subarray - whole ({algorithm}): {d.mean():+.6f} "
                    f"(positive on {int((d > 0).sum())}/{len(d)} trials)"
                )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
