"""Command-line entry point: ``alphaeta run|preset|list-presets|validate``."""

import argparse
import sys
import time

from . import harness
from .errors import AlphaEtaError, ConfigError
from .presets import PRESETS, get_preset


def _common(p):
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--trials", type=int, help="primary Monte-Carlo count (overrides the config)")
    p.add_argument("--output", help=f"report path (default: stdout, or ${harness.OUTPUT_DIR_ENV})")
    p.add_argument("--format", choices=("json", "csv"), help="report format")
    p.add_argument("--quiet", action="store_true", help="no progress on stderr")


def build_parser():
    parser = argparse.ArgumentParser(prog="alphaeta", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config (TOML)")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name")
    _common(p)
    sub.add_parser("list-presets", help="print preset names")
    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    return parser


def _apply_overrides(raw: dict, args) -> dict:
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.trials is not None:
        raw["trials"] = args.trials
    out = raw.setdefault("output", {})
    if args.output:
        out["path"] = args.output
    if args.format:
        out["format"] = args.format
    return raw


def _execute(raw: dict, args) -> int:
    cfg = harness.parse_config(_apply_overrides(raw, args))
    log = (lambda *a: None) if args.quiet else (lambda *a: print(*a, file=sys.stderr))
    log(f"running {cfg.scenario} (seed {cfg.seed}, trials {cfg.trials})")
    t0 = time.perf_counter()
    report = harness.run(cfg)
    log(f"done in {time.perf_counter() - t0:.2f}s")
    for w in report.warnings:
        log(f"warning: {w}")
    path = harness.resolve_output_path(cfg)
    if path is None:
        sys.stdout.write(report.to_csv() if cfg.output_format == "csv" else report.to_json())
    else:
        log(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name in PRESETS:
                print(name)
            return 0
        if args.command == "validate":
            cfg = harness.load_config(args.config)
            print(f"ok: {cfg.scenario}")
            return 0
        if args.command == "preset":
            try:
                raw = get_preset(args.name)
            except KeyError as e:
                print(f"error: {e.args[0]}", file=sys.stderr)
                return 1
            return _execute(raw, args)
        with open(args.config, "rb") as fh:
            raw = harness.tomllib.load(fh)
        return _execute(raw, args)
    except ConfigError as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return 1
    except (AlphaEtaError, OSError, harness.tomllib.TOMLDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
