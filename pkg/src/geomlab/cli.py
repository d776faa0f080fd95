"""Command line entry point: ``geomlab <scenario> --config <file.json>``."""

from __future__ import annotations

import argparse
import sys

from .scenarios import FORMATS, SCENARIOS, ScenarioError, emit_report, load_config, run_scenario


def _formats(text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown formats {bad}; valid: {', '.join(FORMATS)}")
    return items


def _seed(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geomlab", description="Run a geometry verification scenario.")
    ap.add_argument("scenario", help=f"one of: {', '.join(SCENARIOS)}")
    ap.add_argument("--config", required=True, help="scenario configuration (JSON)")
    ap.add_argument("--out", default="geomlab-out", help="output directory")
    ap.add_argument("--seed", type=_seed, default=None, help="unsigned 64-bit seed")
    ap.add_argument("--formats", type=_formats, default=["json"], help="comma list of json,csv,svg")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.scenario not in SCENARIOS:
        print(f"geomlab: unknown scenario {args.scenario!r}; valid scenarios: {', '.join(SCENARIOS)}",
              file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        report = run_scenario(cfg, args.scenario, args.seed)
        paths = emit_report(report, args.formats, args.out)
    except ScenarioError as err:
        print(f"geomlab: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"geomlab: I/O failure: {err}", file=sys.stderr)
        return 2
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value!r} {c.op} {c.threshold!r}")
    for path in paths:
        print(f"wrote {path}")
    print(f"wall time {report.wall_time:.2f} s")
    if not report.passed:
        print("failing checks: " + "; ".join(report.failing()), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
