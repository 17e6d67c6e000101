"""Command line entry point: ``srg-search <command>``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import Limits
from .runner import (
    CheckpointError,
    CountMismatch,
    describe_good_graphs,
    data_dir,
    freeze,
    load_frozen,
    merge_logs,
    parse_range,
    reproduce_counts,
    schedule,
)

EXIT_OK = 0
EXIT_COUNT_MISMATCH = 2
EXIT_BUDGET_STOP = 3
EXIT_SURVIVOR = 4


def _print_json(rec) -> None:
    print(json.dumps(rec, sort_keys=True))


def _frozen_dir(args) -> Path:
    return data_dir(args.data) / "frozen"


def _catalogue(args) -> Path | None:
    if getattr(args, "catalogue", None):
        return Path(args.catalogue)
    cand = data_dir(args.data) / "catalogue"
    return cand if cand.is_dir() else None


def cmd_good_graphs(args) -> int:
    rep = reproduce_counts(_catalogue(args), strict=True)
    for rec in describe_good_graphs(rep.goods):
        _print_json(rec)
    return EXIT_OK


def cmd_segments(args) -> int:
    rep = reproduce_counts(_catalogue(args), strict=True)
    if args.list:
        for s in rep.segments:
            _print_json({k: v for k, v in s.to_record().items() if k != "adj"})
    for c in rep.checks:
        if "segment" in c.name and "pairs" not in c.name or c.name.startswith("quad"):
            print(f"{c.name}: {c.got}")
    return EXIT_OK


def cmd_cases(args) -> int:
    manifest = Path(args.manifest) if args.manifest else _frozen_dir(args) / "manifest.jsonl"
    if manifest.exists():
        fr = load_frozen(manifest)
        pairs, segments = fr.pairs, fr.segments
    else:
        rep = reproduce_counts(_catalogue(args), strict=True)
        pairs, segments = {p.case_id: p for p in rep.pairs}, rep.segments
    if args.cases:
        for c in parse_range(args.cases):
            _print_json(pairs[c].to_record(segments))
        return EXIT_OK
    from collections import Counter

    census = Counter(p.pair_type(segments) for p in pairs.values())
    print(f"segment pairs: {len(pairs)}")
    for t, n in sorted(census.items(), reverse=True):
        print(f"  {t[0]} x {t[1]}: {n}")
    return EXIT_OK


def cmd_downs(args) -> int:
    from .extension import build_downs
    from .layout import bits

    downs = build_downs()
    if args.list:
        for i, d in enumerate(downs):
            _print_json({"index": i, "d": bits(d)})
    print(f"downs: {len(downs)}")
    return EXIT_OK


def cmd_freeze(args) -> int:
    out = Path(args.out) if args.out else _frozen_dir(args)
    try:
        digests = freeze(out, _catalogue(args))
    except CountMismatch as exc:
        print(f"freeze failed: {exc}", file=sys.stderr)
        return EXIT_COUNT_MISMATCH
    for name, digest in sorted(digests.items()):
        print(f"{digest}  {out / name}")
    return EXIT_OK


def cmd_run(args) -> int:
    manifest = Path(args.manifest) if args.manifest else _frozen_dir(args) / "manifest.jsonl"
    if not manifest.exists():
        print(f"no manifest at {manifest}; run 'srg-search freeze' first", file=sys.stderr)
        return 1
    limits = Limits(max_nodes=args.budget_nodes, max_seconds=args.budget_seconds,
                    persist_units=args.checkpoint_units, persist_seconds=args.checkpoint_seconds)
    root = Path(args.checkpoint) if args.checkpoint else data_dir(args.data) / "runs" / "default"
    try:
        report = schedule(manifest, parse_range(args.cases), root, limits, workers=args.workers,
                          chunk=args.chunk, log=args.log)
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return 1
    _print_json(report.summary())
    return report.exit_code()


def cmd_report(args) -> int:
    paths: list[Path] = []
    for item in args.logs:
        p = Path(item)
        paths.extend(sorted(p.glob("**/*.jsonl")) if p.is_dir() else [p])
    requested = parse_range(args.cases) if args.cases else None
    report = merge_logs(paths, requested)
    if args.out:
        report.write(Path(args.out))
    _print_json(report.summary())
    return report.exit_code()


def cmd_verify_counts(args) -> int:
    try:
        rep = reproduce_counts(_catalogue(args), strict=False, with_generator=not args.skip_generator)
    except CountMismatch as exc:
        print(f"FAIL  {exc.count_name}: {exc}")
        return EXIT_COUNT_MISMATCH
    width = max(len(c.name) for c in rep.checks)
    for c in rep.checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name:<{width}}  expected {c.expected}  got {c.got}")
    failed = sum(not c.ok for c in rep.checks)
    print(f"{len(rep.checks) - failed}/{len(rep.checks)} counts reproduced")
    return EXIT_OK if not failed else EXIT_COUNT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srg-search", description=__doc__)
    ap.add_argument("--data", help="data directory (default: $SRG_SEARCH_DATA or ./srg-data)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("good-graphs", help="list the 39 good cubic graphs and their favourite edges")
    p.add_argument("--catalogue", help="directory holding cubic_N.g6 files")
    p.set_defaults(func=cmd_good_graphs)

    p = sub.add_parser("segments", help="segment census, optionally the full list")
    p.add_argument("--catalogue")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_segments)

    p = sub.add_parser("cases", help="segment-pair census or selected manifest records")
    p.add_argument("--catalogue")
    p.add_argument("--manifest")
    p.add_argument("--cases", help="e.g. 1..20 or 5,9,100..110")
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("downs", help="possible neighbour sets in T of an extra neighbour of t")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_downs)

    p = sub.add_parser("freeze", help="write segments, manifest, downs and trees")
    p.add_argument("--catalogue")
    p.add_argument("--out", help="output directory (default: DATA/frozen)")
    p.set_defaults(func=cmd_freeze)

    p = sub.add_parser("run", help="run a shard of cases")
    p.add_argument("--manifest")
    p.add_argument("--cases", required=True)
    p.add_argument("--checkpoint", help="directory for claims, logs and checkpoints")
    p.add_argument("--budget-nodes", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--checkpoint-units", type=int, default=None, help="persist progress every N units")
    p.add_argument("--checkpoint-seconds", type=float, default=60.0, help="persist progress every S seconds")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--chunk", type=int, default=1, help="cases handed out per request")
    p.add_argument("--log", help="merged report file (JSON lines)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="merge worker logs into one report")
    p.add_argument("logs", nargs="+", help="log files or directories")
    p.add_argument("--cases")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-counts", help="reproduce every published count")
    p.add_argument("--catalogue")
    p.add_argument("--skip-generator", action="store_true", help="skip the small-order generator cross-check")
    p.set_defaults(func=cmd_verify_counts)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CountMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNT_MISMATCH
    except BrokenPipeError:
        # output piped into head and the like
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
