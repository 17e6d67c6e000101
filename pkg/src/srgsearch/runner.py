"""Freezing the precomputed artifacts, running shards of cases, and merging reports.

All artifacts and logs are line-oriented JSON written with sorted keys, so
re-freezing reproduces byte-identical files.  Checkpoints are a magic
header followed by a JSON body.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing as mp
import os
import queue
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .cubic import (
    EXPECTED_CONNECTED,
    EXPECTED_DISCONNECTED,
    EXPECTED_GOOD,
    EXPECTED_GOOD_CONNECTED,
    EXPECTED_TOTAL,
    LOCAL_ORDER,
    SMALL_ORDERS,
    CatalogueError,
    build_good_list,
    default_catalogue_dir,
    disconnected_cubic,
    generate_cubic,
    load_catalogue,
)
from .engine import CaseContext, CaseResult, Limits, run_case
from .extension import EXPECTED_DOWNS, build_downs
from .gluing import (
    EXPECTED_BIG_LEAVES,
    EXPECTED_PAIRS,
    EXPECTED_PAIRS_BY_TYPE,
    SegmentPair,
    build_big_tree,
    build_small_tree,
    enumerate_segment_pairs,
    pair_census,
)
from .graph import canonical_key, emit_graph6
from .layout import bits
from .segments import (
    EXPECTED_BY_TYPE,
    EXPECTED_QUADS,
    EXPECTED_SEGMENTS,
    EXPECTED_WORKING,
    Segment,
    build_segment_list,
    segment_census,
)

MANIFEST_VERSION = "srgsearch-manifest/1"
CHECKPOINT_MAGIC = b"SRGCKPT\x01"
TERMINAL = ("eliminated", "survivor-certificate")
ARTIFACTS = ("good_graphs.jsonl", "segments.jsonl", "manifest.jsonl", "downs.jsonl", "trees.jsonl")
EXPECTED_SMALL_LEAVES = {6: 720, 4: 24}


class CountMismatch(RuntimeError):
    """A reproduced count differs from its published value."""

    def __init__(self, count_name: str, message: str):
        super().__init__(f"count mismatch [{count_name}]: {message}")
        self.count_name = count_name


class CheckpointError(RuntimeError):
    pass


def data_dir(explicit: str | Path | None = None) -> Path:
    """Explicit argument, else $SRG_SEARCH_DATA, else ./srg-data."""
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("SRG_SEARCH_DATA", "srg-data"))


# -- line-oriented JSON --------------------------------------------------------


def dump_line(rec) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n"


def write_jsonl(path: Path, records) -> str:
    """Write records atomically; return the sha256 of the file."""
    data = "".join(dump_line(r) for r in records).encode()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
    return hashlib.sha256(data).hexdigest()


def read_jsonl(path: Path) -> list:
    """Read records, ignoring a torn last line left by a crash."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.endswith("\n"):
                break
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- count suite -----------------------------------------------------------------


@dataclass
class CountCheck:
    name: str
    expected: object
    got: object

    @property
    def ok(self) -> bool:
        return self.expected == self.got


@dataclass
class Reproduction:
    """Everything the count suite derives from a catalogue."""

    checks: list[CountCheck] = field(default_factory=list)
    goods: list = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    pairs: list[SegmentPair] = field(default_factory=list)
    downs: list[int] = field(default_factory=list)
    trees: list[dict] = field(default_factory=list)

    def check(self, name: str, expected, got, strict: bool) -> None:
        c = CountCheck(name, expected, got)
        self.checks.append(c)
        if strict and not c.ok:
            raise CountMismatch(name, f"expected {expected}, got {got}")


def _petersen_key() -> str:
    from .graph import Graph

    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return canonical_key(Graph.from_edges(10, outer + spokes + inner))


def reproduce_counts(catalogue: str | Path | None = None, strict: bool = True,
                     with_generator: bool = False) -> Reproduction:
    """Recompute every published count; with ``strict`` stop at the first mismatch."""
    rep = Reproduction()
    try:
        cat = load_catalogue(catalogue or default_catalogue_dir())
    except CatalogueError as exc:
        raise CountMismatch(exc.count_name, str(exc)) from exc
    n_conn = len(cat[LOCAL_ORDER])
    n_disc = len(disconnected_cubic({n: cat[n] for n in SMALL_ORDERS}))
    rep.check(f"{EXPECTED_CONNECTED} connected cubic graphs on 14 vertices "
              f"(of {EXPECTED_TOTAL} candidates)", EXPECTED_CONNECTED, n_conn, strict)
    rep.check(f"{EXPECTED_DISCONNECTED} disconnected cubic graphs on 14 vertices", EXPECTED_DISCONNECTED, n_disc, strict)
    rep.check(f"{EXPECTED_TOTAL} candidate cubic graphs", EXPECTED_TOTAL, n_conn + n_disc, strict)
    if with_generator:
        for n in SMALL_ORDERS:
            gen = sorted(canonical_key(g) for g in generate_cubic(n))
            ref = sorted(canonical_key(g) for g in cat[n])
            rep.check(f"generator agrees with catalogue for order {n}", len(ref), len(gen) if gen == ref else -1, strict)
    try:
        goods = build_good_list(cat, check_counts=False)
    except ValueError as exc:
        raise CountMismatch(f"{EXPECTED_GOOD} good graphs", str(exc)) from exc
    rep.goods = goods
    n_good_conn = sum(g.connected for g in goods)
    rep.check(f"{EXPECTED_GOOD} good graphs", EXPECTED_GOOD, len(goods), strict)
    rep.check(f"{EXPECTED_GOOD_CONNECTED} connected good graphs", EXPECTED_GOOD_CONNECTED, n_good_conn, strict)
    disc = [g for g in goods if not g.connected]
    k4_plus = 0
    petersen = 0
    pk = _petersen_key()
    for g in disc:
        comps = sorted(g.graph.components(), key=len)
        if [len(c) for c in comps] == [4, 10]:
            k4_plus += 1
            if canonical_key(g.graph.induced(sorted(comps[1]))) == pk:
                petersen += 1
    rep.check("3 disconnected good graphs, each K4 plus a 10-vertex component", 3, k4_plus, strict)
    rep.check("Petersen graph among the 10-vertex components", 1, petersen, strict)
    try:
        segments = build_segment_list(goods, check_counts=False)
    except ValueError as exc:
        raise CountMismatch(f"{EXPECTED_SEGMENTS} segments", str(exc)) from exc
    from .segments import all_segments

    census = segment_census(all_segments(goods))
    rep.check(f"{EXPECTED_SEGMENTS} segments", EXPECTED_SEGMENTS, census["distinct"], strict)
    for t, want in EXPECTED_BY_TYPE.items():
        rep.check(f"{want} segments of type {t}", want, census["by_type"].get(t, 0), strict)
    rep.check(f"{EXPECTED_WORKING} working segments", EXPECTED_WORKING, len(segments), strict)
    for q, want in EXPECTED_QUADS.items():
        rep.check(f"quad type {q}: {want} segments", want, census["quads"].get(q, 0), strict)
    rep.segments = segments
    pairs = enumerate_segment_pairs(segments)
    rep.check(f"{EXPECTED_PAIRS} segment pairs", EXPECTED_PAIRS, len(pairs), strict)
    pc = pair_census(pairs, segments)
    for t, want in EXPECTED_PAIRS_BY_TYPE.items():
        rep.check(f"{want} segment pairs of type {t[0]} x {t[1]}", want, pc.get(t, 0), strict)
    rep.pairs = pairs
    downs = build_downs()
    rep.check(f"{EXPECTED_DOWNS} downs", EXPECTED_DOWNS, len(downs), strict)
    rep.downs = downs
    for core, want in EXPECTED_SMALL_LEAVES.items():
        tree = build_small_tree(core)
        rep.trees.append({"kind": "small", "core": core, "nodes": len(tree), "leaves": tree.leaves(),
                          "digest": tree.digest()})
        rep.check(f"small tree leaves for core size {core}", want, tree.leaves(), strict)
    for quad in sorted(EXPECTED_QUADS, reverse=True):
        n, r, l, b = quad
        htype = (6 if l + b == 6 else 4, 6 if r + b == 6 else 4)
        tree = build_big_tree(quad)
        rep.trees.append({"kind": "big", "quad": list(quad), "handle_types": list(htype), "nodes": len(tree),
                          "leaves": tree.leaves(), "digest": tree.digest()})
        want = EXPECTED_BIG_LEAVES[htype]
        rep.check(f"big tree leaves for quad {quad} (type {htype})", want, tree.leaves(), strict)
    return rep


# -- freeze --------------------------------------------------------------------------


def freeze(out_dir: str | Path, catalogue: str | Path | None = None) -> dict[str, str]:
    """Write the frozen artifacts; return their sha256 digests.  Raises CountMismatch."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = reproduce_counts(catalogue, strict=True)
    digests = {}
    digests["good_graphs.jsonl"] = write_jsonl(out / "good_graphs.jsonl", (
        {"id": g.id, "g6": g.g6, "connected": g.connected, "favourite_edge": list(g.favourite_edge)}
        for g in rep.goods))
    digests["segments.jsonl"] = write_jsonl(out / "segments.jsonl", (s.to_record() for s in rep.segments))
    header = {
        "version": MANIFEST_VERSION,
        "package_version": __version__,
        "segments": "segments.jsonl",
        "segments_digest": digests["segments.jsonl"],
        "cases": len(rep.pairs),
    }
    digests["manifest.jsonl"] = write_jsonl(out / "manifest.jsonl", [header, *(p.to_record(rep.segments) for p in rep.pairs)])
    digests["downs.jsonl"] = write_jsonl(out / "downs.jsonl", ({"index": i, "d": bits(d)} for i, d in enumerate(rep.downs)))
    digests["trees.jsonl"] = write_jsonl(out / "trees.jsonl", rep.trees)
    return digests


@dataclass
class Frozen:
    segments: list[Segment]
    pairs: dict[int, SegmentPair]
    downs: list[int]
    header: dict


def load_frozen(manifest: str | Path) -> Frozen:
    manifest = Path(manifest)
    records = read_jsonl(manifest)
    if not records or records[0].get("version") != MANIFEST_VERSION:
        raise ValueError(f"{manifest} is not a {MANIFEST_VERSION} manifest")
    header = records[0]
    seg_path = manifest.parent / header["segments"]
    if file_digest(seg_path) != header["segments_digest"]:
        raise ValueError(f"{seg_path} does not match the digest stamped in the manifest")
    segments = [Segment.from_record(r) for r in read_jsonl(seg_path)]
    pairs = {r["case"]: SegmentPair(r["case"], r["sx"], r["sy"], r["gluing"]) for r in records[1:]}
    if sorted(pairs) != list(range(1, header["cases"] + 1)):
        raise ValueError("manifest case ids are not dense")
    downs_path = manifest.parent / "downs.jsonl"
    if downs_path.exists():
        downs = [sum(1 << p for p in r["d"]) for r in read_jsonl(downs_path)]
    else:
        downs = build_downs()
    return Frozen(segments, pairs, downs, header)


# -- checkpoints -----------------------------------------------------------------------


def write_checkpoint(path: Path, cp: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(CHECKPOINT_MAGIC + json.dumps(cp, sort_keys=True).encode())
    os.replace(tmp, path)


def read_checkpoint(path: Path) -> dict:
    raw = Path(path).read_bytes()
    if not raw.startswith(CHECKPOINT_MAGIC[:-1]):
        raise CheckpointError(f"{path} is not a checkpoint")
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path} has checkpoint format version {raw[len(CHECKPOINT_MAGIC) - 1]}, "
                              f"expected {CHECKPOINT_MAGIC[-1]}")
    return json.loads(raw[len(CHECKPOINT_MAGIC):])


# -- cases and reports -------------------------------------------------------------------------


def parse_range(text: str) -> list[int]:
    """'A..B' (inclusive), 'A' or a comma-separated mix of both."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            lo, hi = int(a), int(b)
            if lo > hi:
                raise ValueError(f"empty range {part}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    return out


def comparable(rec: dict) -> dict:
    """A report record without timing fields."""
    return {k: v for k, v in rec.items() if k not in ("wall_time", "session", "seq", "worker")}


@dataclass
class RunReport:
    records: dict[int, dict]
    requested: list[int]

    @property
    def complete(self) -> bool:
        return all(self.records.get(c, {}).get("outcome") in TERMINAL for c in self.requested)

    @property
    def outcomes(self) -> Counter:
        return Counter(r["outcome"] for r in self.records.values())

    def aggregate(self) -> dict:
        agg: Counter = Counter()
        for r in self.records.values():
            for k, v in r["counters"].items():
                if isinstance(v, int) and not k.endswith("_max") and k != "step2_max_depth":
                    agg[k] += v
        agg["step2_max_depth"] = max((r["counters"]["step2_max_depth"] for r in self.records.values()), default=0)
        agg["verts_max"] = max((r["counters"]["verts_max"] for r in self.records.values()), default=0)
        return dict(sorted(agg.items()))

    def elapsed(self) -> float:
        return round(sum(r.get("wall_time", 0.0) for r in self.records.values()), 3)

    def summary(self) -> dict:
        return {
            "summary": True,
            "cases": len(self.requested),
            "reported": len(self.records),
            "complete": self.complete,
            "outcomes": dict(sorted(self.outcomes.items())),
            "counters": self.aggregate(),
        }

    def lines(self) -> list[dict]:
        return [self.records[c] for c in sorted(self.records)] + [self.summary()]

    def write(self, path: Path) -> None:
        write_jsonl(Path(path), self.lines())

    def exit_code(self) -> int:
        if self.outcomes.get("survivor-certificate"):
            return 4
        if not self.complete:
            return 3
        return 0


def merge_logs(paths, requested: list[int] | None = None) -> RunReport:
    """Fold worker logs into one record per case; idempotent and order-independent."""
    best: dict[int, dict] = {}

    def rank(rec: dict) -> tuple:
        terminal = rec["outcome"] in TERMINAL
        # terminal beats budget-stop; among budget-stops the furthest progress wins
        return (terminal, rec["counters"].get("units", 0), -rec.get("session", 0), -rec.get("seq", 0))

    for p in paths:
        for rec in read_jsonl(Path(p)):
            if rec.get("summary"):
                continue
            c = rec["case"]
            if requested is not None and c not in requested:
                continue
            if c not in best or rank(rec) > rank(best[c]):
                best[c] = rec
    return RunReport(best, sorted(requested) if requested is not None else sorted(best))


# -- scheduling --------------------------------------------------------------------------------


@dataclass
class ShardPaths:
    root: Path

    @property
    def claims(self) -> Path:
        return self.root / "claims"

    @property
    def logs(self) -> Path:
        return self.root / "logs"

    @property
    def checkpoints(self) -> Path:
        return self.root / "checkpoints"

    def make(self) -> None:
        for d in (self.claims, self.logs, self.checkpoints):
            d.mkdir(parents=True, exist_ok=True)

    def checkpoint_for(self, case: int) -> Path:
        return self.checkpoints / f"case-{case}.ckpt"

    def claim_for(self, case: int) -> Path:
        return self.claims / f"case-{case}.claim"

    def log_files(self) -> list[Path]:
        return sorted(self.logs.glob("*.jsonl"))


def _append(path: Path, rec: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dump_line(rec))
        fh.flush()
        os.fsync(fh.fileno())


def _claim(paths: ShardPaths, case: int, worker: int, session: int) -> bool:
    try:
        fd = os.open(paths.claim_for(case), os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
    except FileExistsError:
        return False
    with os.fdopen(fd, "w") as fh:
        fh.write(json.dumps({"case": case, "worker": worker, "session": session}) + "\n")
    return True


class Worker:
    """Runs cases one at a time and appends one record per case to its own log."""

    def __init__(self, manifest: Path, root: Path, limits: Limits, session: int, worker: int):
        self.frozen = load_frozen(manifest)
        self.ctx = CaseContext(self.frozen.segments, self.frozen.downs)
        self.paths = ShardPaths(root)
        self.limits = limits
        self.session = session
        self.worker = worker
        self.log = self.paths.logs / f"session-{session:04d}-worker-{worker:03d}.jsonl"
        self.seq = 0

    def run_one(self, case: int) -> CaseResult:
        pair = self.frozen.pairs[case]
        cp_path = self.paths.checkpoint_for(case)
        cp = read_checkpoint(cp_path) if cp_path.exists() else None

        def persist(state: dict) -> None:
            write_checkpoint(cp_path, state)

        res = run_case(self.ctx, pair, self.limits, cp, persist)
        if res.outcome == "budget-stop":
            write_checkpoint(cp_path, res.checkpoint)
        rec = res.to_record()
        rec.update({"session": self.session, "seq": self.seq, "worker": self.worker})
        self.seq += 1
        _append(self.log, rec)
        if res.outcome in TERMINAL and cp_path.exists():
            cp_path.unlink()
        return res


def _worker_main(manifest, root, limits, session, worker, requests, replies) -> None:
    w = Worker(Path(manifest), Path(root), limits, session, worker)
    while True:
        requests.put(worker)
        batch = replies.get()
        if batch is None:
            return
        for case in batch:
            w.run_one(case)


def _next_session(paths: ShardPaths) -> int:
    sessions = [int(p.name.split("-")[1]) for p in paths.log_files() if p.name.startswith("session-")]
    return max(sessions, default=-1) + 1


def schedule(manifest: str | Path, cases: list[int], root: str | Path, limits: Limits | None = None,
             workers: int = 1, chunk: int = 1, log: str | Path | None = None) -> RunReport:
    """Run ``cases`` with dynamic hand-out of ``chunk``-sized ranges to worker processes.

    Cases that already have a terminal outcome in ``root`` are skipped;
    claims of unfinished cases from an interrupted session are released and
    their checkpoints resumed.
    """
    limits = limits or Limits()
    paths = ShardPaths(Path(root))
    paths.make()
    frozen_cases = set(load_frozen(manifest).pairs)
    missing = [c for c in cases if c not in frozen_cases]
    if missing:
        raise ValueError(f"cases not in the manifest: {missing[:5]}")
    for cp in paths.checkpoints.glob("*.ckpt"):
        read_checkpoint(cp)  # fail early on a foreign or outdated checkpoint
    done = {c for c, r in merge_logs(paths.log_files(), cases).records.items() if r["outcome"] in TERMINAL}
    todo = [c for c in cases if c not in done]
    for c in todo:
        paths.claim_for(c).unlink(missing_ok=True)
    session = _next_session(paths)
    batches = [todo[i:i + chunk] for i in range(0, len(todo), chunk)]
    if workers <= 1:
        w = Worker(Path(manifest), paths.root, limits, session, 0)
        for batch in batches:
            for c in batch:
                if _claim(paths, c, 0, session):
                    w.run_one(c)
    elif batches:
        ctx = mp.get_context("fork")
        requests = ctx.Queue()
        replies = [ctx.Queue() for _ in range(workers)]
        procs = [ctx.Process(target=_worker_main, args=(str(manifest), str(paths.root), limits, session, k,
                                                        requests, replies[k]), daemon=True)
                 for k in range(workers)]
        for p in procs:
            p.start()
        pending = list(batches)
        finished = 0
        while finished < workers:
            try:
                k = requests.get(timeout=1.0)
            except queue.Empty:
                if not any(p.is_alive() for p in procs):
                    break
                continue
            batch = None
            while pending and batch is None:
                cand = [c for c in pending.pop(0) if _claim(paths, c, k, session)]
                batch = cand or None
            replies[k].put(batch)
            if batch is None:
                finished += 1
        for p in procs:
            p.join()
        bad = [p.exitcode for p in procs if p.exitcode]
        if bad:
            raise RuntimeError(f"worker processes failed with exit codes {bad}")
    report = merge_logs(paths.log_files(), cases)
    if log is not None:
        report.write(Path(log))
    return report


def describe_good_graphs(goods) -> list[dict]:
    from .cubic import handle_types

    return [{"id": g.id, "g6": emit_graph6(g.graph), "connected": g.connected,
             "favourite_edge": list(g.favourite_edge),
             "favourite_type": list(handle_types(g.graph, *g.favourite_edge))} for g in goods]
