"""Per-case elimination: build T in Steps 1-2, then hand every complete T to Steps 3-4.

Work inside a case is split into units (Step-1 leaf, third segment,
orientation).  Resource limits are checked between units, so a checkpoint
is just the index of the next unit plus the counters so far.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass

from .extension import (
    ProjectionData,
    Step3Search,
    Step4Stats,
    build_downs,
    demand_matrix,
    filter_downs,
    step4_complete,
)
from .gluing import SegmentPair, Tree, build_big_tree, build_small_tree
from .layout import T_SIZE, sy_positions, sz_positions
from .ldlt import GramState
from .segments import Segment
from .srg import ADJ, NONADJ, ONE

CHECKPOINT_VERSION = 1
ORIENTATIONS = ((0, 0), (0, 1), (1, 0), (1, 1))
STEP1_SIZE = 22


class ContractViolation(RuntimeError):
    """An admitted triple breaks an assumption the search relies on."""


def filter_triples(segments: list[Segment], sx: int, sy: int, sz: int) -> bool:
    """Admit an ordered triple of segment ids for Step 2."""
    if not sx <= sy <= sz:
        return False
    a, b, c = segments[sx], segments[sy], segments[sz]
    if not (a.favourite or b.favourite or c.favourite):
        return False
    if c.first_is_edge != a.second_is_edge or c.second_is_edge != b.second_is_edge:
        return False
    if b.second_is_edge:
        raise ContractViolation(f"triple ({sx},{sy},{sz}) has X = S_y ^ S_z an edge")
    return True


def admissible_third(segments: list[Segment], sx: int, sy: int) -> list[int]:
    return [sz for sz in range(sy, len(segments)) if filter_triples(segments, sx, sy, sz)]


def gram_row(mask: int, p: int) -> list:
    """Dot products of vertex p with vertices 0..p given its neighbour mask."""
    row = [ADJ if mask >> i & 1 else NONADJ for i in range(p)]
    row.append(ONE)
    return row


def _place(seg: Segment, positions: list[int], adj: list[int]) -> None:
    for a, b in seg.graph.edges():
        pa, pb = positions[a], positions[b]
        adj[pa] |= 1 << pb
        adj[pb] |= 1 << pa


def check_cross_matchings(adj: list[int], sx: Segment, sy: Segment, sz: Segment,
                          gluing: int, orient: tuple[int, int]) -> None:
    """Edges of T between different segments form perfect matchings of the designated cores."""
    ymap = sy_positions(gluing)
    zmap = sz_positions(*orient)
    members = [set(range(12)), set(ymap), set(zmap)]
    cores = {
        (0, 1): ({p for p in sx.core(1)}, {ymap[v] for v in sy.core(1)}),
        (0, 2): ({p for p in sx.core(2)}, {zmap[v] for v in sz.core(1)}),
        (1, 2): ({ymap[v] for v in sy.core(2)}, {zmap[v] for v in sz.core(2)}),
    }
    seen = {k: [] for k in cores}
    for i in range(T_SIZE):
        for j in range(i + 1, T_SIZE):
            if not adj[i] >> j & 1:
                continue
            if any(i in m and j in m for m in members):
                continue
            si = [k for k, m in enumerate(members) if i in m]
            sj = [k for k, m in enumerate(members) if j in m]
            if len(si) != 1 or len(sj) != 1:
                raise AssertionError(f"cross edge {i}-{j} touches a handle")
            key = tuple(sorted((si[0], sj[0])))
            a, b = (i, j) if si[0] < sj[0] else (j, i)
            seen[key].append((a, b))
    for key, (ca, cb) in cores.items():
        edges = seen[key]
        left = [a for a, _ in edges]
        right = [b for _, b in edges]
        if sorted(left) != sorted(ca) or sorted(right) != sorted(cb):
            raise AssertionError(f"cross edges between segments {key} are not a perfect matching of the cores")


@dataclass
class Limits:
    max_nodes: int | None = None  # tree nodes + recursor calls + branches, per invocation
    max_seconds: float | None = None
    persist_units: int | None = None  # write a checkpoint every so many units
    persist_seconds: float | None = None


@dataclass
class CaseResult:
    case_id: int
    outcome: str  # eliminated | survivor-certificate | budget-stop
    counters: dict
    wall_time: float = 0.0
    checkpoint: dict | None = None
    certificate: dict | None = None

    def to_record(self) -> dict:
        rec = {"case": self.case_id, "outcome": self.outcome, "counters": self.counters,
               "wall_time": round(self.wall_time, 3)}
        if self.certificate is not None:
            rec["certificate"] = self.certificate
        return rec


def new_counters() -> dict:
    return {
        "step1_nodes": 0,
        "step1_leaves": 0,
        "step1_rejects": 0,
        "triples": 0,
        "units": 0,
        "step2_nodes": 0,
        "step2_accepts": 0,
        "step2_max_depth": 0,
        "step2_reject_levels": [0] * 8,
        "t_negative_demand": 0,
        "verts_total": 0,
        "verts_max": 0,
        "step3_calls": 0,
        "step3_exact_sets": 0,
        "step4_branches": 0,
        "step4_resolved": 0,
        "step4_not_good": 0,
        "step4_minor_kills": 0,
        "step4_rank_kills": 0,
        "certificates": 0,
        "trace": "",
    }


class CaseContext:
    """Immutable data shared by all cases: segments, downs and trees."""

    def __init__(self, segments: list[Segment], downs: list[int] | None = None):
        self.segments = segments
        self.downs = downs if downs is not None else build_downs()
        self._third: dict[tuple[int, int], list[int]] = {}

    def third_segments(self, sx: int, sy: int) -> list[int]:
        key = (sx, sy)
        if key not in self._third:
            self._third[key] = admissible_third(self.segments, sx, sy)
        return self._third[key]


class CaseRun:
    """Mutable state of one case: the Gram state, T adjacency and counters."""

    def __init__(self, ctx: CaseContext, pair: SegmentPair, limits: Limits | None = None,
                 checkpoint: dict | None = None, on_complete_t=None, persist=None, deep: bool = True):
        self.ctx = ctx
        self.deep = deep  # False stops after Step 2
        self.pair = pair
        self.limits = limits or Limits()
        self.sx = ctx.segments[pair.sx_id]
        self.sy = ctx.segments[pair.sy_id]
        self.ymap = sy_positions(pair.gluing)
        self.state = GramState()
        self.on_complete_t = on_complete_t
        self.persist = persist
        self.counters = new_counters()
        self.start_unit = (0, 0, 0)
        if checkpoint is not None:
            self._restore(checkpoint)
        self.work = 0
        self.t0 = time.monotonic()
        self.certificate: dict | None = None
        # T adjacency of S_x and S_y before any matching edges
        self.base = [0] * T_SIZE
        _place(self.sx, list(range(12)), self.base)
        _place(self.sy, self.ymap, self.base)

    def _restore(self, cp: dict) -> None:
        if cp.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"checkpoint version {cp.get('version')} is not {CHECKPOINT_VERSION}")
        if cp.get("case") != self.pair.case_id:
            raise ValueError("checkpoint belongs to another case")
        self.counters = dict(cp["counters"])
        self.counters["step2_reject_levels"] = list(self.counters["step2_reject_levels"])
        self.start_unit = tuple(cp["next_unit"])

    # -- Step 1 ------------------------------------------------------------

    def step1_leaves(self) -> list[list[int]]:
        """Accepted Step-1 matchings, each as the list of S_x partners (T positions)."""
        c = len(self.sx.core(1))
        cx = self.sx.core(1)
        cy = [self.ymap[v] for v in self.sy.core(1)]
        fixed = STEP1_SIZE - c
        st = self.state
        st.truncate(0)
        for p in range(fixed):
            if not st.add_one(gram_row(self.base[p] & ((1 << p) - 1), p)):
                raise AssertionError("a single segment pair prefix is not PSD")
        tree = build_small_tree(c)
        leaves: list[list[int]] = []
        chosen: list[int] = []
        counters = {"nodes": 0, "leaves": 0, "rejects": 0}

        def rec(node: int) -> None:
            while node:
                counters["nodes"] += 1
                level = tree.level[node]
                p = cy[level - 1]
                partner = cx[tree.left[node] - 1]
                mask = (self.base[p] & ((1 << p) - 1)) | (1 << partner)
                if st.add_one(gram_row(mask, p)):
                    chosen.append(partner)
                    if level == c:
                        counters["leaves"] += 1
                        leaves.append(list(chosen))
                    else:
                        rec(tree.son[node])
                    chosen.pop()
                    st.pop()
                else:
                    counters["rejects"] += 1
                node = tree.bro[node]

        rec(tree.root)
        self._step1 = counters
        return leaves

    def _load_leaf(self, partners: list[int]) -> list[int]:
        """Put the Step-1 leaf into the Gram state; return T adjacency of the 22 vertices."""
        c = len(partners)
        cy = [self.ymap[v] for v in self.sy.core(1)]
        adj = list(self.base)
        for a, b in zip(cy, partners):
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        st = self.state
        fixed = STEP1_SIZE - c
        st.truncate(fixed)
        for p in cy:
            if not st.add_one(gram_row(adj[p] & ((1 << p) - 1), p)):
                raise AssertionError("stored Step-1 leaf no longer accepted")
        return adj

    def run_unit(self, partners: list[int], sz_id: int, orient: tuple[int, int]) -> None:
        """Explore one work unit outside the driver loop (sampling and diagnostics)."""
        self._unit(self._load_leaf(partners), sz_id, orient)

    # -- Step 2 ------------------------------------------------------------

    def _unit(self, adj22: list[int], sz_id: int, orient: tuple[int, int]) -> None:
        sz = self.ctx.segments[sz_id]
        zmap = sz_positions(*orient)
        adj = list(adj22)
        _place(sz, zmap, adj)
        lcore = self.sx.core(2)
        rcore = [self.ymap[v] for v in self.sy.core(2)]
        tree: Tree = build_big_tree(sz.quad.as_tuple())
        bases = []
        for k in range(1, 9):
            p = 21 + k
            bases.append(gram_row(adj[p] & ((1 << p) - 1), p))
        st = self.state
        cnt = self.counters
        levels = cnt["step2_reject_levels"]
        picks: list[tuple[int, int]] = []

        def rec(node: int) -> bool:
            while node:
                cnt["step2_nodes"] += 1
                self.work += 1
                level = tree.level[node]
                row = list(bases[level - 1])
                lp = lcore[tree.left[node] - 1] if tree.left[node] else -1
                rp = rcore[tree.right[node] - 1] if tree.right[node] else -1
                if lp >= 0:
                    row[lp] = ADJ
                if rp >= 0:
                    row[rp] = ADJ
                if st.add_one(row):
                    if level > cnt["step2_max_depth"]:
                        cnt["step2_max_depth"] = level
                    picks.append((lp, rp))
                    if level == 8:
                        cnt["step2_accepts"] += 1
                        full = list(adj)
                        for k, (a, b) in enumerate(picks):
                            p = 22 + k
                            for q in (a, b):
                                if q >= 0:
                                    full[p] |= 1 << q
                                    full[q] |= 1 << p
                        check_cross_matchings(full, self.sx, self.sy, sz, self.pair.gluing, orient)
                        stop = self._complete_t(full)
                    else:
                        stop = rec(tree.son[node])
                    picks.pop()
                    st.pop()
                    if stop:
                        return True
                else:
                    levels[level - 1] += 1
                node = tree.bro[node]
            return False

        rec(tree.root)

    # -- Steps 3 and 4 -----------------------------------------------------

    def _complete_t(self, adj: list[int]) -> bool:
        """Run Steps 3-4 on a complete T; True if a certificate was produced."""
        if self.on_complete_t is not None:
            self.on_complete_t(adj, self.state)
        if not self.deep:
            return False
        cnt = self.counters
        demand = demand_matrix(adj)
        if demand is None:
            cnt["t_negative_demand"] += 1
            return False
        proj = ProjectionData.from_state(self.state)
        verts = filter_downs(adj, demand, proj, self.ctx.downs)
        cnt["verts_total"] += len(verts)
        cnt["verts_max"] = max(cnt["verts_max"], len(verts))
        if not verts:
            return False
        rank_M = self.state.rank()
        s4 = Step4Stats()

        def on_exact(chosen: list[int]) -> None:
            if self.certificate is not None:
                return
            cert = step4_complete(adj, rank_M, [verts[a] for a in chosen], s4)
            if cert is not None:
                cert.further = chosen
                self.certificate = {
                    "case": self.pair.case_id,
                    "t_adjacency": adj,
                    **cert.to_record(verts),
                }

        search = Step3Search(verts, demand, on_exact)
        search.run()
        cnt["step3_calls"] += search.stats.calls
        cnt["step3_exact_sets"] += search.stats.exact_sets
        cnt["step4_branches"] += s4.branches
        cnt["step4_resolved"] += s4.resolved
        cnt["step4_not_good"] += s4.not_good
        cnt["step4_minor_kills"] += s4.minor_kills
        cnt["step4_rank_kills"] += s4.rank_kills
        self.work += search.stats.calls + s4.branches
        if self.certificate is not None:
            cnt["certificates"] += 1
            return True
        return False

    # -- driver ------------------------------------------------------------

    def _over_budget(self) -> bool:
        lim = self.limits
        if lim.max_nodes is not None and self.work >= lim.max_nodes:
            return True
        if lim.max_seconds is not None and time.monotonic() - self.t0 >= lim.max_seconds:
            return True
        return False

    def _trace(self, unit: tuple[int, int, int]) -> None:
        c = self.counters
        rec = json.dumps([c["trace"], list(unit), c["step2_nodes"], c["step2_accepts"], c["step3_exact_sets"]])
        c["trace"] = hashlib.sha256(rec.encode()).hexdigest()[:16]

    def run(self) -> CaseResult:
        sx_id, sy_id = self.pair.sx_id, self.pair.sy_id
        leaves = self.step1_leaves()
        cnt = self.counters
        # Step 1 is cheap and deterministic, so it is redone rather than checkpointed
        cnt["step1_nodes"] = self._step1["nodes"]
        cnt["step1_leaves"] = self._step1["leaves"]
        cnt["step1_rejects"] = self._step1["rejects"]
        thirds = self.ctx.third_segments(sx_id, sy_id)
        cnt["triples"] = len(thirds)
        units = [(li, si, oi) for li in range(len(leaves)) for si in range(len(thirds)) for oi in range(4)]
        start = self.start_unit
        loaded = -1
        adj22: list[int] = []
        done_here = 0
        last_persist = time.monotonic()
        for k, unit in enumerate(units):
            if unit < start:
                continue
            # every invocation makes progress, however small the budget
            if done_here and self._over_budget():
                return self._stop(unit)
            li, si, oi = unit
            if li != loaded:
                adj22 = self._load_leaf(leaves[li])
                loaded = li
            self._unit(adj22, thirds[si], ORIENTATIONS[oi])
            cnt["units"] += 1
            done_here += 1
            self._trace(unit)
            if self.certificate is not None:
                return CaseResult(self.pair.case_id, "survivor-certificate", dict(cnt),
                                  time.monotonic() - self.t0, None, self.certificate)
            if self.persist is not None and k + 1 < len(units):
                lim = self.limits
                due = (lim.persist_units is not None and done_here % lim.persist_units == 0) or (
                    lim.persist_seconds is not None and time.monotonic() - last_persist >= lim.persist_seconds)
                if due:
                    self.persist(self.checkpoint(units[k + 1]))
                    last_persist = time.monotonic()
        return CaseResult(self.pair.case_id, "eliminated", dict(cnt), time.monotonic() - self.t0)

    def checkpoint(self, next_unit: tuple[int, int, int]) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "case": self.pair.case_id,
            "next_unit": list(next_unit),
            "counters": json.loads(json.dumps(self.counters)),
        }

    def _stop(self, unit: tuple[int, int, int]) -> CaseResult:
        return CaseResult(self.pair.case_id, "budget-stop", dict(self.counters),
                          time.monotonic() - self.t0, self.checkpoint(unit))


def run_case(ctx: CaseContext, pair: SegmentPair, limits: Limits | None = None,
             checkpoint: dict | None = None, persist=None) -> CaseResult:
    return CaseRun(ctx, pair, limits, checkpoint, persist=persist).run()
