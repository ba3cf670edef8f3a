"""Incremental Kemeny estimation under edge insertions and deletions.

A sample store holds the sampled trees behind an estimate and keeps the
estimate current as the graph changes, without redrawing everything.
Two maintenance strategies are provided:

* basic ("bsm"): replace just enough samples with fresh draws — on
  insertion, a resistance-sized batch redrawn conditioned on the new
  edge; on deletion, exactly the trees that contain the removed edge.
  Weights stay uniform.
* in-place ("ism"): transform existing trees by local edge surgery
  instead of redrawing, compensating with importance weights that are
  renormalized per group. No random walks at all.

Redrawn and transformed trees get their contribution evaluated on the
updated graph; untouched trees deliberately keep their stored value.
An update does shift every tree's exact contribution slightly (two
degrees and the total volume change), but skipping that refresh is what
makes updates cheap, the drift stays far below the estimator's own
sampling noise, and replacement churn plus reference-tree rebuilds keep
flushing it. test_acceptance tracks the end-to-end error over long
update sequences.

Stores serialize to a binary index (magic KFI1) holding the reference
tree and every sample with its integer contribution and weight.
"""

from __future__ import annotations

import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import MASK64, ROLE_GEN, ROLE_MAINTAIN, ROLE_SAMPLE, SplitMix64
from .errors import (ConnectivityError, CorruptIndexError, InputError,
                     ParseError)
from .estimator import (EstimateConfig, _resolve_threads, check_value_capacity,
                        contribution, plan_sample_size, reference_tree,
                        resolve_method, resolve_root, sample_batch)
from .exact import effective_resistance_iterative
from .graph import Graph, bridge_edges, eccentricity_from, is_connected
from .spanning import (RootedTree, bfs_tree, count_cut_crossings, cut_link,
                       link_cut, wilson_tree, wilson_tree_with_edge)

INDEX_MAGIC = b"KFI1"
INDEX_VERSION = 1
_HEADER = struct.Struct("<4sIQQQQQ")

# resistance solves that only size replacement batches can be looser
# than the estimator's reference tolerance
_UPDATE_RESISTANCE_TOL = 1e-6

_ESS_WARN_FRACTION = 0.5

MODES = ("bsm", "ism")


@dataclass(frozen=True)
class UpdateEvent:
    op: str  # "I" inserts, "D" deletes
    u: int
    v: int


def parse_update_stream(source) -> list[UpdateEvent]:
    """Read update events, one per line: 'I u v' or 'D u v'.

    '#' starts a comment; blank lines are skipped. Node ids refer to the
    graph the updates will be applied to.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [line.rstrip("\n") for line in source]
    events = []
    for line_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 3 or parts[0] not in ("I", "D"):
            raise ParseError(f"expected 'I u v' or 'D u v', got {raw!r}",
                             line_no=line_no)
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"non-integer endpoint in {raw!r}",
                             line_no=line_no) from None
        events.append(UpdateEvent(parts[0], u, v))
    return events


def format_update_stream(events) -> str:
    return "".join(f"{e.op} {e.u} {e.v}\n" for e in events)


def _weighted_node(cdf: np.ndarray, rng: SplitMix64) -> int:
    x = rng.random() * float(cdf[-1])
    return int(np.searchsorted(cdf, x, side="right"))


def generate_updates(graph: Graph, count: int, insert_frac: float,
                     seed: int = 0) -> list[UpdateEvent]:
    """Random applicable update stream against an evolving graph copy.

    Inserts pick both endpoints proportionally to degree among missing
    edges; deletes pick degree-product-weighted non-bridge edges, so the
    graph stays connected throughout. The insert share of `count` is
    fixed up front, the order is shuffled.
    """
    if count < 0:
        raise InputError("update count must be nonnegative")
    if not 0.0 <= insert_frac <= 1.0:
        raise InputError("insert fraction must be in [0, 1]")
    if not is_connected(graph):
        raise ConnectivityError("graph is not connected")
    rng = SplitMix64.for_stream(seed & MASK64, ROLE_GEN, 0)
    inserts = round(count * insert_frac)
    ops = ["I"] * inserts + ["D"] * (count - inserts)
    for i in range(len(ops) - 1, 0, -1):
        j = rng.randint(i + 1)
        ops[i], ops[j] = ops[j], ops[i]

    current = graph
    events = []
    for op in ops:
        if op == "I":
            cdf = np.cumsum(current.degrees.astype(np.float64))
            for _ in range(200_000):
                u = _weighted_node(cdf, rng)
                v = _weighted_node(cdf, rng)
                if u != v and not current.has_edge(u, v):
                    break
            else:
                raise InputError("no missing edge found to insert")
            u, v = (u, v) if u < v else (v, u)
            current = current.insert_edge(u, v)
        else:
            skip = bridge_edges(current)
            candidates = [e for e in current.edges() if e not in skip]
            if not candidates:
                raise InputError(
                    "every remaining edge is a bridge; cannot delete")
            deg = current.degrees
            weights = [float(deg[a]) * float(deg[b]) for a, b in candidates]
            u, v = candidates[rng.weighted_choice(weights)]
            current = current.delete_edge(u, v)
        events.append(UpdateEvent(op, u, v))
    return events


@dataclass
class SampleRecord:
    tree: RootedTree
    f: int
    weight: float


class SampleStore:
    """Sampled trees plus everything needed to keep an estimate current."""

    def __init__(self, graph: Graph, root: int, ref: RootedTree,
                 records: list[SampleRecord], seed: int, method: str,
                 mode: str = "bsm", threads: int | None = None,
                 next_stream: int | None = None):
        self.graph = graph
        self.root = root
        self.ref = ref
        self.records = records
        self.seed = seed & MASK64
        self.method = method
        self.mode = mode
        self.threads = threads
        self.omega = len(records)
        self.next_stream = self.omega if next_stream is None else next_stream
        self._maint = SplitMix64.for_stream(self.seed, ROLE_MAINTAIN, 0)
        self.uniform = self._weights_uniform()
        self.last_samples_touched = 0
        self.last_wilson_walks = 0

    def _weights_uniform(self) -> bool:
        if not self.records:
            return True
        w0 = 1.0 / self.omega
        return all(rec.weight == w0 for rec in self.records)

    def __len__(self) -> int:
        return self.omega

    def __repr__(self) -> str:
        return (f"SampleStore(n={self.graph.n}, omega={self.omega}, "
                f"mode={self.mode!r}, uniform={self.uniform})")

    # -- estimate ---------------------------------------------------

    def current_estimate(self) -> float:
        if self.omega == 0:
            raise InputError("store holds no samples")
        if self.uniform:
            total = sum(int(rec.f) for rec in self.records)
            return total / (self.graph.two_m * self.omega)
        acc = math.fsum(rec.f * rec.weight for rec in self.records)
        return acc / self.graph.two_m

    def effective_sample_fraction(self) -> float:
        """ESS of the importance weights over the store size."""
        sq = math.fsum(rec.weight ** 2 for rec in self.records)
        total = math.fsum(rec.weight for rec in self.records)
        return (total * total / sq) / self.omega

    # -- update dispatch --------------------------------------------

    def apply(self, event: UpdateEvent) -> float:
        """Apply one edge update; returns the refreshed estimate."""
        if self.mode not in MODES:
            raise InputError(f"unknown maintenance mode {self.mode!r}")
        if event.op == "I":
            if self.mode == "bsm":
                self._bsm_insert(event.u, event.v)
            else:
                self._ism_insert(event.u, event.v)
        elif event.op == "D":
            if self.mode == "bsm":
                self._bsm_delete(event.u, event.v)
            else:
                self._ism_delete(event.u, event.v)
        else:
            raise InputError(f"unknown update op {event.op!r}")
        return self.current_estimate()

    def _replacement_batch(self, new_graph: Graph,
                           edge: tuple[int, int]) -> tuple[int, float]:
        """Samples to redraw for an insertion: resistance times store size."""
        u, v = edge
        r_eff = effective_resistance_iterative(
            new_graph, u, v, rel_tol=_UPDATE_RESISTANCE_TOL)
        # round before ceil so 0.9999996-style solver noise lands exactly
        k = math.ceil(round(r_eff * self.omega, 6))
        return min(self.omega, max(1, k)), r_eff

    def _map_slots(self, slots: list[int], fn) -> None:
        workers = min(_resolve_threads(self.threads), len(slots))
        if workers <= 1:
            for s in slots:
                fn(s)
            return
        bounds = np.linspace(0, len(slots), workers + 1).astype(int)

        def run(lo, hi):
            for i in range(lo, hi):
                fn(slots[i])

        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, int(bounds[i]), int(bounds[i + 1]))
                       for i in range(workers)]
            for fut in futures:
                fut.result()

    def _recompute_f(self, slots: list[int]) -> None:
        graph, ref, method = self.graph, self.ref, self.method

        def work(s):
            rec = self.records[s]
            rec.f = contribution(rec.tree, ref, graph, method)

        self._map_slots(slots, work)

    def _repair_ref(self, new_graph: Graph) -> None:
        """Deleted edge hit the reference tree: rebuild it by BFS."""
        self.ref = bfs_tree(new_graph, self.root)
        self.ref.dfn()

    def _require_uniform(self):
        if not self.uniform:
            raise InputError(
                "basic maintenance needs uniform weights; this store has "
                "been through in-place updates")

    # -- basic maintenance (redraw) ----------------------------------

    def _bsm_insert(self, u: int, v: int) -> None:
        self._require_uniform()
        new_graph = self.graph.insert_edge(u, v)
        k, _ = self._replacement_batch(new_graph, (u, v))
        slots = sorted(self._maint.sample_without_replacement(self.omega, k))
        streams = {}
        for s in slots:
            streams[s] = self.next_stream
            self.next_stream += 1
        w0 = 1.0 / self.omega
        self.graph = new_graph

        def work(s):
            rng = SplitMix64.for_stream(self.seed, ROLE_SAMPLE, streams[s])
            tree, _ = wilson_tree_with_edge(new_graph, u, v, self.root, rng)
            f = contribution(tree, self.ref, new_graph, self.method)
            self.records[s] = SampleRecord(tree, f, w0)

        self._map_slots(slots, work)
        self.last_samples_touched = k
        self.last_wilson_walks = k

    def _bsm_delete(self, u: int, v: int) -> None:
        self._require_uniform()
        new_graph = self.graph.delete_edge(u, v)
        if not is_connected(new_graph):
            raise ConnectivityError(
                f"deleting ({u}, {v}) disconnects the graph")
        affected = [i for i, rec in enumerate(self.records)
                    if rec.tree.contains_edge(u, v)]
        repair = self.ref.contains_edge(u, v)
        self.graph = new_graph
        if repair:
            self._repair_ref(new_graph)
        streams = {}
        for s in affected:
            streams[s] = self.next_stream
            self.next_stream += 1
        w0 = 1.0 / self.omega

        def work(s):
            rng = SplitMix64.for_stream(self.seed, ROLE_SAMPLE, streams[s])
            tree, _ = wilson_tree(new_graph, self.root, rng)
            f = contribution(tree, self.ref, new_graph, self.method)
            self.records[s] = SampleRecord(tree, f, w0)

        self._map_slots(affected, work)
        if repair:
            hit = set(affected)
            self._recompute_f([i for i in range(self.omega) if i not in hit])
        self.last_samples_touched = len(affected) + (
            self.omega - len(affected) if repair else 0)
        self.last_wilson_walks = len(affected)

    # -- in-place maintenance (transform) ----------------------------

    def _ism_insert(self, u: int, v: int) -> None:
        new_graph = self.graph.insert_edge(u, v)
        k, r_eff = self._replacement_batch(new_graph, (u, v))
        slots = sorted(self._maint.sample_without_replacement(self.omega, k))
        chosen = set(slots)
        old_graph = self.graph
        old_selected_weight = math.fsum(self.records[s].weight for s in slots)

        # serial: surgery draws come from the shared maintenance stream
        raw = {}
        for s in slots:
            rec = self.records[s]
            d_without = link_cut(rec.tree, u, v, self._maint)
            d_with = count_cut_crossings(rec.tree, old_graph, u, v)
            raw[s] = rec.weight * d_without / d_with

        raw_total = math.fsum(raw.values())
        scale = r_eff / raw_total
        for s in slots:
            self.records[s].weight = raw[s] * scale
        rest_weight = 1.0 - old_selected_weight
        if len(chosen) < self.omega:
            keep_scale = (1.0 - r_eff) / rest_weight
            for i, rec in enumerate(self.records):
                if i not in chosen:
                    rec.weight *= keep_scale

        self.graph = new_graph
        self._recompute_f(slots)
        self.uniform = False
        self._warn_on_degeneracy()
        self.last_samples_touched = k
        self.last_wilson_walks = 0

    def _ism_delete(self, u: int, v: int) -> None:
        new_graph = self.graph.delete_edge(u, v)
        if not is_connected(new_graph):
            raise ConnectivityError(
                f"deleting ({u}, {v}) disconnects the graph")
        affected = [i for i, rec in enumerate(self.records)
                    if rec.tree.contains_edge(u, v)]
        repair = self.ref.contains_edge(u, v)
        self.graph = new_graph
        if repair:
            self._repair_ref(new_graph)

        if affected:
            group_weight = math.fsum(self.records[s].weight for s in affected)
            raw = {}
            for s in affected:
                rec = self.records[s]
                d_with = cut_link(rec.tree, u, v, new_graph, self._maint)
                d_without = rec.tree.distance(u, v)
                raw[s] = rec.weight * d_with / d_without
            scale = group_weight / math.fsum(raw.values())
            for s in affected:
                self.records[s].weight = raw[s] * scale
            self.uniform = self._weights_uniform()

        if repair:
            self._recompute_f(list(range(self.omega)))
        else:
            self._recompute_f(affected)
        self._warn_on_degeneracy()
        self.last_samples_touched = self.omega if repair else len(affected)
        self.last_wilson_walks = 0

    def _warn_on_degeneracy(self):
        frac = self.effective_sample_fraction()
        if frac < _ESS_WARN_FRACTION:
            warnings.warn(
                f"effective sample fraction {frac:.3f} is below "
                f"{_ESS_WARN_FRACTION}; the maintained estimate may be "
                "unstable, consider rebuilding the index",
                RuntimeWarning, stacklevel=3)

    # -- serialization -----------------------------------------------

    def serialize(self) -> bytes:
        n = self.graph.n
        chunks = [_HEADER.pack(INDEX_MAGIC, INDEX_VERSION, n, self.graph.m,
                               self.omega, self.root, self.seed)]
        chunks.append(self.ref.parent.astype("<i8").tobytes())
        for rec in self.records:
            chunks.append(rec.tree.parent.astype("<i8").tobytes())
            chunks.append(int(rec.f).to_bytes(16, "little", signed=True))
            chunks.append(struct.pack("<d", rec.weight))
        return b"".join(chunks)

    def save(self, path) -> int:
        blob = self.serialize()
        with open(path, "wb") as fh:
            fh.write(blob)
        return len(blob)

    @classmethod
    def deserialize(cls, data: bytes, graph: Graph,
                    mode: str = "bsm", threads: int | None = None) -> "SampleStore":
        if len(data) < _HEADER.size:
            raise CorruptIndexError("index shorter than its header")
        magic, version, n, m, omega, root, seed = _HEADER.unpack_from(data, 0)
        if magic != INDEX_MAGIC:
            raise CorruptIndexError(f"bad magic {magic!r}")
        if version != INDEX_VERSION:
            raise CorruptIndexError(f"unsupported index version {version}")
        if n != graph.n or m != graph.m:
            raise CorruptIndexError(
                f"index built for n={n}, m={m}; graph has n={graph.n}, "
                f"m={graph.m}")
        if omega < 1:
            raise CorruptIndexError("index holds no samples")
        if root >= n:
            raise CorruptIndexError(f"root {root} out of range")
        expected = _HEADER.size + 8 * n + omega * (8 * n + 24)
        if len(data) != expected:
            raise CorruptIndexError(
                f"index is {len(data)} bytes, expected {expected}")

        ecc = eccentricity_from(graph, int(root))
        f_bound = check_value_capacity(graph, ecc)

        def read_tree(offset: int) -> RootedTree:
            parent = np.frombuffer(data, dtype="<i8", count=n,
                                   offset=offset).astype(np.int64)
            tree = RootedTree(parent, int(root))
            if tree.validate(graph) != 0:
                raise CorruptIndexError("stored tree is not a spanning tree "
                                        "of this graph")
            return tree

        pos = _HEADER.size
        ref = read_tree(pos)
        pos += 8 * n
        records = []
        for _ in range(omega):
            tree = read_tree(pos)
            pos += 8 * n
            f = int.from_bytes(data[pos:pos + 16], "little", signed=True)
            pos += 16
            (weight,) = struct.unpack_from("<d", data, pos)
            pos += 8
            if abs(f) > f_bound:
                raise CorruptIndexError("stored contribution exceeds the "
                                        "possible bound")
            if not math.isfinite(weight) or weight <= 0.0:
                raise CorruptIndexError(f"bad sample weight {weight!r}")
            records.append(SampleRecord(tree, f, weight))
        total_w = math.fsum(rec.weight for rec in records)
        if abs(total_w - 1.0) > 1e-9:
            raise CorruptIndexError(f"sample weights sum to {total_w!r}")

        method = resolve_method("auto", ecc, graph.n)
        return cls(graph, int(root), ref, records, int(seed), method,
                   mode=mode, threads=threads, next_stream=int(omega))

    @classmethod
    def load(cls, path, graph: Graph, mode: str = "bsm",
             threads: int | None = None) -> "SampleStore":
        with open(path, "rb") as fh:
            data = fh.read()
        return cls.deserialize(data, graph, mode=mode, threads=threads)


def read_index_header(path) -> dict:
    """Index header fields without loading or validating the samples."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise CorruptIndexError("index shorter than its header")
    magic, version, n, m, omega, root, seed = _HEADER.unpack(head)
    if magic != INDEX_MAGIC:
        raise CorruptIndexError(f"bad magic {magic!r}")
    if version != INDEX_VERSION:
        raise CorruptIndexError(f"unsupported index version {version}")
    return {"n": int(n), "m": int(m), "omega": int(omega),
            "root": int(root), "seed": int(seed)}


def build_index(graph: Graph, config: EstimateConfig) -> SampleStore:
    """Draw the sample set once and keep everything for maintenance.

    Resolution (root, reference tree, method, streams) matches the
    plain estimator exactly, so a fresh index reproduces its estimate
    bit for bit.
    """
    if graph.m == 0:
        raise InputError("graph has no edges")
    if not is_connected(graph):
        raise ConnectivityError("graph is not connected")
    if config.samples is not None:
        samples = int(config.samples)
        if samples < 1:
            raise InputError("sample count must be positive")
    elif config.eps is not None and config.failure_prob is not None:
        samples = plan_sample_size(graph, config.eps, config.failure_prob,
                                   config.root)
    else:
        raise InputError("need samples, or eps with failure_prob")

    seed = config.seed & MASK64
    root = resolve_root(graph, config.root)
    ecc = eccentricity_from(graph, root)
    check_value_capacity(graph, ecc)
    method = resolve_method(config.method, ecc, graph.n)
    ref = reference_tree(graph, root, config.ref_policy, seed)
    ref.dfn()
    f_values, _, parents = sample_batch(
        graph, ref, seed, list(range(samples)), method, config.threads,
        keep_trees=True)
    w0 = 1.0 / samples
    records = [SampleRecord(RootedTree(parents[i], root), int(f_values[i]), w0)
               for i in range(samples)]
    return SampleStore(graph, root, ref, records, seed, method,
                       threads=config.threads)
