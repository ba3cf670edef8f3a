"""Randomized Kemeny-constant estimation from sampled spanning trees.

Each sample draws a uniform spanning tree, matches it against a fixed
reference tree, and folds signed subtree volumes into one integer
contribution per tree. The estimate is the average contribution scaled
by twice the edge count. Two evaluation strategies compute identical
integers: a direct walk along reference-tree paths (good when the root
eccentricity is tiny) and a stamped-interval accumulator swept by one
DFS over the sampled tree.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._rng import MASK64, ROLE_SAMPLE, ROLE_TAU0, SplitMix64, stream_state
from .errors import CapacityError, ConnectivityError, InputError
from .fenwick import FenwickTree
from .graph import Graph, eccentricity_from, is_connected
from .spanning import RootedTree, bfs_tree, dfs_tree, wilson_tree

# per-tree contributions are bounded by 4 m^2 ecc(root); that bound must
# fit the signed 64-bit accumulator used inside the kernels
_VALUE_LIMIT = 2**63 - 1

REF_POLICIES = ("bfs", "dfs", "wilson")
METHODS = ("auto", "naive", "fenwick")


@dataclass
class EstimateConfig:
    samples: int | None = None
    eps: float | None = None
    failure_prob: float | None = None
    seed: int = 0
    root: int | None = None
    ref_policy: str = "bfs"
    method: str = "auto"
    threads: int | None = None


@dataclass
class EstimateResult:
    kappa: float
    samples: int
    root: int
    eccentricity: int
    method: str
    ref_policy: str
    seed: int
    f_total: int
    f_values: np.ndarray
    walk_steps: np.ndarray
    timings: dict = field(default_factory=dict)

    @property
    def total_walk_steps(self) -> int:
        return int(self.walk_steps.sum())


def resolve_root(graph: Graph, root: int | None = None) -> int:
    """Explicit root, else the max-degree node (smallest id on ties)."""
    if root is not None:
        graph._check_node(root)
        return int(root)
    if graph.n == 0:
        raise InputError("graph has no nodes")
    return int(np.argmax(graph.degrees))


def check_value_capacity(graph: Graph, ecc: int) -> int:
    """Largest possible |contribution|; must fit signed 64-bit."""
    bound = 4 * graph.m * graph.m * ecc
    if bound > _VALUE_LIMIT:
        raise CapacityError(
            "contribution bound 4*m^2*ecc exceeds the 64-bit accumulator; "
            f"m={graph.m}, ecc={ecc}")
    return bound


def plan_sample_size(graph: Graph, eps: float, failure_prob: float,
                     root: int | None = None) -> int:
    """Samples needed for additive error eps with the given failure odds.

    Concentration sizing from the worst-case contribution bound:
    ceil(8 m^2 ecc^2 ln(2/p) / (n^2 eps^2)).
    """
    if not eps > 0.0:
        raise InputError("eps must be positive")
    if not 0.0 < failure_prob < 1.0:
        raise InputError("failure probability must be in (0, 1)")
    r = resolve_root(graph, root)
    ecc = eccentricity_from(graph, r)
    need = (8.0 * graph.m**2 * ecc**2 * math.log(2.0 / failure_prob)
            / (graph.n**2 * eps**2))
    return max(1, math.ceil(need))


def reference_tree(graph: Graph, root: int, policy: str = "bfs",
                   seed: int = 0) -> RootedTree:
    """Build the fixed reference tree all samples are matched against."""
    if policy == "bfs":
        return bfs_tree(graph, root)
    if policy == "dfs":
        return dfs_tree(graph, root)
    if policy == "wilson":
        rng = SplitMix64.for_stream(seed, ROLE_TAU0, 0)
        tree, _ = wilson_tree(graph, root, rng)
        return tree
    raise InputError(f"unknown reference policy {policy!r}")


def resolve_method(method: str, eccentricity: int, n: int) -> str:
    """'auto' picks the path walk only when the root is very central."""
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}")
    if method != "auto":
        return method
    return "naive" if eccentricity < math.log2(max(n, 2)) else "fenwick"


def _check_aligned(tree: RootedTree, ref: RootedTree, graph: Graph):
    if tree.n != graph.n or ref.n != graph.n:
        raise ValueError("tree/graph size mismatch")
    if tree.root != ref.root:
        raise ValueError("sampled tree and reference tree roots differ")


def contribution_naive(tree: RootedTree, ref: RootedTree, graph: Graph) -> int:
    """Signed matched-volume total by walking reference paths per node."""
    _check_aligned(tree, ref, graph)
    tin_t, tout_t, _ = tree.dfn()
    vol_t = tree.volumes(graph)
    return int(_kernels.contribution_naive(
        tree.root, tree.parent, tin_t, tout_t, vol_t,
        ref.parent, graph.degrees, graph.two_m))


def contribution_fenwick(tree: RootedTree, ref: RootedTree, graph: Graph) -> int:
    """Same integer as the naive walk, via one DFS and range updates."""
    _check_aligned(tree, ref, graph)
    cptr, cidx = tree.children()
    vol_t = tree.volumes(graph)
    tin0, tout0, _ = ref.dfn()
    fen = FenwickTree(graph.n)
    value = int(_kernels.contribution_fenwick(
        tree.root, tree.parent, cptr, cidx, vol_t,
        ref.parent, tin0, tout0, graph.degrees, graph.two_m, fen.raw()))
    # the sweep must undo every range update on exit
    assert fen.is_zero(), "accumulator not restored"
    return value


def contribution(tree: RootedTree, ref: RootedTree, graph: Graph,
                 method: str = "fenwick") -> int:
    if method == "naive":
        return contribution_naive(tree, ref, graph)
    if method == "fenwick":
        return contribution_fenwick(tree, ref, graph)
    raise InputError(f"unknown method {method!r}")


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        return max(1, os.cpu_count() or 1)
    if threads < 1:
        raise InputError("threads must be positive")
    return int(threads)


def sample_batch(graph: Graph, ref: RootedTree, seed: int,
                 stream_indices: list[int], method: str, threads: int | None,
                 keep_trees: bool = False):
    """Draw one tree per stream index and evaluate its contribution.

    Results land in arrays indexed by position, so the output is
    independent of thread count and scheduling. Returns (f, steps,
    parents) with parents None unless keep_trees.
    """
    tin0, tout0, _ = ref.dfn()
    parent0 = ref.parent
    deg = graph.degrees
    two_m = graph.two_m
    root = ref.root
    n = graph.n
    use_fenwick = method == "fenwick"
    count = len(stream_indices)
    f_out = np.zeros(count, dtype=np.int64)
    steps_out = np.zeros(count, dtype=np.int64)
    parents_out = np.zeros((count, n), dtype=np.int64) if keep_trees else None
    root_arr = np.array([root], dtype=np.int64)

    def run_range(lo: int, hi: int):
        for slot in range(lo, hi):
            state = np.uint64(stream_state(seed, ROLE_SAMPLE, stream_indices[slot]))
            if keep_trees:
                parent_t, steps, _ = _kernels.wilson(
                    graph.indptr, graph.indices, root_arr, state)
                cptr, cidx = _kernels.children_csr(parent_t)
                tin_t, tout_t, order_t = _kernels.dfn_order(
                    parent_t, cptr, cidx, root)
                vol_t = _kernels.subtree_volumes(parent_t, order_t, deg)
                if use_fenwick:
                    bit = np.zeros(n + 1, dtype=np.int64)
                    f = _kernels.contribution_fenwick(
                        root, parent_t, cptr, cidx, vol_t,
                        parent0, tin0, tout0, deg, two_m, bit)
                else:
                    f = _kernels.contribution_naive(
                        root, parent_t, tin_t, tout_t, vol_t,
                        parent0, deg, two_m)
                parents_out[slot] = parent_t
            else:
                f, steps = _kernels.sample_f(
                    graph.indptr, graph.indices, deg, root, state,
                    parent0, tin0, tout0, two_m, use_fenwick)
            f_out[slot] = f
            steps_out[slot] = steps

    workers = min(_resolve_threads(threads), count) if count else 1
    if workers <= 1:
        run_range(0, count)
    else:
        bounds = np.linspace(0, count, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_range, int(bounds[i]), int(bounds[i + 1]))
                       for i in range(workers)]
            for fut in futures:
                fut.result()
    return f_out, steps_out, parents_out


def estimate_kemeny(graph: Graph, config: EstimateConfig) -> EstimateResult:
    """Sampling estimate of the Kemeny constant."""
    t0 = time.perf_counter()
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
    if config.ref_policy not in REF_POLICIES:
        raise InputError(f"unknown reference policy {config.ref_policy!r}")

    t1 = time.perf_counter()
    ref = reference_tree(graph, root, config.ref_policy, seed)
    ref.dfn()
    t2 = time.perf_counter()
    f_values, walk_steps, _ = sample_batch(
        graph, ref, seed, list(range(samples)), method, config.threads)
    t3 = time.perf_counter()

    # accumulate in python ints: the per-tree bound fits 64 bits, the
    # total over all samples may not
    f_total = sum(int(x) for x in f_values)
    kappa = f_total / (graph.two_m * samples)
    return EstimateResult(
        kappa=float(kappa),
        samples=samples,
        root=root,
        eccentricity=ecc,
        method=method,
        ref_policy=config.ref_policy,
        seed=seed,
        f_total=f_total,
        f_values=f_values,
        walk_steps=walk_steps,
        timings={
            "setup_s": t1 - t0,
            "reference_s": t2 - t1,
            "sampling_s": t3 - t2,
            "total_s": time.perf_counter() - t0,
        },
    )
