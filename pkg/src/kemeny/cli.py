"""Command line entry points.

Machine-readable results go to stdout as JSON, one object per line;
human-oriented notes go to stderr. Exit codes: 0 success, 2 bad input,
3 capacity guard, 4 solver non-convergence, 5 corrupt index, 1 for
anything else. The KF_THREADS environment variable overrides --threads
everywhere.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from ._rng import ROLE_REBUILD, stream_state
from .checks import run_battery
from .dynamic import (SampleStore, build_index, format_update_stream,
                      generate_updates, parse_update_stream,
                      read_index_header)
from .errors import ConnectivityError, CorruptIndexError, InputError, KemenyError
from .estimator import EstimateConfig, estimate_kemeny
from .exact import kemeny_eigen
from .graph import (Graph, is_connected, largest_connected_component,
                    parse_edge_list)

_GRAPH_SUFFIXES = (".txt", ".edges")


def _say(msg: str):
    print(msg, file=sys.stderr)


def _emit(payload: dict):
    print(json.dumps(payload, sort_keys=True), flush=True)


def _load_graph(path: str) -> Graph:
    if not str(path).endswith(_GRAPH_SUFFIXES):
        raise InputError(
            f"unsupported graph file {path!r}; expected a .txt or .edges "
            "edge list")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    graph = parse_edge_list(text)
    lcc, _ = largest_connected_component(graph)
    if lcc.n < graph.n:
        _say(f"{path}: using largest connected component "
             f"({lcc.n} of {graph.n} nodes)")
    return lcc


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _threads(args) -> int | None:
    env = os.environ.get("KF_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InputError(
                f"KF_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise InputError("KF_THREADS must be positive")
        return value
    return args.threads


def _estimate_config(args) -> EstimateConfig:
    if args.samples is None and (args.eps is None or args.pf is None):
        raise InputError("pass --samples, or both --eps and --pf")
    return EstimateConfig(
        samples=args.samples, eps=args.eps, failure_prob=args.pf,
        seed=args.seed, root=args.root, ref_policy=args.tau0,
        method=args.method, threads=_threads(args))


def cmd_exact(args) -> int:
    graph = _load_graph(args.graph)
    t0 = time.perf_counter()
    kappa = kemeny_eigen(graph)
    _emit({
        "command": "exact",
        "graph": args.graph,
        "n": graph.n,
        "m": graph.m,
        "kappa": kappa,
        "timings": {"total_s": round(time.perf_counter() - t0, 6)},
    })
    _say(f"kappa = {kappa:.12g}")
    return 0


def cmd_estimate(args) -> int:
    graph = _load_graph(args.graph)
    config = _estimate_config(args)
    result = estimate_kemeny(graph, config)
    payload = {
        "command": "estimate",
        "graph": args.graph,
        "n": graph.n,
        "m": graph.m,
        "kappa": result.kappa,
        "samples": result.samples,
        "root": result.root,
        "eccentricity": result.eccentricity,
        "method": result.method,
        "ref_policy": result.ref_policy,
        "seed": result.seed,
        "walk_steps": result.total_walk_steps,
        "timings": {k: round(v, 6) for k, v in result.timings.items()},
    }
    if args.eps is not None:
        payload["eps"] = args.eps
    if args.pf is not None:
        payload["failure_prob"] = args.pf
    if args.reference is not None:
        payload["relative_error"] = (abs(result.kappa - args.reference)
                                     / abs(args.reference))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for i in range(result.samples):
                fh.write(json.dumps({
                    "sample_index": i,
                    "f": int(result.f_values[i]),
                    "walk_steps": int(result.walk_steps[i]),
                }) + "\n")
        _say(f"wrote per-sample trace to {args.trace}")
    _emit(payload)
    _say(f"kappa ~= {result.kappa:.10g} from {result.samples} samples")
    return 0


def cmd_index_build(args) -> int:
    graph = _load_graph(args.graph)
    config = _estimate_config(args)
    t0 = time.perf_counter()
    store = build_index(graph, config)
    built = time.perf_counter()
    nbytes = store.save(args.out)
    _emit({
        "command": "index-build",
        "graph": args.graph,
        "n": graph.n,
        "m": graph.m,
        "omega": store.omega,
        "root": store.root,
        "seed": store.seed,
        "kappa": store.current_estimate(),
        "out": args.out,
        "index_bytes": nbytes,
        "timings": {
            "build_s": round(built - t0, 6),
            "total_s": round(time.perf_counter() - t0, 6),
        },
    })
    _say(f"wrote {nbytes} byte index with {store.omega} samples to {args.out}")
    return 0


def _apply_event(graph: Graph, event) -> Graph:
    if event.op == "I":
        return graph.insert_edge(event.u, event.v)
    out = graph.delete_edge(event.u, event.v)
    if not is_connected(out):
        raise ConnectivityError(
            f"deleting ({event.u}, {event.v}) disconnects the graph")
    return out


def cmd_update_replay(args) -> int:
    graph = _load_graph(args.graph)
    events = parse_update_stream(_read_text(args.updates))
    threads = _threads(args)
    total = 0.0
    kappa = None

    if args.mode == "rebuild":
        header = read_index_header(args.index)
        if header["n"] != graph.n or header["m"] != graph.m:
            raise CorruptIndexError(
                f"index built for n={header['n']}, m={header['m']}; graph "
                f"has n={graph.n}, m={graph.m}")
        current = graph
        for i, event in enumerate(events):
            t0 = time.perf_counter()
            current = _apply_event(current, event)
            config = EstimateConfig(
                samples=header["omega"],
                seed=stream_state(header["seed"], ROLE_REBUILD, i),
                root=header["root"], threads=threads)
            kappa = estimate_kemeny(current, config).kappa
            dt = time.perf_counter() - t0
            total += dt
            _emit({
                "update_index": i, "op": event.op, "u": event.u, "v": event.v,
                "kappa": kappa,
                "samples_touched": header["omega"],
                "wilson_walks": header["omega"],
                "latency_s": round(dt, 6),
            })
    else:
        store = SampleStore.load(args.index, graph, mode=args.mode,
                                 threads=threads)
        for i, event in enumerate(events):
            t0 = time.perf_counter()
            kappa = store.apply(event)
            dt = time.perf_counter() - t0
            total += dt
            _emit({
                "update_index": i, "op": event.op, "u": event.u, "v": event.v,
                "kappa": kappa,
                "samples_touched": store.last_samples_touched,
                "wilson_walks": store.last_wilson_walks,
                "latency_s": round(dt, 6),
            })

    _emit({
        "command": "update-replay",
        "mode": args.mode,
        "updates": len(events),
        "kappa": kappa,
        "timings": {"total_s": round(total, 6)},
    })
    _say(f"replayed {len(events)} updates in {total:.3f}s ({args.mode})")
    return 0


def cmd_gen_updates(args) -> int:
    graph = _load_graph(args.graph)
    events = generate_updates(graph, args.count, args.insert_frac, args.seed)
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(format_update_stream(events))
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from None
    inserts = sum(1 for e in events if e.op == "I")
    _emit({
        "command": "gen-updates",
        "graph": args.graph,
        "out": args.out,
        "count": len(events),
        "inserts": inserts,
        "deletes": len(events) - inserts,
        "seed": args.seed,
    })
    _say(f"wrote {len(events)} updates to {args.out}")
    return 0


def cmd_oracle_check(args) -> int:
    report = run_battery(args.max_n, args.per_size, args.seed)
    for name in sorted(report["checks"]):
        _emit({"check": name, "cases": report["checks"][name],
               "status": "pass"})
    for failure in report["failures"]:
        _emit({"check": failure["check"], "status": "fail",
               "detail": failure["detail"]})
    _emit({
        "command": "oracle-check",
        "graphs": report["graphs"],
        "ok": report["ok"],
    })
    _say("all identity checks passed" if report["ok"]
         else f"{len(report['failures'])} identity checks FAILED")
    return 0 if report["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kemeny",
        description="Kemeny constant: exact values, sampling estimates, "
                    "and incrementally maintained estimates under edge "
                    "updates.")
    sub = parser.add_subparsers(dest="command", required=True)

    def estimator_flags(sp):
        sp.add_argument("graph", help="edge list file (.txt or .edges)")
        sp.add_argument("--samples", type=int,
                        help="number of sampled spanning trees")
        sp.add_argument("--eps", type=float,
                        help="target additive error (with --pf)")
        sp.add_argument("--pf", type=float,
                        help="acceptable failure probability (with --eps)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--root", type=int,
                        help="root node (default: max degree)")
        sp.add_argument("--tau0", choices=("bfs", "dfs", "wilson"),
                        default="bfs", help="reference tree policy")
        sp.add_argument("--method", choices=("auto", "naive", "fenwick"),
                        default="auto", help="contribution evaluation")
        sp.add_argument("--threads", type=int)

    sp = sub.add_parser("exact", help="dense spectral Kemeny constant")
    sp.add_argument("graph", help="edge list file (.txt or .edges)")
    sp.set_defaults(fn=cmd_exact)

    sp = sub.add_parser("estimate", help="sampling estimate")
    estimator_flags(sp)
    sp.add_argument("--reference", type=float,
                    help="known value, for relative error reporting")
    sp.add_argument("--trace", help="write per-sample JSON lines here")
    sp.set_defaults(fn=cmd_estimate)

    sp = sub.add_parser("index-build",
                        help="draw samples and save a maintainable index")
    estimator_flags(sp)
    sp.add_argument("--out", required=True, help="index file to write")
    sp.set_defaults(fn=cmd_index_build)

    sp = sub.add_parser("update-replay",
                        help="apply an update stream against an index")
    sp.add_argument("graph", help="edge list the index was built from")
    sp.add_argument("index", help="index file")
    sp.add_argument("updates", help="update stream file (I/D u v lines)")
    sp.add_argument("--mode", choices=("bsm", "ism", "rebuild"),
                    default="bsm",
                    help="maintenance strategy, or rebuild from scratch")
    sp.add_argument("--threads", type=int)
    sp.set_defaults(fn=cmd_update_replay)

    sp = sub.add_parser("gen-updates",
                        help="generate a random applicable update stream")
    sp.add_argument("graph", help="edge list file (.txt or .edges)")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--insert-frac", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="update stream file to write")
    sp.set_defaults(fn=cmd_gen_updates)

    sp = sub.add_parser("oracle-check",
                        help="run the exhaustive identity battery")
    sp.add_argument("--max-n", type=int, default=6)
    sp.add_argument("--per-size", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except KemenyError as exc:
        _say(f"error: {exc}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
