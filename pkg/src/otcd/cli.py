"""Command-line front end: generate, detect, evaluate, sweep, oracle.

Exit codes: 0 success, 1 domain error, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import evaluation, netio, oracle, synthgen
from .postprocess import NmfConfig, extract_timeline, map_labels
from .solver import SolverConfig, SolverError, solve_offline, solve_online_sequence

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


def _int_list(s: str) -> list[int]:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def cmd_generate(args) -> int:
    if args.scenario == "planted":
        if args.n is None or args.K is None:
            raise ValueError("planted scenario needs --n and --K")
        cfg = synthgen.PlantedConfig(n=args.n, K=args.K, r=args.n // args.K, p=args.p, q=args.q,
                                     m=args.m, seed=args.seed)
        net, truth = synthgen.planted_partition_network(cfg)
    elif args.scenario == "expt1":
        net, truth = synthgen.scenario_expt1(T=args.T, seed=args.seed, p_in=args.p, p_out=args.q,
                                             strict_counts=args.strict_counts)
    else:
        net, truth = synthgen.scenario_expt2(seed=args.seed, p_in=args.p, p_out=args.q)
    prefix = args.out_prefix
    netio.write_temporal_edgelist(net, f"{prefix}.edges")
    netio.write_cover_timeline(truth, f"{prefix}.truth.json")
    print(f"wrote {prefix}.edges ({net.T} snapshots, n={net.n}, {net.total_edges} edges) and {prefix}.truth.json")
    return EXIT_OK


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        r=args.rank, b_mult=args.B_mult, gamma=args.gamma, step0=args.step0, step_decay=args.step_decay,
        max_iters=args.iters, tol=args.tol, seed=args.seed, overlap_allowed=not args.no_overlap,
        include_diagonal=args.include_diagonal, tie_snapshots=args.tie_snapshots,
        warm_iters=args.warm_iters, threads=args.threads,
    )


def cmd_detect(args) -> int:
    net = netio.load_temporal_edgelist(args.input, n_hint=args.n)
    cfg = _solver_config(args)
    if args.online:
        F, traces = solve_online_sequence(net, cfg)
    else:
        F, trace = solve_offline(net, cfg)
        traces = [trace]
    tl = extract_timeline(F, NmfConfig(seed=args.seed, threshold=args.threshold, exclusive=args.no_overlap))
    netio.write_cover_timeline(tl, args.out)
    if args.trace:
        lines = ["iter,objective,step"]
        k = 0
        for tr in traces:
            for o, s in zip(tr.objective, tr.step):
                lines.append(f"{k},{o!r},{s!r}")
                k += 1
        Path(args.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")
    sizes = [len(c) for c in tl.covers]
    print(f"wrote {args.out}: {net.T} snapshots, {min(sizes)}-{max(sizes)} communities per snapshot")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    truth = netio.load_cover_timeline(args.truth)
    rows = []
    for path in args.est:
        est = netio.load_cover_timeline(path)
        a, b = evaluation.align_n(truth, est)
        d = evaluation.cover_distance(a, b)
        rows.append((path, d, "true" if d == 0 else "false"))
    if len(rows) == 1:
        text = "distance,exact\n" + f"{rows[0][1]},{rows[0][2]}\n"
    else:
        text = "est,distance,exact\n" + "".join(f"{p},{d},{e}\n" for p, d, e in rows)
    sys.stdout.write(text)
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = [(n, K, m) for n in args.n_list for K in args.K_list for m in args.m_list]
    if not grid:
        raise ValueError("empty grid")
    cfg = SolverConfig(tie_snapshots=True, b_mult=args.B_mult, max_iters=args.iters)
    rows = evaluation.phase_sweep(grid, p=args.p, q=args.q, trials=args.trials, solver_cfg=cfg,
                                  seed=args.seed, workers=args.threads)
    out = Path(args.out)
    out.write_text(evaluation.sweep_csv(rows), encoding="utf-8")
    out.with_name(out.name + ".theory.csv").write_text(evaluation.theory_csv(rows), encoding="utf-8")
    for nk, ok in evaluation.monotone_in_m(rows).items():
        print(f"n={nk[0]} K={nk[1]}: {'consistent' if ok else 'NOT monotone'} in m")
    return EXIT_OK


def cmd_oracle(args) -> int:
    net = netio.load_temporal_edgelist(args.input, n_hint=args.n)
    limits = oracle.OracleLimits(max_communities=args.max_communities)
    res = oracle.brute_force_solve(net, delta=args.delta, limits=limits, gamma=args.gamma)
    best = [map_labels(seq) for seq in res.optima]
    doc = {
        "value": res.value,
        "quality": res.quality,
        "distance": res.distance,
        "optima": [netio.timeline_to_json(tl) for tl in best],
    }
    print(json.dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="otcd", description="Overlapping temporal community detection.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic network with ground truth")
    g.add_argument("--scenario", choices=("planted", "expt1", "expt2"), required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--T", type=int, default=10, help="snapshot count for expt1")
    g.add_argument("--p", type=float, default=synthgen.DEFAULT_P_IN)
    g.add_argument("--q", type=float, default=synthgen.DEFAULT_P_OUT)
    g.add_argument("--strict-counts", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-prefix", required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("detect", help="solve the relaxation and write rounded covers")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--n", type=int, help="node count if larger than the largest id + 1")
    d.add_argument("--gamma", type=float, default=1.0)
    d.add_argument("--B-mult", dest="B_mult", type=float, default=10.0)
    d.add_argument("--rank", type=int)
    d.add_argument("--iters", type=int, default=2000)
    d.add_argument("--step0", type=float, default=1e-3)
    d.add_argument("--step-decay", type=float, default=0.995)
    d.add_argument("--tol", type=float, default=1e-7)
    d.add_argument("--threshold", type=float, default=0.5)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--no-overlap", action="store_true")
    d.add_argument("--online", action="store_true")
    d.add_argument("--include-diagonal", action="store_true")
    d.add_argument("--tie-snapshots", action="store_true")
    d.add_argument("--warm-iters", type=int, default=0)
    d.add_argument("--threads", type=int, default=1)
    d.add_argument("--out", required=True)
    d.add_argument("--trace")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("evaluate", help="compare detected covers against ground truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--est", required=True, nargs="+")
    e.add_argument("--csv")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="planted-partition exact recovery rates")
    s.add_argument("--n-list", type=_int_list, required=True)
    s.add_argument("--K-list", type=_int_list, required=True)
    s.add_argument("--m-list", type=_int_list, required=True)
    s.add_argument("--p", type=float, default=synthgen.DEFAULT_P_IN)
    s.add_argument("--q", type=float, default=synthgen.DEFAULT_P_OUT)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--B-mult", dest="B_mult", type=float, default=1.0)
    s.add_argument("--iters", type=int, default=2000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="brute-force optimum of a tiny instance")
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--n", type=int)
    o.add_argument("--max-communities", type=int, default=2)
    o.add_argument("--delta", type=float, default=math.inf)
    o.add_argument("--gamma", type=float)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, netio.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
