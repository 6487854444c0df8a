"""Command-line surface: topology generation, single-request embedding,
survivability verification, and batch simulations.

Exit status: 0 success/accepted, 1 infeasible/rejected, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from .sim import ALGORITHMS, WorkloadConfig, compare_algorithms
from .topology import (Request, TopologyError, abstract_fattree, build_kary_tree,
                       load_topology, save_topology)
from .vce import SvceAllocation
from .verify import verify_svce

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INVALID = 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _cmd_gen_topology(args) -> int:
    if args.fattree_k is not None and (args.levels is not None or args.arity is not None):
        print("error: --fattree-k conflicts with --levels/--arity", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.fattree_k is not None:
            topo = abstract_fattree(args.fattree_k, args.slots, args.edge_bw, args.upper_bw)
        else:
            levels = 4 if args.levels is None else args.levels
            arity = 8 if args.arity is None else args.arity
            topo = build_kary_tree(levels, arity, args.slots, args.edge_bw, args.upper_bw)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(save_topology(topo))
    return EXIT_OK


def _cmd_embed(args) -> int:
    try:
        topo = load_topology(_read(args.topology))
        req = Request(args.n, args.b)
    except (OSError, TopologyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    alloc = ALGORITHMS[args.algo](topo, req)
    if alloc is None:
        print(f"infeasible: no survivable embedding for {args.n} VMs "
              f"at {args.b} Mbps with algorithm {args.algo}", file=sys.stderr)
        return EXIT_INFEASIBLE
    sys.stdout.write(alloc.to_doc())
    print(f"total_vms={alloc.total_vms}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        topo = load_topology(_read(args.topology))
        req = Request(args.n, args.b)
        alloc = SvceAllocation.from_doc(_read(args.allocation))
    except (OSError, TopologyError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        report = verify_svce(topo, req, alloc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(json.dumps(report.to_doc_dict(), indent=2) + "\n")
    if not report.feasible:
        print(f"infeasible: no recovery embedding when PM "
              f"{report.first_failure.failed_pm} fails", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_simulate(args) -> int:
    try:
        topo = load_topology(_read(args.topology))
        cfg = WorkloadConfig.from_doc(_read(args.config))
        if args.mode is not None and args.mode != cfg.mode:
            cfg = dataclasses.replace(cfg, mode=args.mode)
        algos = [a.strip() for a in args.algos.split(",") if a.strip()]
        if not algos:
            raise ValueError("no algorithms given")
        for algo in algos:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
    except (OSError, TopologyError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    results = compare_algorithms(topo, cfg, algos)
    out = Path(args.out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "algo", "request_id", "arrival_time", "n_vms",
                         "bw_mbps", "accepted", "total_vms", "consumption_ratio",
                         "solve_seconds"])
        for algo in algos:
            for r in results[algo].records:
                writer.writerow([
                    r.run_id, r.algo, r.request_id, _fmt(r.arrival_time),
                    r.n_vms, _fmt(r.bw_mbps), int(r.accepted),
                    "" if r.total_vms is None else r.total_vms,
                    "" if r.consumption is None else _fmt(r.consumption),
                    _fmt(r.solve_seconds),
                ])
    summary_path = out.with_name(out.stem + "_summary" + (out.suffix or ".csv"))
    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "acceptance_ratio", "avg_consumption_ratio",
                         "avg_solve_seconds", "runs"])
        for algo in algos:
            m = results[algo]
            writer.writerow([
                algo, _fmt(m.acceptance_ratio),
                "" if m.avg_vm_consumption_ratio is None else _fmt(m.avg_vm_consumption_ratio),
                _fmt(m.avg_running_time), m.runs,
            ])
    print(f"wrote {out} and {summary_path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svcembed",
        description="Survivable bandwidth-guaranteed virtual cluster embedding")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-topology", help="emit a topology document on stdout")
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--arity", type=int, default=None)
    p.add_argument("--slots", type=int, default=5)
    p.add_argument("--edge-bw", type=float, default=1000.0)
    p.add_argument("--upper-bw", type=float, default=10000.0)
    p.add_argument("--fattree-k", type=int, default=None)
    p.set_defaults(func=_cmd_gen_topology)

    p = sub.add_parser("embed", help="embed one request survivably")
    p.add_argument("--topology", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--algo", choices=sorted(ALGORITHMS), required=True)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("verify", help="check a reservation against every PM failure")
    p.add_argument("--topology", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--allocation", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("simulate", help="run admission experiments, write CSV tables")
    p.add_argument("--topology", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=["static", "dynamic"], default=None)
    p.add_argument("--algos", default="opt,heu,sbs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
