#!/usr/bin/env python3
"""Static admission experiment: sweep the background load factor and record
acceptance and VM-consumption ratios per algorithm (fresh random load per
request, nothing reserved)."""

import argparse
import csv
import sys
from pathlib import Path

from svcembed import WorkloadConfig, build_kary_tree, compare_algorithms


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--requests", type=int, default=1000)
    ap.add_argument("--mean-vms", type=float, default=15.0)
    ap.add_argument("--mean-bw", type=float, default=200.0)
    ap.add_argument("--loads", default="0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8")
    ap.add_argument("--arity", type=int, default=8)
    ap.add_argument("--slots", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--algos", default="opt,heu,sbs")
    ap.add_argument("--out", default="static_results.csv")
    args = ap.parse_args()

    topo = build_kary_tree(4, args.arity, args.slots, 1000.0, 10000.0)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    loads = [float(x) for x in args.loads.split(",") if x.strip()]

    out = Path(args.out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["load_factor", "algo", "acceptance_ratio",
                         "avg_consumption_ratio", "avg_solve_seconds"])
        for load in loads:
            cfg = WorkloadConfig.static_defaults(
                request_count=args.requests, mean_vms=args.mean_vms,
                mean_bw_mbps=args.mean_bw, load_factor=load, seed=args.seed)
            results = compare_algorithms(topo, cfg, algos)
            for algo in algos:
                m = results[algo]
                consumption = ("" if m.avg_vm_consumption_ratio is None
                               else f"{m.avg_vm_consumption_ratio:.6f}")
                writer.writerow([f"{load:.2f}", algo, f"{m.acceptance_ratio:.6f}",
                                 consumption, f"{m.avg_running_time:.6f}"])
                print(f"load {load:.2f} {algo:>4}: acceptance {m.acceptance_ratio:.4f}"
                      f"  consumption {consumption or '-'}")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
