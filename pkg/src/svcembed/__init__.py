"""Survivable, hose-model bandwidth-guaranteed virtual cluster embedding in
tree-shaped data centers: optimal DP, fast heuristic, shadow baseline,
per-failure verification, and admission experiments."""

from .heuristic import solve_heu
from .opt import (apply_bandwidth, compute_tables, inner_init, inner_step,
                  inner_step_reference, leaf_table, solve_opt, warmup_kernels)
from .ranges import AllocationRange
from .resources import ResourceView
from .sbs import solve_sbs
from .sim import (ALGORITHMS, RequestRecord, RunMetrics, TenantEvent,
                  WorkloadConfig, compare_algorithms, gen_requests,
                  gen_static_load, run_dynamic, run_static)
from .topology import (FeasibleRange, Request, Topology, TopologyError,
                       abstract_fattree, build_kary_tree, feasible_range,
                       hose_bandwidth, load_topology, save_topology)
from .vce import (SvceAllocation, VceAllocation, Violation, check_vce,
                  compute_ar, find_feasible_vce, offerable_set)
from .verify import (FailureScenario, OracleLimitError, SurvivabilityReport,
                     auxiliary_topology, brute_force_oracle, verify_svce)

__all__ = [
    "ALGORITHMS", "AllocationRange", "FailureScenario", "FeasibleRange",
    "OracleLimitError", "Request", "RequestRecord", "ResourceView",
    "RunMetrics", "SurvivabilityReport", "SvceAllocation", "TenantEvent",
    "Topology", "TopologyError", "VceAllocation", "Violation",
    "WorkloadConfig", "abstract_fattree", "apply_bandwidth",
    "auxiliary_topology", "brute_force_oracle", "build_kary_tree",
    "check_vce", "compare_algorithms", "compute_ar", "compute_tables",
    "feasible_range", "find_feasible_vce", "gen_requests", "gen_static_load",
    "hose_bandwidth", "inner_init", "inner_step", "inner_step_reference",
    "leaf_table", "load_topology", "offerable_set", "run_dynamic",
    "run_static", "save_topology", "solve_heu", "solve_opt", "solve_sbs",
    "verify_svce", "warmup_kernels",
]
