"""Static and dynamic admission experiments for the three embedding algorithms.

Static runs test every generated request against a freshly drawn random load
and reserve nothing.  Dynamic runs replay a Poisson arrival/departure stream
against one stateful resource view, reserving on acceptance and releasing on
departure.  All randomness derives from the config seed, so a run is fully
reproducible up to wall-clock timing.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .heuristic import solve_heu
from .opt import solve_opt, warmup_kernels
from .resources import ResourceView
from .sbs import solve_sbs
from .topology import Request, Topology

ALGORITHMS: dict[str, Callable] = {
    "opt": solve_opt,
    "heu": solve_heu,
    "sbs": solve_sbs,
}

# seed-stream tags keep workload and load draws independent
_STREAM_WORKLOAD = 0
_STREAM_LOAD = 1

ARRIVAL = "arrival"
DEPARTURE = "departure"


@dataclass(frozen=True)
class WorkloadConfig:
    mode: str
    request_count: int = 1000
    mean_vms: float = 15.0
    mean_bw_mbps: float = 300.0
    load_factor: float = 0.5
    mean_arrival_interval: float = 15.0
    mean_lifetime: float = 2000.0
    seed: int = 1
    repetitions: int = 1
    std_vms: float | None = None
    std_bw_mbps: float | None = None

    def __post_init__(self):
        if self.mode not in ("static", "dynamic"):
            raise ValueError(f"mode must be 'static' or 'dynamic', got {self.mode!r}")
        if self.request_count < 1 or self.repetitions < 1:
            raise ValueError("request_count and repetitions must be positive")
        if self.mean_vms <= 0 or self.mean_bw_mbps < 0:
            raise ValueError("mean request sizes must be positive")
        if not 0.0 <= self.load_factor <= 1.0:
            raise ValueError(f"load factor must lie in [0, 1], got {self.load_factor}")
        if self.mean_arrival_interval <= 0 or self.mean_lifetime <= 0:
            raise ValueError("arrival interval and lifetime means must be positive")

    @property
    def vm_std(self) -> float:
        return self.mean_vms / 4.0 if self.std_vms is None else self.std_vms

    @property
    def bw_std(self) -> float:
        return self.mean_bw_mbps / 4.0 if self.std_bw_mbps is None else self.std_bw_mbps

    @classmethod
    def static_defaults(cls, **overrides) -> "WorkloadConfig":
        base = dict(mode="static", request_count=1000, mean_vms=15.0,
                    mean_bw_mbps=200.0, load_factor=0.5, seed=1, repetitions=1)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def dynamic_defaults(cls, **overrides) -> "WorkloadConfig":
        base = dict(mode="dynamic", request_count=1000, mean_vms=15.0,
                    mean_bw_mbps=300.0, mean_arrival_interval=15.0,
                    mean_lifetime=2000.0, seed=1, repetitions=20)
        base.update(overrides)
        return cls(**base)

    def to_doc(self) -> str:
        fields = {
            "mode": self.mode,
            "request_count": self.request_count,
            "mean_vms": self.mean_vms,
            "mean_bw_mbps": self.mean_bw_mbps,
            "load_factor": self.load_factor,
            "mean_arrival_interval": self.mean_arrival_interval,
            "mean_lifetime": self.mean_lifetime,
            "seed": self.seed,
            "repetitions": self.repetitions,
        }
        if self.std_vms is not None:
            fields["std_vms"] = self.std_vms
        if self.std_bw_mbps is not None:
            fields["std_bw_mbps"] = self.std_bw_mbps
        return json.dumps(fields, indent=2) + "\n"

    @classmethod
    def from_doc(cls, data: str | bytes) -> "WorkloadConfig":
        return cls(**json.loads(data))


@dataclass(frozen=True)
class TenantEvent:
    kind: str
    time: float
    request: Request
    tenant_id: int


def _draw_request(rng: np.random.Generator, cfg: WorkloadConfig) -> Request:
    while True:
        n = int(math.floor(rng.normal(cfg.mean_vms, cfg.vm_std) + 0.5))
        if n >= 1:
            break
    b = max(0.0, float(rng.normal(cfg.mean_bw_mbps, cfg.bw_std)))
    return Request(n, b)


def gen_requests(cfg: WorkloadConfig, rep: int = 0) -> list[TenantEvent]:
    """Deterministic event stream for one repetition.

    Static mode yields one arrival per request at integer times.  Dynamic mode
    yields Poisson arrivals plus the matching departures, with departures
    ordered strictly before arrivals at equal timestamps.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _STREAM_WORKLOAD, rep]))
    events: list[TenantEvent] = []
    clock = 0.0
    for tenant in range(cfg.request_count):
        if cfg.mode == "dynamic":
            clock += float(rng.exponential(cfg.mean_arrival_interval))
            lifetime = float(rng.exponential(cfg.mean_lifetime))
            req = _draw_request(rng, cfg)
            events.append(TenantEvent(ARRIVAL, clock, req, tenant))
            events.append(TenantEvent(DEPARTURE, clock + lifetime, req, tenant))
        else:
            req = _draw_request(rng, cfg)
            events.append(TenantEvent(ARRIVAL, float(tenant), req, tenant))
    events.sort(key=lambda e: (e.time, 0 if e.kind == DEPARTURE else 1, e.tenant_id))
    return events


def gen_static_load(topo: Topology, load_factor: float,
                    rng: np.random.Generator | int) -> ResourceView:
    """Random occupancy: every PM and every link loses a Normal(alpha,
    min(alpha, 1 - alpha)) fraction of its capacity, clamped to [0, 1]."""
    if not 0.0 <= load_factor <= 1.0:
        raise ValueError(f"load factor must lie in [0, 1], got {load_factor}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    std = min(load_factor, 1.0 - load_factor)
    slots: dict[int, int] = {}
    for h in topo.pms:
        frac = min(1.0, max(0.0, float(rng.normal(load_factor, std))))
        occupied = int(math.floor(frac * topo.slots(h) + 0.5))
        slots[h] = topo.slots(h) - occupied
    bw: dict[int, float] = {}
    for v in topo.preorder():
        if v == topo.root:
            continue
        frac = min(1.0, max(0.0, float(rng.normal(load_factor, std))))
        bw[v] = topo.bw(v) - frac * topo.bw(v)
    return ResourceView(topo, slots, bw)


@dataclass(frozen=True)
class RequestRecord:
    run_id: int
    algo: str
    request_id: int
    arrival_time: float
    n_vms: int
    bw_mbps: float
    accepted: bool
    total_vms: int | None
    consumption: float | None
    solve_seconds: float


@dataclass
class RunMetrics:
    algo: str
    acceptance_ratio: float
    avg_vm_consumption_ratio: float | None
    avg_running_time: float
    runs: int
    records: list[RequestRecord] = field(repr=False, default_factory=list)


def _summarize(algo: str, records: list[RequestRecord], runs: int,
               common: set[tuple[int, int]] | None = None) -> RunMetrics:
    accepted = [r for r in records if r.accepted]
    if common is None:
        pool = accepted
    else:
        pool = [r for r in accepted if (r.run_id, r.request_id) in common]
    ratio = len(accepted) / len(records) if records else 0.0
    consumption = sum(r.consumption for r in pool) / len(pool) if pool else None
    solve = sum(r.solve_seconds for r in records) / len(records) if records else 0.0
    return RunMetrics(algo, ratio, consumption, solve, runs, records)


def _replay(topo: Topology, algo: str, cfg: WorkloadConfig, rep: int,
            events: Sequence[TenantEvent],
            observer: Callable | None = None) -> list[RequestRecord]:
    """One repetition of either mode for one algorithm.

    ``observer(event, alloc, avail)`` runs after each event is resolved but
    before an accepted allocation is reserved (used by invariant tests).
    """
    solver = ALGORITHMS[algo]
    records: list[RequestRecord] = []
    if cfg.mode == "static":
        for event in events:
            load_rng = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, _STREAM_LOAD, rep, event.tenant_id]))
            avail = gen_static_load(topo, cfg.load_factor, load_rng)
            record, alloc = _attempt(solver, algo, rep, event, topo, avail)
            records.append(record)
            if observer is not None:
                observer(event, alloc, avail)
    else:
        avail = ResourceView.pristine(topo)
        active: dict[int, object] = {}
        for event in events:
            if event.kind == DEPARTURE:
                alloc = active.pop(event.tenant_id, None)
                if alloc is not None:
                    avail.release(dict(alloc.vm_per_pm), dict(alloc.bw_per_link))
                if observer is not None:
                    observer(event, alloc, avail)
                continue
            record, alloc = _attempt(solver, algo, rep, event, topo, avail)
            records.append(record)
            if observer is not None:
                observer(event, alloc, avail)
            if alloc is not None:
                avail.reserve(dict(alloc.vm_per_pm), dict(alloc.bw_per_link))
                active[event.tenant_id] = alloc
    return records


def _attempt(solver, algo, rep, event, topo, avail):
    start = time.perf_counter()
    alloc = solver(topo, event.request, avail)
    elapsed = time.perf_counter() - start
    if alloc is None:
        record = RequestRecord(rep, algo, event.tenant_id, event.time,
                               event.request.n_vms, event.request.bw_mbps,
                               False, None, None, elapsed)
    else:
        total = alloc.total_vms
        record = RequestRecord(rep, algo, event.tenant_id, event.time,
                               event.request.n_vms, event.request.bw_mbps,
                               True, total, total / event.request.n_vms, elapsed)
    return record, alloc


def run_static(topo: Topology, algo: str, cfg: WorkloadConfig,
               observer: Callable | None = None) -> RunMetrics:
    if cfg.mode != "static":
        raise ValueError("run_static needs a static workload config")
    return _run(topo, algo, cfg, observer)


def run_dynamic(topo: Topology, algo: str, cfg: WorkloadConfig,
                observer: Callable | None = None) -> RunMetrics:
    if cfg.mode != "dynamic":
        raise ValueError("run_dynamic needs a dynamic workload config")
    return _run(topo, algo, cfg, observer)


def _run(topo: Topology, algo: str, cfg: WorkloadConfig,
         observer: Callable | None = None) -> RunMetrics:
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    if algo == "opt":
        warmup_kernels()
    records: list[RequestRecord] = []
    for rep in range(cfg.repetitions):
        events = gen_requests(cfg, rep)
        records.extend(_replay(topo, algo, cfg, rep, events, observer))
    return _summarize(algo, records, cfg.repetitions)


def compare_algorithms(topo: Topology, cfg: WorkloadConfig,
                       algos: Sequence[str] = ("opt", "heu", "sbs")
                       ) -> dict[str, RunMetrics]:
    """Run every algorithm on the identical event streams with independent
    resource states; consumption averages count only requests all of them
    accepted."""
    for algo in algos:
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}")
    if "opt" in algos:
        warmup_kernels()
    per_algo: dict[str, list[RequestRecord]] = {a: [] for a in algos}
    for rep in range(cfg.repetitions):
        events = gen_requests(cfg, rep)
        for algo in algos:
            per_algo[algo].extend(_replay(topo, algo, cfg, rep, events))
    common: set[tuple[int, int]] | None = None
    for algo in algos:
        mine = {(r.run_id, r.request_id) for r in per_algo[algo] if r.accepted}
        common = mine if common is None else (common & mine)
    return {algo: _summarize(algo, per_algo[algo], cfg.repetitions, common)
            for algo in algos}
