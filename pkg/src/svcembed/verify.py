"""Survivability checking and the exhaustive optimality oracle.

A reservation survives a PM failure when a full working embedding still fits
inside the reserved slots and bandwidth once that PM and its link are gone.
The oracle re-derives minimal reservations by direct enumeration, staying
independent of the interval and DP machinery it is used to cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .resources import ResourceView
from .topology import Request, Topology
from .vce import SvceAllocation, VceAllocation, _bandwidth_for, find_feasible_vce


@dataclass(frozen=True)
class FailureScenario:
    failed_pm: int


@dataclass(frozen=True)
class SurvivabilityReport:
    feasible: bool
    rws: dict[FailureScenario, VceAllocation] | None
    pws: VceAllocation | None
    first_failure: FailureScenario | None

    def to_doc_dict(self) -> dict:
        doc: dict = {"feasible": self.feasible}
        if self.feasible:
            doc["pws"] = _alloc_dict(self.pws)
            doc["rws"] = {str(f.failed_pm): _alloc_dict(a) for f, a in sorted(
                self.rws.items(), key=lambda kv: kv[0].failed_pm)}
        else:
            doc["first_failure"] = self.first_failure.failed_pm
        return doc


def _alloc_dict(alloc: VceAllocation) -> dict:
    return {
        "vms": [{"pm": h, "count": c} for h, c in sorted(alloc.vm_per_pm.items())],
        "bw_mbps": [{"link_child": v, "mbps": b} for v, b in sorted(alloc.bw_per_link.items())],
    }


def auxiliary_topology(topo: Topology, alloc: SvceAllocation, failure: FailureScenario) -> Topology:
    """The substrate minus the failed PM, with capacities replaced by the
    reservation: surviving PMs carry their reserved slots, surviving links
    their reserved bandwidth."""
    failed = failure.failed_pm
    if failed not in topo.pms:
        raise ValueError(f"failure names node {failed}, which is not a PM")
    records = []
    for node_id, kind, parent, _slots, _bw in topo.records():
        if node_id == failed:
            continue
        slots = alloc.vm_on(node_id) if kind == "pm" else None
        bw = None if node_id == topo.root else alloc.bw_on(node_id)
        records.append((node_id, kind, parent, slots, bw))
    return Topology(topo.root, records)


def _validate_against_capacity(topo: Topology, alloc: SvceAllocation,
                               avail: ResourceView):
    for h, count in alloc.vm_per_pm.items():
        if h not in topo.pms:
            raise ValueError(f"reservation names {h}, which is not a PM")
        if count > avail.free_slots(h):
            raise ValueError(f"PM {h}: reserved {count} slots exceed {avail.free_slots(h)} available")
    for v, amount in alloc.bw_per_link.items():
        if v not in topo.nodes() or v == topo.root:
            raise ValueError(f"reservation names link child {v}, which is not a non-root node")
        if amount > avail.free_bw(v):
            raise ValueError(f"link {v}: reserved {amount} Mbps exceed {avail.free_bw(v)} available")


def verify_svce(topo: Topology, req: Request, alloc: SvceAllocation,
                avail: ResourceView | None = None) -> SurvivabilityReport:
    """Check every single-PM failure: a working embedding of the request must
    exist in the auxiliary topology of each.

    Raises ValueError when the reservation oversteps the capacities it is
    checked against (the raw topology unless ``avail`` narrows it).
    """
    if avail is None:
        avail = ResourceView.pristine(topo)
    _validate_against_capacity(topo, alloc, avail)
    rws: dict[FailureScenario, VceAllocation] = {}
    spare_recovery: VceAllocation | None = None
    for failed in sorted(topo.pms):
        scenario = FailureScenario(failed)
        if alloc.vm_on(failed) == 0:
            # nothing reserved there, so any embedding inside the untouched
            # reservation doubles as this failure's recovery
            if spare_recovery is None:
                masked = {h: alloc.vm_on(h) for h in topo.pms}
                view = ResourceView(topo, masked,
                                    {v: alloc.bw_on(v) for v in topo.nodes() if v != topo.root})
                spare_recovery = find_feasible_vce(topo, req, math.inf, view)
                if spare_recovery is None:
                    return SurvivabilityReport(False, None, None, scenario)
            rws[scenario] = spare_recovery
            continue
        aux = auxiliary_topology(topo, alloc, scenario)
        recovery = find_feasible_vce(aux, req, math.inf, ResourceView.pristine(aux))
        if recovery is None:
            return SurvivabilityReport(False, None, None, scenario)
        rws[scenario] = recovery
    first = FailureScenario(min(topo.pms))
    return SurvivabilityReport(True, rws, rws[first], None)


class OracleLimitError(RuntimeError):
    """The instance is too large for exhaustive enumeration."""


def _subtree_count_sets(topo: Topology, req: Request, slot_caps: dict[int, int],
                        bw_of) -> dict[int, set[int]]:
    """For every node, the set of VM counts its subtree can hold in a valid
    embedding (direct set arithmetic, no interval machinery)."""
    n, b = req.n_vms, req.bw_mbps
    sets: dict[int, set[int]] = {}
    for v in topo.postorder():
        if topo.is_pm(v):
            base = set(range(0, min(slot_caps.get(v, 0), n) + 1))
        else:
            base = {0}
            for child in topo.children(v):
                base = {x + y for x in base for y in sets[child] if x + y <= n}
        limit = bw_of(v)
        sets[v] = {m for m in base if min(m, n - m) * b <= limit}
    return sets


def _extract_embedding(topo: Topology, req: Request, sets: dict[int, set[int]],
                       node: int, amount: int, out: dict[int, int]) -> bool:
    if topo.is_pm(node):
        if amount:
            out[node] = amount
        return True
    remaining = amount
    children = topo.children(node)
    chosen: list[int] = []
    if not _pick_counts(children, sets, remaining, chosen):
        return False
    for child, picked in zip(children, chosen):
        if not _extract_embedding(topo, req, sets, child, picked, out):
            return False
    return True


def _pick_counts(children, sets, remaining, chosen) -> bool:
    if not children:
        return remaining == 0
    head, tail = children[0], children[1:]
    for value in sorted(sets[head], reverse=True):
        if value > remaining:
            continue
        chosen.append(value)
        if _pick_counts(tail, sets, remaining - value, chosen):
            return True
        chosen.pop()
    return False


def brute_force_oracle(topo: Topology, req: Request,
                       avail: ResourceView | None = None,
                       max_candidates: int = 2_000_000) -> SvceAllocation | None:
    """Minimal survivable reservation by enumeration.

    Walks candidate slot reservations in increasing total, lexicographic
    within a total, and returns the first one for which every failure leaves a
    working embedding (checked by direct set arithmetic against the raw link
    bandwidths).  Refuses instances whose enumeration space exceeds
    ``max_candidates``.
    """
    if avail is None:
        avail = ResourceView.pristine(topo)
    n = req.n_vms
    pms = sorted(topo.pms)
    caps = [min(avail.free_slots(h), n) for h in pms]
    space = 1
    for c in caps:
        space *= c + 1
        if space > max_candidates:
            raise OracleLimitError(
                f"enumeration space exceeds {max_candidates} candidates "
                f"({len(pms)} PMs, caps {caps})")
    bound = min(2 * n, sum(caps))

    def feasible(counts: dict[int, int]) -> bool:
        for failed in pms:
            if counts.get(failed, 0) == 0:
                continue
            masked = dict(counts)
            masked[failed] = 0
            sets = _subtree_count_sets(topo, req, masked, avail.free_bw)
            if n not in sets[topo.root]:
                return False
        return True

    for total in range(n, bound + 1):
        for combo in _compositions(caps, total):
            counts = {h: c for h, c in zip(pms, combo) if c}
            if not feasible(counts):
                continue
            bw: dict[int, float] = {}
            for failed in pms:
                if counts.get(failed, 0) == 0:
                    continue
                masked = dict(counts)
                masked[failed] = 0
                sets = _subtree_count_sets(topo, req, masked, avail.free_bw)
                placement: dict[int, int] = {}
                ok = _extract_embedding(topo, req, sets, topo.root, n, placement)
                assert ok, "count sets admitted the total but extraction failed"
                for v, amount in _bandwidth_for(topo, req, placement).items():
                    if amount > bw.get(v, 0.0):
                        bw[v] = amount
            return SvceAllocation(counts, bw)
    return None


def _compositions(caps: list[int], total: int):
    """All tuples with 0 <= x_i <= caps[i] summing to total, lexicographic."""
    out = [0] * len(caps)

    def rec(i: int, remaining: int):
        if i == len(caps) - 1:
            if remaining <= caps[i]:
                out[i] = remaining
                yield tuple(out)
            return
        tail_cap = sum(caps[i + 1:])
        lo = max(0, remaining - tail_cap)
        for x in range(lo, min(caps[i], remaining) + 1):
            out[i] = x
            yield from rec(i + 1, remaining - x)

    yield from rec(0, total)
