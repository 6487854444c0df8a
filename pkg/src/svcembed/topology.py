"""Tree data model of the data center plus hose-model primitives.

The substrate is a rooted tree whose leaves are physical machines (PMs)
with VM slots and whose inner nodes are (abstract) switches.  Every
non-root node owns the link towards its parent, carrying the available
bandwidth of that link in Mbps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

PM = "pm"
SWITCH = "switch"


class TopologyError(ValueError):
    """Raised for malformed topology documents or invariant violations."""


@dataclass(frozen=True)
class Request:
    """Tenant demand: ``n_vms`` uniform VMs, each with ``bw_mbps`` hose bandwidth."""

    n_vms: int
    bw_mbps: float

    def __post_init__(self):
        if self.n_vms < 1:
            raise ValueError(f"request needs at least one VM, got {self.n_vms}")
        if not (self.bw_mbps >= 0) or math.isinf(self.bw_mbps):
            raise ValueError(f"per-VM bandwidth must be finite and >= 0, got {self.bw_mbps}")


def hose_bandwidth(n_inside: int, req: Request) -> float:
    """Bandwidth a link must carry when ``n_inside`` of the request's VMs sit below it.

    Whichever side of the link holds fewer VMs bounds the traffic:
    ``min(n_inside, N - n_inside) * B``.
    """
    if n_inside < 0 or n_inside > req.n_vms:
        raise ValueError(f"VM count {n_inside} outside [0, {req.n_vms}]")
    return min(n_inside, req.n_vms - n_inside) * req.bw_mbps


def bw_quota(bandwidth: float, per_vm: float, hi: int) -> int:
    """Largest integer k in [0, hi] with ``k * per_vm <= bandwidth``.

    Uses multiplication rather than division so comparisons stay exact on
    multiples of ``per_vm``.
    """
    if per_vm <= 0 or math.isinf(bandwidth):
        return hi
    k = min(hi, int(bandwidth // per_vm))
    while k < hi and (k + 1) * per_vm <= bandwidth:
        k += 1
    while k > 0 and k * per_vm > bandwidth:
        k -= 1
    return k


@dataclass(frozen=True)
class FeasibleRange:
    """Set of per-subtree VM counts a link bandwidth admits.

    Membership is ``[0, lower_hi]`` plus, when present, ``[upper_lo, n_total]``.
    ``upper_lo`` is absent whenever the two bands already cover every integer
    in ``[0, n_total]``.
    """

    n_total: int
    lower_hi: int
    upper_lo: int | None

    def contains(self, count: int) -> bool:
        if count < 0 or count > self.n_total:
            return False
        if self.upper_lo is None:
            return True
        return count <= self.lower_hi or count >= self.upper_lo

    def clamp_up(self, count: int) -> int | None:
        """Smallest admissible count >= ``count``; None when there is none."""
        if self.contains(count):
            return count
        if self.upper_lo is not None and self.upper_lo >= count:
            return self.upper_lo
        return None

    def intervals(self) -> list[tuple[int, int]]:
        if self.upper_lo is None or self.upper_lo <= self.lower_hi + 1:
            return [(0, self.n_total)]
        return [(0, self.lower_hi), (self.upper_lo, self.n_total)]


def feasible_range(n_total: int, per_vm: float, bandwidth: float) -> FeasibleRange:
    """Integer counts n with ``min(n, N - n) * B <= bandwidth``.

    A per-VM demand of zero (or unbounded bandwidth) admits everything.
    """
    quota = bw_quota(bandwidth, per_vm, n_total)
    lower_hi = quota
    upper_lo = None
    if per_vm > 0 and not math.isinf(bandwidth) and 2.0 * bandwidth < n_total * per_vm:
        upper_lo = n_total - quota
    return FeasibleRange(n_total, lower_hi, upper_lo)


class Topology:
    """Immutable rooted tree of switches and PM leaves."""

    def __init__(self, root: int, nodes: Iterable[tuple[int, str, int | None, int | None, float | None]]):
        """``nodes`` holds (id, kind, parent, slots, bw_mbps) records.

        Children order follows the order of appearance of the records.
        """
        self.root = root
        self._kind: dict[int, str] = {}
        self._parent: dict[int, int | None] = {}
        self._children: dict[int, list[int]] = {}
        self._slots: dict[int, int] = {}
        self._bw: dict[int, float] = {}
        for node_id, kind, parent, slots, bw in nodes:
            if node_id in self._kind:
                raise TopologyError(f"duplicate node id {node_id}")
            if node_id < 0:
                raise TopologyError(f"negative node id {node_id}")
            if kind not in (PM, SWITCH):
                raise TopologyError(f"node {node_id}: unknown kind {kind!r}")
            self._kind[node_id] = kind
            self._parent[node_id] = parent
            self._children.setdefault(node_id, [])
            if kind == PM:
                if slots is None or slots < 0:
                    raise TopologyError(f"node {node_id}: PM needs a non-negative slot count")
                self._slots[node_id] = int(slots)
            if node_id == root:
                if bw is not None:
                    raise TopologyError(f"node {node_id}: root must not carry an up-link bandwidth")
            else:
                if bw is None or not (bw >= 0) or math.isinf(bw):
                    raise TopologyError(f"node {node_id}: needs finite non-negative bandwidth")
                self._bw[node_id] = float(bw)
            if parent is not None:
                if parent not in self._children:
                    self._children[parent] = []
                self._children[parent].append(node_id)
        self._validate()
        self._preorder = tuple(self._walk_preorder())
        self._postorder = tuple(reversed(self._preorder))
        self._depth: dict[int, int] = {self.root: 0}
        for v in self._preorder:
            for c in self._children[v]:
                self._depth[c] = self._depth[v] + 1
        self.pms: tuple[int, ...] = tuple(v for v in self._preorder if self._kind[v] == PM)
        self.switches: tuple[int, ...] = tuple(v for v in self._preorder if self._kind[v] == SWITCH)
        self._dense = None

    def _validate(self):
        if self.root not in self._kind:
            raise TopologyError(f"root {self.root} is not a declared node")
        if self._kind[self.root] != SWITCH:
            raise TopologyError(f"root {self.root} must be a switch")
        if self._parent[self.root] is not None:
            raise TopologyError(f"root {self.root} must not have a parent")
        for v, parent in self._parent.items():
            if v == self.root:
                continue
            if parent is None:
                raise TopologyError(f"node {v}: only the root may lack a parent")
            if parent not in self._kind:
                raise TopologyError(f"node {v}: parent {parent} is not a declared node")
        for v, kind in self._kind.items():
            if kind == PM and self._children[v]:
                raise TopologyError(f"node {v}: PM must be a leaf")
        # single connected tree: everything reachable from the root, no repeats
        seen = set()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v in seen:
                raise TopologyError(f"node {v}: cycle detected")
            seen.add(v)
            stack.extend(self._children[v])
        if len(seen) != len(self._kind):
            missing = sorted(set(self._kind) - seen)
            raise TopologyError(f"nodes not connected to the root: {missing}")

    def _walk_preorder(self) -> Iterator[int]:
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(self._children[v]))

    # accessors -----------------------------------------------------------
    def is_pm(self, v: int) -> bool:
        return self._kind[v] == PM

    def kind(self, v: int) -> str:
        return self._kind[v]

    def parent(self, v: int) -> int | None:
        return self._parent[v]

    def children(self, v: int) -> tuple[int, ...]:
        return tuple(self._children[v])

    def slots(self, v: int) -> int:
        return self._slots[v]

    def bw(self, v: int) -> float:
        """Bandwidth of the link from v towards the root; unbounded for the root."""
        if v == self.root:
            return math.inf
        return self._bw[v]

    def depth(self, v: int) -> int:
        return self._depth[v]

    def preorder(self) -> tuple[int, ...]:
        return self._preorder

    def postorder(self) -> tuple[int, ...]:
        """Children always precede their parent."""
        return self._postorder

    def nodes(self) -> tuple[int, ...]:
        return self._preorder

    def subtree(self, v: int) -> tuple[int, ...]:
        """Preorder walk of the subtree rooted at v."""
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(reversed(self._children[u]))
        return tuple(out)

    def dense(self) -> "DenseIndex":
        """Preorder-indexed array view of the tree (cached); subtrees occupy
        contiguous index blocks."""
        if self._dense is None:
            self._dense = DenseIndex(self)
        return self._dense

    def records(self) -> list[tuple[int, str, int | None, int | None, float | None]]:
        out = []
        for v in self._preorder:
            out.append((
                v,
                self._kind[v],
                self._parent[v],
                self._slots.get(v),
                self._bw.get(v) if v != self.root else None,
            ))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return self.root == other.root and self.records() == other.records()

    def __repr__(self) -> str:
        return f"Topology(root={self.root}, pms={len(self.pms)}, switches={len(self.switches)})"


class DenseIndex:
    """Array mirror of a topology, indexed by preorder position."""

    def __init__(self, topo: Topology):
        import numpy as np

        order = topo.preorder()
        count = len(order)
        self.ids = np.fromiter(order, dtype=np.int64, count=count)
        self.position = {v: i for i, v in enumerate(order)}
        self.parent = np.full(count, -1, dtype=np.int64)
        self.is_pm = np.zeros(count, dtype=np.bool_)
        self.depth = np.zeros(count, dtype=np.int64)
        self.slots = np.zeros(count, dtype=np.int64)
        self.subtree_end = np.zeros(count, dtype=np.int64)
        for i, v in enumerate(order):
            parent = topo.parent(v)
            self.parent[i] = -1 if parent is None else self.position[parent]
            self.is_pm[i] = topo.is_pm(v)
            self.depth[i] = topo.depth(v)
            if topo.is_pm(v):
                self.slots[i] = topo.slots(v)
        # subtree of i spans indices [i, subtree_end[i])
        sizes = [1] * count
        for i in range(count - 1, 0, -1):
            sizes[self.parent[i]] += sizes[i]
        for i in range(count):
            self.subtree_end[i] = i + sizes[i]


# builders ------------------------------------------------------------------

def build_kary_tree(levels: int, arity: int, slots_per_pm: int, edge_bw: float,
                    upper_bw: float) -> Topology:
    """Uniform tree: ``levels - 1`` switch layers above one PM layer.

    PM up-links get ``edge_bw``; every switch-to-switch link gets ``upper_bw``.
    Node ids are assigned breadth-first from the root, so PMs occupy the
    highest ids.
    """
    if levels < 2:
        raise ValueError(f"need at least 2 levels, got {levels}")
    if arity < 1:
        raise ValueError(f"arity must be positive, got {arity}")
    if slots_per_pm < 0:
        raise ValueError(f"slots must be non-negative, got {slots_per_pm}")
    records = [(0, SWITCH, None, None, None)]
    frontier = [0]
    next_id = 1
    for level in range(1, levels):
        is_pm_layer = level == levels - 1
        new_frontier = []
        for parent in frontier:
            for _ in range(arity):
                if is_pm_layer:
                    records.append((next_id, PM, parent, slots_per_pm, edge_bw))
                else:
                    records.append((next_id, SWITCH, parent, None, upper_bw))
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return Topology(0, records)


def abstract_fattree(k: int, slots_per_pm: int, host_bw: float,
                     fabric_link_bw: float) -> Topology:
    """Tree abstraction of a k-ary FatTree.

    Switches and links that connect the same lower-layer node set collapse
    into one abstract switch or link whose bandwidth is the sum of the member
    links: the core layer becomes the root, the k/2 aggregation switches of a
    pod become one pod switch, and edge switches stay distinct.  Hosts number
    k^3/4 with ``slots_per_pm`` VM slots each.
    """
    if k < 2 or k % 2 != 0:
        raise ValueError(f"FatTree arity must be even and >= 2, got {k}")
    half = k // 2
    records = [(0, SWITCH, None, None, None)]
    next_id = 1
    pod_switches = []
    for _ in range(k):
        # one abstract pod switch replaces k/2 aggregation switches; its
        # up-link aggregates the (k/2)^2 physical agg-to-core links
        records.append((next_id, SWITCH, 0, None, half * half * fabric_link_bw))
        pod_switches.append(next_id)
        next_id += 1
    edge_switches = []
    for pod in pod_switches:
        for _ in range(half):
            # each edge switch keeps its identity; its up-link aggregates the
            # k/2 physical edge-to-aggregation links
            records.append((next_id, SWITCH, pod, None, half * fabric_link_bw))
            edge_switches.append(next_id)
            next_id += 1
    for edge in edge_switches:
        for _ in range(half):
            records.append((next_id, PM, edge, slots_per_pm, host_bw))
            next_id += 1
    return Topology(0, records)


# serialization ---------------------------------------------------------------

def save_topology(topo: Topology) -> str:
    nodes = []
    for node_id, kind, parent, slots, bw in topo.records():
        rec: dict = {"id": node_id, "kind": kind, "parent": parent}
        if kind == PM:
            rec["slots"] = slots
        if bw is not None:
            rec["bw_mbps"] = bw
        nodes.append(rec)
    return json.dumps({"root": topo.root, "nodes": nodes}, indent=2) + "\n"


def load_topology(data: str | bytes) -> Topology:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"not a valid topology document: {exc}") from exc
    if not isinstance(doc, dict) or "root" not in doc or "nodes" not in doc:
        raise TopologyError("topology document needs 'root' and 'nodes'")
    records = []
    for rec in doc["nodes"]:
        try:
            records.append((
                int(rec["id"]),
                rec["kind"],
                None if rec.get("parent") is None else int(rec["parent"]),
                rec.get("slots"),
                rec.get("bw_mbps"),
            ))
        except (TypeError, KeyError, ValueError) as exc:
            raise TopologyError(f"malformed node record {rec!r}: {exc}") from exc
    return Topology(int(doc["root"]), records)
