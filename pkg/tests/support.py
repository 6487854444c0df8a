"""Shared generators and brute-force cross-checks for the test suite."""

from __future__ import annotations

import random
from itertools import product

from svcembed import Request, ResourceView, SvceAllocation, Topology

BW_CHOICES = [0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 400.0, 1e6]
PER_VM_CHOICES = [0.0, 50.0, 100.0, 150.0, 300.0]


def four_pm_tree() -> Topology:
    """Two racks of two PMs (slots 4/3/3/3), every link 400 Mbps."""
    return Topology(0, [
        (0, "switch", None, None, None),
        (1, "switch", 0, None, 400.0),
        (2, "switch", 0, None, 400.0),
        (3, "pm", 1, 4, 400.0),
        (4, "pm", 1, 3, 400.0),
        (5, "pm", 2, 3, 400.0),
        (6, "pm", 2, 3, 400.0),
    ])


def random_tree(rng: random.Random, max_levels: int = 3, max_pms: int = 6,
                max_slots: int = 4, bw_choices=None) -> Topology:
    """Random rooted tree whose leaves are all PMs."""
    choices = BW_CHOICES if bw_choices is None else bw_choices
    records = [(0, "switch", None, None, None)]
    next_id = 1
    frontier = [0]
    for _ in range(rng.randint(0, max_levels - 2)):
        new = []
        for parent in frontier:
            for _ in range(rng.randint(1, 2)):
                records.append((next_id, "switch", parent, None, rng.choice(choices)))
                new.append(next_id)
                next_id += 1
        if new:
            frontier = new
    for _ in range(rng.randint(1, max_pms)):
        records.append((next_id, "pm", rng.choice(frontier), rng.randint(0, max_slots),
                        rng.choice(choices)))
        next_id += 1
    children: dict[int, list[int]] = {}
    for rid, _kind, parent, *_ in records:
        if parent is not None:
            children.setdefault(parent, []).append(rid)

    def has_pm(v: int) -> bool:
        if records[v][1] == "pm":
            return True
        return any(has_pm(c) for c in children.get(v, []))

    return Topology(0, [r for r in records if r[0] == 0 or has_pm(r[0])])


def random_instance(rng: random.Random, max_n: int = 6, **tree_kwargs):
    topo = random_tree(rng, **tree_kwargs)
    req = Request(rng.randint(1, max_n), rng.choice(PER_VM_CHOICES))
    return topo, req


def random_reservation(rng: random.Random, topo: Topology) -> SvceAllocation:
    """Arbitrary reservation within raw capacities (not necessarily survivable)."""
    vm = {}
    for h in topo.pms:
        c = rng.randint(0, topo.slots(h))
        if c:
            vm[h] = c
    bw = {}
    for v in topo.nodes():
        if v == topo.root:
            continue
        amount = rng.uniform(0.0, topo.bw(v)) if topo.bw(v) < 1e9 else rng.uniform(0, 1e4)
        if amount:
            bw[v] = amount
    return SvceAllocation(vm, bw)


def enumerate_offerable(topo: Topology, subtree_root: int, req: Request,
                        alloc: SvceAllocation) -> set[int]:
    """Offerable working-VM counts by direct enumeration over all per-PM splits."""
    pms = [h for h in topo.subtree(subtree_root) if topo.is_pm(h)]
    nodes = topo.subtree(subtree_root)
    offerable: set[int] = set()
    axes = [range(alloc.vm_on(h) + 1) for h in pms]
    for combo in product(*axes):
        counts = dict.fromkeys(nodes, 0)
        for h, c in zip(pms, combo):
            counts[h] = c
        for v in reversed(nodes):
            parent = topo.parent(v)
            if parent is not None and parent in counts:
                counts[parent] += counts[v]
        ok = True
        for v in nodes:
            if v == topo.root:
                continue
            need = max(0, min(counts[v], req.n_vms - counts[v])) * req.bw_mbps
            if need > alloc.bw_on(v):
                ok = False
                break
        if ok:
            offerable.add(counts[subtree_root])
    return offerable


def vce_exists_brute(topo: Topology, req: Request, slot_caps: dict[int, int],
                     avail: ResourceView) -> bool:
    """Plain embedding existence by per-node count-set folding."""
    n, b = req.n_vms, req.bw_mbps
    sets: dict[int, set[int]] = {}
    for v in topo.postorder():
        if topo.is_pm(v):
            base = set(range(0, min(slot_caps.get(v, 0), n) + 1))
        else:
            base = {0}
            for child in topo.children(v):
                base = {x + y for x in base for y in sets[child] if x + y <= n}
        sets[v] = {m for m in base if min(m, n - m) * b <= avail.free_bw(v)}
    return n in sets[topo.root]
