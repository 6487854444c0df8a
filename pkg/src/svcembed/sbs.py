"""Shadow-based baseline: one primary embedding plus a full duplicate on
disjoint PMs, both with their bandwidth reserved."""

from __future__ import annotations

import math

from .resources import ResourceView
from .topology import Request, Topology
from .vce import (SvceAllocation, VceAllocation, _ar_bits, _bandwidth_for,
                  _cut_mask, _minkowski_mask, _window)


class _Packer:
    """Greedy PM-count minimizer inside one subtree.

    Keeps the offerable-count mask of every node under the current pins and
    recomputes only the leaf-to-subtree-root path when a pin changes, so each
    trial costs a handful of integer operations.
    """

    def __init__(self, topo: Topology, best: int, req: Request, avail: ResourceView,
                 bits: dict[int, int]):
        self.topo = topo
        self.best = best
        self.req = req
        self.avail = avail
        self.total = req.n_vms
        self.full = _window(0, self.total)
        nodes = topo.subtree(best)
        self.masks = {v: bits[v] for v in nodes}
        self.cuts: dict[int, int] = {}
        for v in nodes:
            bandwidth = avail.free_bw(v)
            if req.bw_mbps > 0 and 2.0 * bandwidth < self.total * req.bw_mbps:
                self.cuts[v] = _cut_mask(self.total, req.bw_mbps, bandwidth)
            else:
                self.cuts[v] = self.full
        self.pms = [h for h in nodes if topo.is_pm(h)]

    def _leaf_mask(self, h: int, lo: int) -> int:
        hi = min(self.avail.free_slots(h), self.total)
        return _window(lo, hi) & self.cuts[h]

    def _recompute_up(self, h: int) -> list[tuple[int, int]]:
        undo = []
        v = h
        while v != self.best:
            v = self.topo.parent(v)
            acc = 1
            for c in self.topo.children(v):
                acc = _minkowski_mask(acc, self.masks[c], self.full)
            acc &= self.cuts[v]
            undo.append((v, self.masks[v]))
            self.masks[v] = acc
        return undo

    def pack(self) -> dict[int, int]:
        total = self.total
        if self.topo.is_pm(self.best):
            return {self.best: total}
        probe = 1 << total
        pinned: dict[int, int] = {}
        assigned = 0
        exhausted: set[int] = set()
        while assigned < total:
            candidates = sorted(
                (h for h in self.pms
                 if h not in exhausted and self.avail.free_slots(h) > pinned.get(h, 0)),
                key=lambda h: (-(self.avail.free_slots(h) - pinned.get(h, 0)), h))
            progressed = False
            for h in candidates:
                already = pinned.get(h, 0)
                hi = min(self.avail.free_slots(h), already + (total - assigned))
                saved_leaf = self.masks[h]
                picked = None
                for count in range(hi, already, -1):
                    self.masks[h] = self._leaf_mask(h, count)
                    undo = self._recompute_up(h)
                    if self.masks[self.best] & probe:
                        picked = count
                        break
                    for v, prev in undo:
                        self.masks[v] = prev
                    self.masks[h] = saved_leaf
                exhausted.add(h)
                if picked is not None:
                    pinned[h] = picked
                    assigned += picked - already
                    progressed = True
                    break
            if not progressed:
                raise RuntimeError("packing stalled although the subtree admits the request")
        return {h: c for h, c in pinned.items() if c}


def _pack_few_pms(topo: Topology, req: Request, avail: ResourceView) -> VceAllocation | None:
    """Embed the request trying to touch few PMs: pick the deepest subtree that
    can host it, then repeatedly fill the PM with the most free slots as far
    as the remaining offerable ranges allow."""
    total = req.n_vms
    bits = _ar_bits(topo, total, req.bw_mbps, math.inf, avail)
    probe = 1 << total
    best = None
    best_depth = -1
    for v in topo.preorder():
        if bits[v] & probe and topo.depth(v) > best_depth:
            best = v
            best_depth = topo.depth(v)
    if best is None:
        return None
    block = {v: bits[v] for v in topo.subtree(best)}
    placement = _Packer(topo, best, req, avail, block).pack()
    return VceAllocation(placement, _bandwidth_for(topo, req, placement, within=best))


def solve_sbs_parts(topo: Topology, req: Request, avail: ResourceView
                    ) -> tuple[VceAllocation, VceAllocation] | None:
    """The primary embedding and its shadow on disjoint PMs, or None.

    The shadow runs the same packing on the residual network with the primary
    PMs masked out, so the two PM sets can never overlap.
    """
    primary = _pack_few_pms(topo, req, avail)
    if primary is None:
        return None
    residual = avail.copy()
    residual.reserve(dict(primary.vm_per_pm), dict(primary.bw_per_link))
    masked = {h: 0 if h in primary.vm_per_pm else residual.free_slots(h) for h in topo.pms}
    shadow = _pack_few_pms(topo, req, residual.with_slots(masked))
    if shadow is None:
        return None
    return primary, shadow


def solve_sbs(topo: Topology, req: Request,
              avail: ResourceView | None = None) -> SvceAllocation | None:
    """Accept only when both the primary and its shadow fit; slot and
    bandwidth reservations of the two embeddings add up."""
    if avail is None:
        avail = ResourceView.pristine(topo)
    parts = solve_sbs_parts(topo, req, avail)
    if parts is None:
        return None
    primary, shadow = parts
    merged_vm = dict(primary.vm_per_pm)
    for h, c in shadow.vm_per_pm.items():
        merged_vm[h] = merged_vm.get(h, 0) + c
    merged_bw = dict(primary.bw_per_link)
    for v, b in shadow.bw_per_link.items():
        merged_bw[v] = merged_bw.get(v, 0.0) + b
    return SvceAllocation(merged_vm, merged_bw)
