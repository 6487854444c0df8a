"""Bookkeeping of free VM slots and link bandwidth against a topology."""

from __future__ import annotations

import math

import numpy as np

from .topology import Topology


class ResourceView:
    """Mutable snapshot of free slots per PM and free bandwidth per link.

    Link bandwidth is keyed by the child endpoint of the link.  Releasing the
    last reservation on a link snaps its free bandwidth back to the initial
    value, so a fully drained view compares exactly equal to a pristine one.
    """

    def __init__(self, topo: Topology, free_slots: dict[int, int],
                 free_bw: dict[int, float]):
        self.topo = topo
        self._slots = dict(free_slots)
        self._bw = dict(free_bw)
        self._initial_bw = dict(free_bw)
        self._bw_holds = {v: 0 for v in self._bw}

    @classmethod
    def pristine(cls, topo: Topology) -> "ResourceView":
        slots = {h: topo.slots(h) for h in topo.pms}
        bw = {v: topo.bw(v) for v in topo.nodes() if v != topo.root}
        return cls(topo, slots, bw)

    def copy(self) -> "ResourceView":
        dup = ResourceView(self.topo, self._slots, self._bw)
        dup._initial_bw = dict(self._initial_bw)
        dup._bw_holds = dict(self._bw_holds)
        return dup

    def free_slots(self, h: int) -> int:
        return self._slots[h]

    def free_bw(self, v: int) -> float:
        if v == self.topo.root:
            return math.inf
        return self._bw[v]

    def with_slots(self, slots: dict[int, int]) -> "ResourceView":
        """Same bandwidth, slot capacities replaced (absent PMs get zero)."""
        new_slots = {h: slots.get(h, 0) for h in self._slots}
        return ResourceView(self.topo, new_slots, self._bw)

    def dense_state(self) -> tuple[np.ndarray, np.ndarray]:
        """(free slots, free bandwidth) by preorder index; the root and all
        switches read as unbounded / zero-slot respectively."""
        dense = self.topo.dense()
        slots = np.zeros(len(dense.ids), dtype=np.int64)
        bw = np.full(len(dense.ids), math.inf)
        position = dense.position
        for h, s in self._slots.items():
            slots[position[h]] = s
        for v, b in self._bw.items():
            bw[position[v]] = b
        return slots, bw

    def reserve(self, vm_per_pm: dict[int, int], bw_per_link: dict[int, float]):
        for h, count in vm_per_pm.items():
            if count > self._slots[h]:
                raise ValueError(f"PM {h}: reserving {count} slots but only {self._slots[h]} free")
        for v, amount in bw_per_link.items():
            if amount > self._bw[v]:
                raise ValueError(f"link {v}: reserving {amount} Mbps but only {self._bw[v]} free")
        for h, count in vm_per_pm.items():
            self._slots[h] -= count
        for v, amount in bw_per_link.items():
            if amount > 0:
                self._bw[v] -= amount
                self._bw_holds[v] += 1

    def release(self, vm_per_pm: dict[int, int], bw_per_link: dict[int, float]):
        for h, count in vm_per_pm.items():
            self._slots[h] += count
        for v, amount in bw_per_link.items():
            if amount > 0:
                self._bw_holds[v] -= 1
                if self._bw_holds[v] == 0:
                    self._bw[v] = self._initial_bw[v]
                else:
                    self._bw[v] += amount

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResourceView):
            return NotImplemented
        return self._slots == other._slots and self._bw == other._bw
