"""Non-survivable virtual cluster embedding: allocation ranges, the feasible
embedding solver with an optional per-PM cap, validators, and offerable-set
computation over an existing reservation.

The solver's bottom-up range pass keeps each node's offerable counts as a
bitmask (bit i set when the subtree can host exactly i VMs); the public
:class:`~svcembed.ranges.AllocationRange` view of the same sets stays an
interval list.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .ranges import AllocationRange
from .resources import ResourceView
from .topology import Request, Topology, feasible_range, hose_bandwidth

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class VceAllocation:
    """VM counts per PM plus reserved bandwidth per link (keyed by the link's
    child endpoint).  Zero entries are omitted."""

    vm_per_pm: Mapping[int, int]
    bw_per_link: Mapping[int, float]

    def vm_on(self, h: int) -> int:
        return self.vm_per_pm.get(h, 0)

    def bw_on(self, v: int) -> float:
        return self.bw_per_link.get(v, 0.0)

    @property
    def total_vms(self) -> int:
        return sum(self.vm_per_pm.values())

    def to_doc(self) -> str:
        doc = {
            "vms": [{"pm": h, "count": c} for h, c in sorted(self.vm_per_pm.items())],
            "bw_mbps": [{"link_child": v, "mbps": b} for v, b in sorted(self.bw_per_link.items())],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_doc(cls, data: str | bytes):
        doc = json.loads(data)
        vm = {int(rec["pm"]): int(rec["count"]) for rec in doc["vms"]}
        bw = {int(rec["link_child"]): float(rec["mbps"]) for rec in doc["bw_mbps"]}
        return cls(_drop_zeros(vm), _drop_zeros(bw))


class SvceAllocation(VceAllocation):
    """Survivable reservation: total slots and bandwidth set aside so a working
    embedding exists after any single PM failure."""


def _drop_zeros(mapping):
    return {k: v for k, v in mapping.items() if v}


@dataclass(frozen=True)
class Violation:
    """First broken embedding property: 1 slots, 2 bandwidth, 3 total count."""

    prop: int
    node: int | None
    detail: str


# bitmask primitives -----------------------------------------------------------

def _window(lo: int, hi: int) -> int:
    """Bits lo..hi set (empty when hi < lo)."""
    if hi < lo:
        return 0
    return ((1 << (hi - lo + 1)) - 1) << lo


def _smear(mask: int, width: int) -> int:
    """OR of ``mask << i`` for i in [0, width)."""
    covered = 1
    while covered < width:
        step = min(covered, width - covered)
        mask |= mask << step
        covered += step
    return mask


def _mask_to_intervals(mask: int) -> tuple[tuple[int, int], ...]:
    out = []
    while mask:
        lo = (mask & -mask).bit_length() - 1
        shifted = mask >> lo
        run = (~shifted & (shifted + 1)).bit_length() - 1
        out.append((lo, lo + run - 1))
        mask ^= _window(lo, lo + run - 1)
    return tuple(out)


def _minkowski_mask(acc: int, child_mask: int, limit_mask: int) -> int:
    """All sums of one count from acc and one from child, clipped."""
    out = 0
    for lo, hi in _mask_to_intervals(child_mask):
        out |= _smear(acc, hi - lo + 1) << lo
    return out & limit_mask


def _cut_mask(total: int, per_vm: float, bandwidth: float) -> int:
    """Bandwidth-admissible counts of [0, total] as a mask."""
    fr = feasible_range(total, per_vm, bandwidth)
    if fr.upper_lo is None:
        return _window(0, total)
    return _window(0, fr.lower_hi) | _window(fr.upper_lo, total)


def _ar_bits_py(topo: Topology, total: int, per_vm: float, per_pm_cap: int | float,
                avail: ResourceView, root: int | None = None) -> dict[int, int]:
    """Offerable-count bitmask of every node in the (sub)tree, bottom-up.

    Bit m is set exactly when the subtree can host m of ``total`` VMs while
    respecting free slots, the per-PM cap, and the hose bandwidth on every
    link inside and out-bound of the subtree.  Plain-int reference used when
    the jitted pass cannot run; masks here may exceed 64 bits.
    """
    nodes = topo.postorder() if root is None else tuple(reversed(topo.subtree(root)))
    pms = topo.pms if root is None else tuple(h for h in nodes if topo.is_pm(h))
    full = _window(0, total)
    bits = _leaf_bits(pms, total, per_vm, per_pm_cap, avail)
    for v in nodes:
        if topo.is_pm(v):
            continue
        acc = 1
        for child in topo.children(v):
            acc = _minkowski_mask(acc, bits[child], full)
        bandwidth = avail.free_bw(v)
        if per_vm > 0 and 2.0 * bandwidth < total * per_vm:
            acc &= _cut_mask(total, per_vm, bandwidth)
        bits[v] = acc if acc else 1
    return bits


if _HAVE_NUMBA:

    @njit(cache=True)
    def _mink64(acc, child, full):
        """Minkowski sum of two count masks in uint64, clipped to ``full``.

        Decomposes the child mask into runs of consecutive counts and smears
        the accumulator over each run; shift counts stay below 64 as long as
        the clip covers at most bit 62.
        """
        zero = np.uint64(0)
        one = np.uint64(1)
        out = zero
        m = child
        while m != zero:
            low = zero
            t = m
            while t & one == zero:
                t >>= one
                low += one
            run = zero
            while t & one == one:
                t >>= one
                run += one
            s = acc
            covered = one
            while covered < run:
                step = covered if covered <= run - covered else run - covered
                s |= s << step
                covered += step
            out |= s << low
            m ^= ((one << run) - one) << low
        return out & full

    @njit(cache=True)
    def _mask_pass_jit(start, end, parent, is_pm, masks, cuts, has_cut, full):
        """Bottom-up fold over one preorder block; ``masks`` starts as leaf
        masks on PMs and 1 (only-zero-offer) on switches."""
        one = np.uint64(1)
        zero = np.uint64(0)
        for i in range(end - 1, start - 1, -1):
            m = masks[i]
            if not is_pm[i]:
                if has_cut[i]:
                    m &= cuts[i]
                if m == zero:
                    m = one
                masks[i] = m
            if i != start:
                p = parent[i]
                masks[p] = _mink64(masks[p], m, full)


def _leaf_cut_arrays(dense, slots_arr: np.ndarray, bw_arr: np.ndarray, total: int,
                     per_vm: float, per_pm_cap: int | float):
    """Vector form of the leaf masks and per-switch bandwidth cut masks."""
    one = np.uint64(1)
    cap = int(min(per_pm_cap, total))
    tops = np.minimum(np.maximum(slots_arr, 0), cap)
    u_tops = tops.astype(np.uint64)
    win_tops = np.left_shift(one, u_tops + one) - one
    if per_vm <= 0:
        cut = np.zeros(len(tops), dtype=np.uint64)
        has_cut = np.zeros(len(tops), dtype=np.bool_)
        return win_tops, cut, has_cut
    quota = np.floor(bw_arr / per_vm)
    quota = np.where((quota + 1.0) * per_vm <= bw_arr, quota + 1.0, quota)
    quota = np.where(quota * per_vm > bw_arr, quota - 1.0, quota)
    quota = np.minimum(quota, float(total))
    q = quota.astype(np.int64)
    full_range = 2.0 * bw_arr >= total * per_vm
    up_lo = (total - q).astype(np.uint64)
    low = np.left_shift(one, np.minimum(q, tops).astype(np.uint64) + one) - one
    width = np.maximum(tops - (total - q) + 1, 0).astype(np.uint64)
    upper = np.left_shift(np.left_shift(one, width) - one, up_lo)
    leaf = np.where(full_range, win_tops, low | upper)
    band = np.left_shift(one, q.astype(np.uint64) + one) - one
    cut = band | np.left_shift(band, up_lo)
    has_cut = ~full_range & ~dense.is_pm
    return leaf, cut, has_cut


def _ar_bits_dense(topo: Topology, total: int, per_vm: float,
                   per_pm_cap: int | float, avail: ResourceView,
                   state: tuple[np.ndarray, np.ndarray] | None = None,
                   root: int | None = None):
    """Offerable-count masks as a preorder-indexed uint64 array (jitted path).

    Only valid for totals up to 62 (masks must fit a machine word); callers
    fall back to :func:`_ar_bits_py` beyond that.
    """
    dense = topo.dense()
    start = 0 if root is None else dense.position[root]
    end = len(dense.ids) if root is None else int(dense.subtree_end[start])
    if state is None:
        state = avail.dense_state()
    slots_arr, bw_arr = state
    leaf, cut, has_cut = _leaf_cut_arrays(dense, slots_arr, bw_arr, total,
                                          per_vm, per_pm_cap)
    masks = np.where(dense.is_pm, leaf, np.uint64(1))
    _mask_pass_jit(start, end, dense.parent, dense.is_pm, masks, cut, has_cut,
                   np.uint64(_window(0, total)))
    return masks, dense


def _use_dense(total: int) -> bool:
    return _HAVE_NUMBA and total <= 62


def _ar_bits(topo: Topology, total: int, per_vm: float, per_pm_cap: int | float,
             avail: ResourceView, root: int | None = None) -> dict[int, int]:
    """Dict view of the offerable-count masks, whichever path computes them."""
    if _use_dense(total):
        masks, dense = _ar_bits_dense(topo, total, per_vm, per_pm_cap, avail, root=root)
        start = 0 if root is None else dense.position[root]
        end = len(dense.ids) if root is None else int(dense.subtree_end[start])
        return {int(dense.ids[i]): int(masks[i]) for i in range(start, end)}
    return _ar_bits_py(topo, total, per_vm, per_pm_cap, avail, root)


def _leaf_bits(pms, total: int, per_vm: float, per_pm_cap: int | float,
               avail: ResourceView) -> dict[int, int]:
    count = len(pms)
    cap = min(per_pm_cap, total)
    slots = np.fromiter((avail.free_slots(h) for h in pms), dtype=np.int64, count=count)
    tops = np.minimum(slots, cap)
    bits: dict[int, int] = {}
    if per_vm <= 0:
        for h, m in zip(pms, tops):
            bits[h] = _window(0, int(m))
        return bits
    bw = np.fromiter((avail.free_bw(h) for h in pms), dtype=np.float64, count=count)
    quota = np.floor(bw / per_vm)
    quota = np.where((quota + 1) * per_vm <= bw, quota + 1, quota)
    quota = np.where(quota * per_vm > bw, quota - 1, quota)
    quota = np.minimum(quota, total).astype(np.int64)
    full = 2.0 * bw >= total * per_vm
    for i, h in enumerate(pms):
        m = int(tops[i])
        if full[i]:
            bits[h] = _window(0, m)
        else:
            q = int(quota[i])
            bits[h] = _window(0, min(q, m)) | _window(total - q, m)
    return bits


def compute_ar(topo: Topology, v: int, total: int, per_vm_bw: float,
               per_pm_cap: int | float, avail: ResourceView) -> AllocationRange:
    """Offerable VM counts of the subtree rooted at v for a ``total``-VM request."""
    if _use_dense(total):
        masks, dense = _ar_bits_dense(topo, total, per_vm_bw, per_pm_cap, avail, root=v)
        mask = int(masks[dense.position[v]])
    else:
        mask = _ar_bits_py(topo, total, per_vm_bw, per_pm_cap, avail, root=v)[v]
    return AllocationRange(_mask_to_intervals(mask))


def _split_into_children(topo: Topology, v: int, amount: int,
                         bits: dict[int, int], total: int,
                         out: dict[int, int]):
    """Distribute ``amount`` VMs over v's subtree; greedy-max on the leftmost
    child first, kept exact by suffix Minkowski masks of the remaining ranges."""
    if topo.is_pm(v):
        if amount:
            out[v] = amount
        return
    children = topo.children(v)
    full = _window(0, total)
    suffix = [1] * (len(children) + 1)
    for i in range(len(children) - 1, -1, -1):
        suffix[i] = _minkowski_mask(suffix[i + 1], bits[children[i]], full)
    remaining = amount
    for i, child in enumerate(children):
        candidates = bits[child] & _window(0, remaining)
        rest = suffix[i + 1]
        picked = None
        while candidates:
            a = candidates.bit_length() - 1
            if (rest >> (remaining - a)) & 1:
                picked = a
                break
            candidates ^= 1 << a
        if picked is None:
            raise RuntimeError(f"allocation split failed at node {v}")
        if picked:
            _split_into_children(topo, child, picked, bits, total, out)
        remaining -= picked
    if remaining:
        raise RuntimeError(f"allocation split left {remaining} VMs at node {v}")


def _bandwidth_for(topo: Topology, req: Request, vm_per_pm: dict[int, int],
                   within: int | None = None) -> dict[int, float]:
    """Hose bandwidth of every link given the VM placement (zeros dropped).

    When the placement is known to live inside one subtree, links outside it
    carry the full request on one side and nothing on the other, so only the
    subtree needs walking.
    """
    nodes = topo.postorder() if within is None else tuple(reversed(topo.subtree(within)))
    counts = dict.fromkeys(nodes, 0)
    for h, c in vm_per_pm.items():
        counts[h] = c
    for v in nodes:
        parent = topo.parent(v)
        if parent is not None and parent in counts:
            counts[parent] += counts[v]
    bw = {}
    for v in nodes:
        if v == topo.root:
            continue
        need = hose_bandwidth(counts[v], req)
        if need:
            bw[v] = need
    return bw


def find_feasible_vce(topo: Topology, req: Request, per_pm_cap: int | float,
                      avail: ResourceView,
                      _state: tuple[np.ndarray, np.ndarray] | None = None
                      ) -> VceAllocation | None:
    """Embed the full request in the lowest subtree able to host it.

    Ties between equally deep subtrees go to the leftmost one.  Returns None
    when no subtree can offer all requested VMs under the cap.
    """
    total = req.n_vms
    if _use_dense(total):
        masks, dense = _ar_bits_dense(topo, total, req.bw_mbps, per_pm_cap, avail,
                                      state=_state)
        hosts = np.nonzero((masks >> np.uint64(total)) & np.uint64(1))[0]
        if not hosts.size:
            return None
        # preorder indices ascend left to right, so the first deepest hit wins
        pos = int(hosts[np.argmax(dense.depth[hosts])])
        best = int(dense.ids[pos])
        bits = {int(dense.ids[i]): int(masks[i])
                for i in range(pos, int(dense.subtree_end[pos]))}
    else:
        bits = _ar_bits_py(topo, total, req.bw_mbps, per_pm_cap, avail)
        probe = 1 << total
        best = None
        best_depth = -1
        for v in topo.preorder():
            if bits[v] & probe and topo.depth(v) > best_depth:
                best = v
                best_depth = topo.depth(v)
        if best is None:
            return None
    placement: dict[int, int] = {}
    _split_into_children(topo, best, total, bits, total, placement)
    return VceAllocation(placement, _bandwidth_for(topo, req, placement, within=best))


def check_vce(topo: Topology, req: Request, alloc: VceAllocation,
              avail: ResourceView) -> Violation | None:
    """Validate the three embedding properties; None when the allocation holds."""
    for h in alloc.vm_per_pm:
        if h not in topo.pms:
            raise ValueError(f"allocation names {h}, which is not a PM")
    for v in alloc.bw_per_link:
        if v not in topo.nodes() or v == topo.root:
            raise ValueError(f"allocation names link child {v}, which is not a non-root node")
    counts = {v: 0 for v in topo.nodes()}
    for h, c in alloc.vm_per_pm.items():
        counts[h] = c
    for v in topo.postorder():
        parent = topo.parent(v)
        if parent is not None:
            counts[parent] += counts[v]
    for h in topo.pms:
        if alloc.vm_on(h) > avail.free_slots(h):
            return Violation(1, h, f"PM {h}: {alloc.vm_on(h)} VMs > {avail.free_slots(h)} free slots")
    for v in topo.nodes():
        if v == topo.root:
            continue
        # clamp keeps the hose formula defined even when the total is off;
        # a wrong total is reported as property 3 below
        inside = min(counts[v], req.n_vms)
        need = hose_bandwidth(inside, req)
        if alloc.bw_on(v) != need:
            return Violation(2, v, f"link {v}: reserved {alloc.bw_on(v)} Mbps, hose needs {need}")
        if need > avail.free_bw(v):
            return Violation(2, v, f"link {v}: hose needs {need} Mbps > {avail.free_bw(v)} free")
    if counts[topo.root] != req.n_vms:
        return Violation(3, None, f"allocated {counts[topo.root]} VMs, requested {req.n_vms}")
    return None


def _hose_feasible(limit_bw: float, n_total: int, per_vm: float, hi: int) -> AllocationRange:
    """Counts m in [0, hi] with max(0, min(m, n_total - m)) * per_vm <= limit_bw.

    Counts above n_total need no bandwidth at all (everything sits inside).
    """
    if per_vm <= 0 or math.isinf(limit_bw):
        return AllocationRange.span(0, hi)
    fr = feasible_range(n_total, per_vm, limit_bw)
    quota = fr.lower_hi
    pieces = [(0, min(quota, hi))]
    upper_lo = max(n_total - quota, 0)
    if upper_lo <= hi:
        pieces.append((upper_lo, hi))
    return AllocationRange.from_intervals(pieces)


def offerable_set(topo: Topology, subtree_root: int, req: Request,
                  fixed_alloc: SvceAllocation) -> AllocationRange:
    """Working-VM counts the subtree can activate using only the reservation.

    A count m needs max(0, min(m, N - m)) * B on each crossed link; the domain
    extends past N up to the subtree's reserved slots, where the requirement
    clamps to zero.
    """
    order = tuple(reversed(topo.subtree(subtree_root)))
    ars: dict[int, AllocationRange] = {}
    capacity: dict[int, int] = {}
    for v in order:
        if topo.is_pm(v):
            capacity[v] = fixed_alloc.vm_on(v)
            base = AllocationRange.span(0, capacity[v])
        else:
            capacity[v] = sum(capacity[c] for c in topo.children(v))
            base = AllocationRange.zero()
            for child in topo.children(v):
                base = base.minkowski_sum(ars[child])
        if v == topo.root:
            ars[v] = base
        else:
            cut = _hose_feasible(fixed_alloc.bw_on(v), req.n_vms, req.bw_mbps, capacity[v])
            ars[v] = base.intersect(cut)
        if ars[v].is_empty():
            ars[v] = AllocationRange.zero()
    return ars[subtree_root]
