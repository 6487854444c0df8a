"""Fast survivable embedding: smallest augmentation of the request such that a
per-PM-capped plain embedding of the augmented request exists.

Capping every PM at the number of backup VMs guarantees that losing any
single PM leaves at least the requested VM count alive, and the augmented
hose reservation exceeds what any recovery embedding needs, so the result is
survivable by construction.
"""

from __future__ import annotations

import numpy as np

from .resources import ResourceView
from .topology import Request, Topology
from .vce import SvceAllocation, find_feasible_vce


def _max_offer_per_pm(free_slots: np.ndarray, free_bw: np.ndarray, per_vm: float,
                      total: int, cap: int) -> np.ndarray:
    """Largest count each PM alone could offer: the exact maximum of its
    offerable range under slots, cap, and its own link bandwidth."""
    m = np.minimum(np.minimum(free_slots, cap), total)
    if per_vm <= 0:
        return m
    quota = np.floor(free_bw / per_vm)
    quota = np.where((quota + 1) * per_vm <= free_bw, quota + 1, quota)
    quota = np.where(quota * per_vm > free_bw, quota - 1, quota)
    quota = np.minimum(quota, total)
    full_range = 2.0 * free_bw >= total * per_vm
    upper_reachable = m >= total - quota
    return np.where(full_range | upper_reachable, m, np.minimum(m, quota))


def solve_heu(topo: Topology, req: Request,
              avail: ResourceView | None = None) -> SvceAllocation | None:
    """Try backup counts 1..N in order; first capped embedding that fits wins.

    Total reserved VMs are N + N' for the first feasible N'.  Infeasible once
    the backup count would have to exceed the request itself.
    """
    if avail is None:
        avail = ResourceView.pristine(topo)
    state = avail.dense_state()
    pm_rows = topo.dense().is_pm
    free_slots = state[0][pm_rows].astype(float)
    free_bw = state[1][pm_rows]
    for extra in range(1, req.n_vms + 1):
        total = req.n_vms + extra
        # range maxima add up the tree and switch cuts only shrink them, so a
        # leaf-level sum below the target rules the pass out without a search
        if _max_offer_per_pm(free_slots, free_bw, req.bw_mbps, total, extra).sum() < total:
            continue
        vce = find_feasible_vce(topo, Request(total, req.bw_mbps), extra, avail,
                                _state=state)
        if vce is not None:
            return SvceAllocation(dict(vce.vm_per_pm), dict(vce.bw_per_link))
    return None
