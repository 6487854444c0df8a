"""Optimal survivable embedding via bottom-up dynamic programming.

Every node v gets a table T[n0, n1]: the minimum VMs its subtree must
reserve to offer at least n0 working VMs with no failure inside the subtree
and at least n1 during the worst single-PM failure inside it.  Switches
aggregate children one at a time through an inner table, then the node's own
up-link bandwidth clamps infeasible targets upward.  Infeasible entries are
+inf; all entries are small integers, so float arithmetic stays exact.
"""

from __future__ import annotations

import math

import numpy as np

from .resources import ResourceView
from .topology import FeasibleRange, Request, Topology, feasible_range
from .vce import SvceAllocation, find_feasible_vce

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    _HAVE_NUMBA = False

INF = math.inf


def leaf_table(topo: Topology, h: int, req: Request, avail: ResourceView) -> np.ndarray:
    """Table of a PM: it offers n0 directly when bandwidth admits it, jumps to
    the next admissible count when not, and can never survive its own failure
    (n1 > 0 is infeasible)."""
    n = req.n_vms
    fr = feasible_range(n, req.bw_mbps, avail.free_bw(h))
    slots = avail.free_slots(h)
    table = np.full((n + 1, n + 1), INF)
    idx = np.arange(n + 1)
    feasible = np.zeros(n + 1, dtype=bool)
    for lo, hi in fr.intervals():
        feasible[lo:hi + 1] = True
    direct = feasible & (idx <= slots)
    table[direct, 0] = idx[direct]
    if fr.upper_lo is not None and fr.upper_lo <= slots:
        table[~feasible, 0] = fr.upper_lo
    return table


def inner_init(n: int) -> np.ndarray:
    """Zero subtrees aggregated: only the all-zero demand is satisfiable."""
    table = np.full((n + 1, n + 1), INF)
    table[0, 0] = 0.0
    return table


def inner_step_reference(prev: np.ndarray, child: np.ndarray, n: int) -> np.ndarray:
    """Direct minimization over all split quadruples; kept as the slow
    reference the optimized step is differential-tested against."""
    out = np.full((n + 1, n + 1), INF)
    for n0 in range(n + 1):
        for n1 in range(n + 1):
            best = INF
            for a in range(n + 1):
                for b in range(n + 1):
                    pv = prev[a, b]
                    if not math.isfinite(pv):
                        continue
                    for c in range(n + 1):
                        if a + c < n0:
                            continue
                        for d in range(n + 1):
                            if min(a + d, c + b) < n1:
                                continue
                            val = pv + child[c, d]
                            if val < best:
                                best = val
            out[n0, n1] = best
    return out


def _combine_pairs_numpy(prev, pa, pb, cv, ca, cb, n, out):
    va = prev[pa, pb]
    vals = va[:, None] + cv[None, :]
    t0 = np.minimum(pa[:, None] + ca[None, :], n)
    t1 = np.minimum(np.minimum(pa[:, None] + cb[None, :], ca[None, :] + pb[:, None]), n)
    np.minimum.at(out, (t0.ravel(), t1.ravel()), vals.ravel())
    out[:] = np.minimum.accumulate(out[::-1, :], axis=0)[::-1, :]
    out[:] = np.minimum.accumulate(out[:, ::-1], axis=1)[:, ::-1]


def _combine_pairs_python(prev, pa, pb, cv, ca, cb, n, out):
    for i in range(pa.shape[0]):
        a = pa[i]
        b = pb[i]
        va = prev[a, b]
        for j in range(ca.shape[0]):
            v = va + cv[j]
            c = ca[j]
            d = cb[j]
            t0 = a + c
            if t0 > n:
                t0 = n
            x = a + d
            y = c + b
            t1 = x if x < y else y
            if t1 > n:
                t1 = n
            if v < out[t0, t1]:
                out[t0, t1] = v
    for i in range(n - 1, -1, -1):
        for j in range(n + 1):
            if out[i + 1, j] < out[i, j]:
                out[i, j] = out[i + 1, j]
    for j in range(n - 1, -1, -1):
        for i in range(n + 1):
            if out[i, j + 1] < out[i, j]:
                out[i, j] = out[i, j + 1]


if _HAVE_NUMBA:
    _combine_pairs = njit(cache=True)(_combine_pairs_python)
else:  # pragma: no cover
    _combine_pairs = _combine_pairs_numpy


def inner_step(prev: np.ndarray, child: np.ndarray, n: int) -> np.ndarray:
    """Aggregate one more child subtree into the inner table.

    Enumerates finite entry pairs of the two tables, records each achieved
    demand pair, then a suffix-min pass fills every dominated target.  Agrees
    entry-for-entry with ``inner_step_reference``.
    """
    pa, pb = np.nonzero(np.isfinite(prev))
    ca, cb = np.nonzero(np.isfinite(child))
    out = np.full((n + 1, n + 1), INF)
    if pa.size and ca.size:
        cv = child[ca, cb]
        _combine_pairs(prev, pa, pb, cv, ca, cb, n, out)
    return out


def apply_bandwidth(inner_final: np.ndarray, fr: FeasibleRange, n: int) -> np.ndarray:
    """Clamp each demand through the node's up-link feasible range: targets the
    bandwidth cannot carry are raised to the next admissible count."""
    padded = np.full((n + 2, n + 2), INF)
    padded[: n + 1, : n + 1] = inner_final
    index = np.empty(n + 1, dtype=np.int64)
    for i in range(n + 1):
        clamped = fr.clamp_up(i)
        index[i] = clamped if clamped is not None else n + 1
    return padded[np.ix_(index, index)]


def compute_tables(topo: Topology, req: Request, avail: ResourceView
                   ) -> tuple[dict[int, np.ndarray], dict[int, list[np.ndarray]]]:
    """Bottom-up pass; returns the per-node tables and, for each switch, the
    inner-table layers (one per aggregated child) used for backtracking."""
    n = req.n_vms
    tables: dict[int, np.ndarray] = {}
    layers: dict[int, list[np.ndarray]] = {}
    for v in topo.postorder():
        if topo.is_pm(v):
            tables[v] = leaf_table(topo, v, req, avail)
        else:
            cur = inner_init(n)
            lys = [cur]
            for child in topo.children(v):
                cur = inner_step(cur, tables[child], n)
                lys.append(cur)
            layers[v] = lys
            fr = feasible_range(n, req.bw_mbps, avail.free_bw(v))
            tables[v] = apply_bandwidth(cur, fr, n)
    return tables, layers


def _choose_quad(prev: np.ndarray, child: np.ndarray, m0: int, m1: int,
                 target: float, n: int) -> tuple[int, int, int, int]:
    """Split quadruple achieving ``target``, preferring locality.

    Among the value-optimal splits, leave the child untouched when the
    already-aggregated subtrees reach the target alone, or hand the child
    everything when it reaches the target alone; only genuine spills fall back
    to the lexicographically smallest quadruple.  Concentrating requests keeps
    their hose reservations off the higher links; the reserved total is the
    table value either way.
    """
    idx = np.arange(n + 1)
    # child untouched: min(a, b) >= m1 and a >= m0 with prev alone at target
    lo0, lo1 = max(m0, m1), m1
    sub = prev[lo0:, lo1:]
    hits = np.argwhere(sub == target)
    if hits.size:
        a, b = hits[0]
        return int(a) + lo0, int(b) + lo1, 0, 0
    # child takes everything: min(d, c) >= m1 and c >= m0
    sub = child[lo0:, lo1:]
    hits = np.argwhere(sub == target)
    if hits.size:
        c, d = hits[0]
        return 0, 0, int(c) + lo0, int(d) + lo1
    for a in range(n + 1):
        row = prev[a]
        if not np.isfinite(row).any():
            continue
        vals = row[:, None, None] + child[None, :, :]  # axes (b, c, d)
        ok = vals == target
        ok &= ((a + idx) >= m0)[None, :, None]  # a + c
        ok &= ((a + idx) >= m1)[None, None, :]  # a + d
        ok &= ((idx[:, None] + idx[None, :]) >= m1)[:, :, None]  # b + c
        hits = np.argwhere(ok)
        if hits.size:
            b, c, d = hits[0]
            return a, int(b), int(c), int(d)
    raise RuntimeError("backtracking found no split achieving the table value")


def _backtrack(topo: Topology, req: Request, avail: ResourceView,
               tables: dict[int, np.ndarray],
               layers: dict[int, list[np.ndarray]]) -> dict[int, int]:
    n = req.n_vms
    counts: dict[int, int] = {}
    stack: list[tuple[int, int, int]] = [(topo.root, n, n)]
    while stack:
        v, n0, n1 = stack.pop()
        if n0 == 0 and n1 == 0:
            continue
        if topo.is_pm(v):
            fr = feasible_range(n, req.bw_mbps, avail.free_bw(v))
            picked = fr.clamp_up(n0)
            assert picked is not None and n1 == 0
            if picked:
                counts[v] = picked
            continue
        fr = feasible_range(n, req.bw_mbps, avail.free_bw(v))
        m0 = fr.clamp_up(n0)
        m1 = fr.clamp_up(n1)
        assert m0 is not None and m1 is not None
        children = topo.children(v)
        lys = layers[v]
        for k in range(len(children), 0, -1):
            target = lys[k][m0, m1]
            a, b, c, d = _choose_quad(lys[k - 1], tables[children[k - 1]], m0, m1, target, n)
            if c or d:
                stack.append((children[k - 1], c, d))
            m0, m1 = a, b
        assert (m0, m1) == (0, 0)
    return counts


def _reserve_bandwidth(topo: Topology, req: Request, counts: dict[int, int],
                       avail: ResourceView) -> dict[int, float]:
    """Per-link reservation: the largest hose bandwidth any per-failure
    recovery embedding needs, each recovery found inside the reserved slots
    with the link bandwidths still free.

    Recoveries can only live where slots are reserved, so the search runs on
    the subtree spanned by the reserved PMs and their ancestors; every link
    outside carries zero.
    """
    used = sorted(h for h, c in counts.items() if c > 0)
    keep: set[int] = set()
    for h in used:
        v: int | None = h
        while v is not None and v not in keep:
            keep.add(v)
            v = topo.parent(v)
    span = Topology(topo.root, [r for r in topo.records() if r[0] in keep])
    slots = {h: counts.get(h, 0) for h in span.pms}
    free_bw = {v: avail.free_bw(v) for v in span.nodes() if v != span.root}
    bw: dict[int, float] = {}
    for failed in used:
        masked = dict(slots)
        masked[failed] = 0
        vce = find_feasible_vce(span, req, INF, ResourceView(span, masked, free_bw))
        if vce is None:
            raise RuntimeError(f"optimal reservation lacks a recovery for PM {failed} failing")
        for v, amount in vce.bw_per_link.items():
            if amount > bw.get(v, 0.0):
                bw[v] = amount
    return bw


def solve_opt(topo: Topology, req: Request,
              avail: ResourceView | None = None) -> SvceAllocation | None:
    """Minimum-VM survivable embedding, or None when no reservation can keep
    the request alive through every single-PM failure."""
    if avail is None:
        avail = ResourceView.pristine(topo)
    n = req.n_vms
    tables, layers = compute_tables(topo, req, avail)
    if not math.isfinite(tables[topo.root][n, n]):
        return None
    counts = _backtrack(topo, req, avail, tables, layers)
    assert sum(counts.values()) == int(tables[topo.root][n, n])
    bw = _reserve_bandwidth(topo, req, counts, avail)
    return SvceAllocation(counts, bw)


def warmup_kernels():
    """Compile the jitted kernels once so solve timings stay clean."""
    inner_step(inner_init(1), inner_init(1), 1)
    topo = Topology(0, [(0, "switch", None, None, None),
                        (1, "pm", 0, 1, 1.0),
                        (2, "pm", 0, 1, 1.0)])
    find_feasible_vce(topo, Request(1, 1.0), 1, ResourceView.pristine(topo))
