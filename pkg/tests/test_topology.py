import math

import pytest
from hypothesis import given, strategies as st

from svcembed import (Request, Topology, TopologyError, abstract_fattree,
                      build_kary_tree, feasible_range, hose_bandwidth,
                      load_topology, save_topology)


class TestHoseBandwidth:
    def test_near_full_side(self):
        assert hose_bandwidth(7, Request(8, 100.0)) == 100.0

    def test_empty_side(self):
        assert hose_bandwidth(0, Request(8, 100.0)) == 0.0

    def test_midpoint(self):
        assert hose_bandwidth(4, Request(8, 100.0)) == 400.0

    @pytest.mark.parametrize("count", [-1, 9])
    def test_rejects_out_of_domain(self, count):
        with pytest.raises(ValueError):
            hose_bandwidth(count, Request(8, 100.0))

    @given(n=st.integers(1, 40), b=st.floats(0, 1e4, allow_nan=False), k=st.data())
    def test_symmetry(self, n, b, k):
        count = k.draw(st.integers(0, n))
        req = Request(n, b)
        assert hose_bandwidth(count, req) == hose_bandwidth(n - count, req)


class TestFeasibleRange:
    def test_wide_link_covers_everything(self):
        fr = feasible_range(8, 100.0, 400.0)
        assert fr.upper_lo is None
        assert [n for n in range(9) if fr.contains(n)] == list(range(9))

    def test_tight_link_leaves_gap(self):
        fr = feasible_range(8, 100.0, 200.0)
        assert (fr.lower_hi, fr.upper_lo) == (2, 6)
        assert sorted(n for n in range(9) if fr.contains(n)) == [0, 1, 2, 6, 7, 8]

    def test_fractional_quota_rounds_inward(self):
        fr = feasible_range(8, 100.0, 250.0)
        assert (fr.lower_hi, fr.upper_lo) == (2, 6)

    def test_zero_demand_admits_all(self):
        fr = feasible_range(8, 0.0, 10.0)
        assert all(fr.contains(n) for n in range(9))

    def test_clamp_up_jumps_over_gap(self):
        fr = feasible_range(8, 100.0, 200.0)
        assert fr.clamp_up(2) == 2
        assert fr.clamp_up(3) == 6
        assert fr.clamp_up(7) == 7

    @given(n=st.integers(1, 30),
           b=st.sampled_from([0.0, 10.0, 99.9, 100.0, 150.0, 1000.0]),
           bw=st.floats(0, 5000, allow_nan=False))
    def test_membership_matches_hose(self, n, b, bw):
        fr = feasible_range(n, b, bw)
        req = Request(n, b)
        for count in range(n + 1):
            assert fr.contains(count) == (hose_bandwidth(count, req) <= bw)

    @given(n=st.integers(1, 30),
           b=st.sampled_from([10.0, 100.0, 250.0]),
           bw=st.floats(0, 5000, allow_nan=False))
    def test_intervals_agree_with_membership(self, n, b, bw):
        fr = feasible_range(n, b, bw)
        from_intervals = {x for lo, hi in fr.intervals() for x in range(lo, hi + 1)}
        assert from_intervals == {x for x in range(n + 1) if fr.contains(x)}


class TestBuilders:
    def test_paper_default_tree(self):
        topo = build_kary_tree(4, 8, 5, 1000.0, 10000.0)
        assert len(topo.pms) == 512
        assert len(topo.switches) == 73
        assert all(topo.slots(h) == 5 for h in topo.pms)
        assert all(topo.bw(h) == 1000.0 for h in topo.pms)
        assert all(topo.bw(s) == 10000.0 for s in topo.switches if s != topo.root)

    def test_small_tree_shape(self):
        topo = build_kary_tree(3, 2, 3, 400.0, 400.0)
        assert len(topo.pms) == 4
        assert len(topo.switches) == 3

    def test_five_ary(self):
        topo = build_kary_tree(4, 5, 5, 1000.0, 10000.0)
        assert len(topo.pms) == 125
        assert len(topo.switches) == 31

    @given(levels=st.integers(2, 4), arity=st.integers(2, 5))
    def test_node_count_formula(self, levels, arity):
        topo = build_kary_tree(levels, arity, 1, 10.0, 10.0)
        assert len(topo.pms) == arity ** (levels - 1)
        assert len(topo.switches) == (arity ** (levels - 1) - 1) // (arity - 1)

    def test_rejects_single_level(self):
        with pytest.raises(ValueError):
            build_kary_tree(1, 2, 1, 10.0, 10.0)

    def test_root_bandwidth_is_unbounded(self):
        topo = build_kary_tree(3, 2, 3, 400.0, 400.0)
        assert math.isinf(topo.bw(topo.root))


class TestAbstractFatTree:
    def test_four_ary_shape(self):
        topo = abstract_fattree(4, 5, 1000.0, 1000.0)
        assert len(topo.pms) == 16
        pods = topo.children(topo.root)
        assert len(pods) == 4
        for pod in pods:
            edges = topo.children(pod)
            assert len(edges) == 2  # edge switches keep distinct host sets
            for edge in edges:
                assert len(topo.children(edge)) == 2
                assert all(topo.is_pm(h) for h in topo.children(edge))

    def test_merged_link_bandwidth_sums_members(self):
        # each edge switch has k/2 physical up-links, each pod k^2/4
        topo = abstract_fattree(4, 5, 1000.0, 1000.0)
        pod = topo.children(topo.root)[0]
        edge = topo.children(pod)[0]
        assert topo.bw(edge) == 2 * 1000.0
        assert topo.bw(pod) == 4 * 1000.0

    def test_layer_bandwidth_matches_physical_link_count(self):
        k, fabric = 6, 1000.0
        topo = abstract_fattree(k, 5, 800.0, fabric)
        # physical k-ary FatTree: per pod (k/2)^2 edge-agg links, (k/2)^2 agg-core links
        phys_edge_agg = k * (k // 2) * (k // 2)
        phys_agg_core = k * (k // 2) * (k // 2)
        abstract_edge_agg = sum(topo.bw(e) for p in topo.children(topo.root)
                                for e in topo.children(p))
        abstract_agg_core = sum(topo.bw(p) for p in topo.children(topo.root))
        assert abstract_edge_agg == phys_edge_agg * fabric
        assert abstract_agg_core == phys_agg_core * fabric

    def test_smallest_even_arity_is_valid(self):
        topo = abstract_fattree(2, 3, 400.0, 400.0)
        assert len(topo.children(topo.root)) == 2
        assert len(topo.pms) == 2

    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_rejects_odd_arity(self, k):
        with pytest.raises(ValueError):
            abstract_fattree(k, 5, 1000.0, 1000.0)


class TestSerialization:
    def test_seven_node_document(self):
        import json
        doc = save_topology(build_kary_tree(3, 2, 3, 400.0, 400.0))
        assert len(json.loads(doc)["nodes"]) == 7

    def test_round_trip_default(self):
        topo = build_kary_tree(4, 8, 5, 1000.0, 10000.0)
        assert load_topology(save_topology(topo)) == topo

    def test_round_trip_bytes(self, fourpm):
        assert load_topology(save_topology(fourpm).encode()) == fourpm

    def test_pm_with_child_names_the_pm(self):
        doc = """{"root": 0, "nodes": [
            {"id": 0, "kind": "switch", "parent": null},
            {"id": 1, "kind": "pm", "parent": 0, "slots": 2, "bw_mbps": 10},
            {"id": 2, "kind": "pm", "parent": 1, "slots": 2, "bw_mbps": 10}]}"""
        with pytest.raises(TopologyError, match="1"):
            load_topology(doc)

    def test_negative_slots_rejected(self):
        doc = """{"root": 0, "nodes": [
            {"id": 0, "kind": "switch", "parent": null},
            {"id": 1, "kind": "pm", "parent": 0, "slots": -1, "bw_mbps": 10}]}"""
        with pytest.raises(TopologyError):
            load_topology(doc)

    def test_cycle_rejected(self):
        with pytest.raises(TopologyError):
            Topology(0, [
                (0, "switch", None, None, None),
                (1, "switch", 2, None, 10.0),
                (2, "switch", 1, None, 10.0),
            ])

    def test_garbage_rejected(self):
        with pytest.raises(TopologyError):
            load_topology("not json at all {")


class TestRequestValidation:
    def test_zero_vms_rejected(self):
        with pytest.raises(ValueError):
            Request(0, 100.0)

    def test_negative_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            Request(1, -5.0)

    def test_zero_bandwidth_allowed(self):
        assert Request(1, 0.0).bw_mbps == 0.0
