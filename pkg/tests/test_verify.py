import random

import pytest

from svcembed import (FailureScenario, OracleLimitError, Request, ResourceView,
                      SvceAllocation, Topology, auxiliary_topology,
                      brute_force_oracle, check_vce, find_feasible_vce,
                      solve_opt, verify_svce)
from support import random_instance, vce_exists_brute

RAW_LINKS = {1: 400.0, 2: 400.0, 3: 400.0, 4: 400.0, 5: 400.0, 6: 400.0}


class TestAuxiliaryTopology:
    def test_failed_pm_removed_and_capacities_replaced(self, fourpm):
        alloc = SvceAllocation({3: 2, 4: 3, 5: 3, 6: 3}, dict(RAW_LINKS))
        aux = auxiliary_topology(fourpm, alloc, FailureScenario(3))
        assert 3 not in aux.nodes()
        assert len(aux.pms) == 3
        assert len(aux.switches) == 3
        assert aux.slots(4) == 3
        assert aux.bw(1) == 400.0

    def test_reserved_bandwidth_becomes_link_capacity(self, fourpm):
        alloc = SvceAllocation({4: 3}, {1: 100.0, 4: 300.0})
        aux = auxiliary_topology(fourpm, alloc, FailureScenario(3))
        assert aux.bw(1) == 100.0
        assert aux.bw(4) == 300.0
        assert aux.bw(5) == 0.0  # nothing reserved there

    def test_failure_must_name_a_pm(self, fourpm):
        with pytest.raises(ValueError):
            auxiliary_topology(fourpm, SvceAllocation({}, {}), FailureScenario(1))


class TestVerifySvce:
    def test_optimal_reservation_passes_with_full_failure_map(self, fourpm):
        req = Request(8, 100.0)
        report = verify_svce(fourpm, req, solve_opt(fourpm, req))
        assert report.feasible
        assert len(report.rws) == 4
        assert report.pws == report.rws[FailureScenario(min(fourpm.pms))]

    def test_every_recovery_validates_in_its_auxiliary_topology(self, fourpm):
        req = Request(8, 100.0)
        alloc = solve_opt(fourpm, req)
        report = verify_svce(fourpm, req, alloc)
        for scenario, recovery in report.rws.items():
            aux = auxiliary_topology(fourpm, alloc, scenario)
            assert check_vce(aux, req, recovery, ResourceView.pristine(aux)) is None

    def test_bare_embedding_cannot_survive(self, fourpm):
        req = Request(8, 100.0)
        vce = find_feasible_vce(fourpm, req, float("inf"), ResourceView.pristine(fourpm))
        report = verify_svce(fourpm, req, SvceAllocation(dict(vce.vm_per_pm),
                                                         dict(vce.bw_per_link)))
        assert not report.feasible
        assert report.first_failure is not None

    def test_generous_reservation_survives_worst_failure(self, fourpm):
        alloc = SvceAllocation({3: 4, 4: 3, 5: 2, 6: 3}, dict(RAW_LINKS))
        report = verify_svce(fourpm, Request(8, 100.0), alloc)
        assert report.feasible

    def test_overfull_reservation_rejected_with_node(self, fourpm):
        alloc = SvceAllocation({3: 5}, {})
        with pytest.raises(ValueError, match="3"):
            verify_svce(fourpm, Request(1, 0.0), alloc)

    def test_overbooked_link_rejected(self, fourpm):
        alloc = SvceAllocation({3: 1}, {1: 500.0})
        with pytest.raises(ValueError, match="link 1"):
            verify_svce(fourpm, Request(1, 0.0), alloc)

    def test_report_document_shape(self, fourpm):
        req = Request(8, 100.0)
        doc = verify_svce(fourpm, req, solve_opt(fourpm, req)).to_doc_dict()
        assert doc["feasible"] is True
        assert set(doc["rws"]) == {"3", "4", "5", "6"}
        assert "vms" in doc["pws"]


class TestBruteForceOracle:
    def test_known_minimum(self, fourpm):
        assert brute_force_oracle(fourpm, Request(8, 100.0)).total_vms == 11

    def test_zero_bandwidth_pair(self):
        topo = Topology(0, [(0, "switch", None, None, None),
                            (1, "pm", 0, 1, 500.0),
                            (2, "pm", 0, 1, 500.0)])
        assert brute_force_oracle(topo, Request(1, 0.0)).total_vms == 2

    def test_single_pm_infeasible(self):
        topo = Topology(0, [(0, "switch", None, None, None),
                            (1, "pm", 0, 9, 500.0)])
        assert brute_force_oracle(topo, Request(2, 100.0)) is None

    def test_refuses_oversized_instances(self):
        topo = Topology(0, [(0, "switch", None, None, None)]
                        + [(i, "pm", 0, 9, 500.0) for i in range(1, 12)])
        with pytest.raises(OracleLimitError):
            brute_force_oracle(topo, Request(2, 100.0), max_candidates=1000)

    def test_minimal_reservations_pass_verification(self):
        rng = random.Random(80)
        seen = 0
        for _ in range(40):
            topo, req = random_instance(rng, max_pms=4, max_slots=3, max_n=4)
            alloc = brute_force_oracle(topo, req)
            if alloc is None:
                continue
            seen += 1
            assert verify_svce(topo, req, alloc).feasible
        assert seen > 8

    def test_anything_below_the_minimum_fails_verification(self, fourpm):
        req = Request(8, 100.0)
        # ten slots split as evenly as the topology allows
        for counts in ({3: 4, 4: 3, 5: 3}, {3: 2, 4: 3, 5: 2, 6: 3},
                       {3: 4, 4: 2, 5: 2, 6: 2}):
            assert sum(counts.values()) == 10
            alloc = SvceAllocation(counts, dict(RAW_LINKS))
            assert not verify_svce(fourpm, req, alloc).feasible

    def test_count_folding_matches_direct_search(self):
        rng = random.Random(81)
        for _ in range(40):
            topo, req = random_instance(rng, max_pms=4, max_slots=3, max_n=4)
            caps = {h: rng.randint(0, topo.slots(h)) for h in topo.pms}
            avail = ResourceView.pristine(topo)
            exists = find_feasible_vce(topo, req, float("inf"),
                                       avail.with_slots(caps)) is not None
            assert exists == vce_exists_brute(topo, req, caps, avail)
