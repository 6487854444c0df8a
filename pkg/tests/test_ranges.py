from hypothesis import given, strategies as st

from svcembed import AllocationRange

interval_lists = st.lists(
    st.tuples(st.integers(0, 30), st.integers(0, 30)).map(lambda t: (min(t), max(t))),
    min_size=0, max_size=5)


def members(rng: AllocationRange) -> set[int]:
    return set(rng.values())


class TestNormalForm:
    def test_merges_overlap_and_adjacency(self):
        rng = AllocationRange.from_intervals([(4, 6), (0, 2), (3, 3), (10, 12)])
        assert rng.intervals == ((0, 6), (10, 12))

    def test_drops_empty_pieces(self):
        assert AllocationRange.from_intervals([(5, 4)]).intervals == ()

    @given(interval_lists)
    def test_normal_form_invariants(self, pieces):
        rng = AllocationRange.from_intervals(pieces)
        for (lo, hi) in rng.intervals:
            assert lo <= hi
        for (_, hi), (lo2, _) in zip(rng.intervals, rng.intervals[1:]):
            assert lo2 > hi + 1  # disjoint and non-adjacent
        assert members(rng) == {x for lo, hi in pieces for x in range(lo, hi + 1)}


class TestSetSemantics:
    @given(interval_lists, interval_lists)
    def test_minkowski_sum_matches_pairwise_sums(self, a, b):
        ra, rb = AllocationRange.from_intervals(a), AllocationRange.from_intervals(b)
        expected = {x + y for x in members(ra) for y in members(rb)}
        assert members(ra.minkowski_sum(rb)) == expected

    @given(interval_lists, interval_lists)
    def test_minkowski_sum_commutes(self, a, b):
        ra, rb = AllocationRange.from_intervals(a), AllocationRange.from_intervals(b)
        assert ra.minkowski_sum(rb) == rb.minkowski_sum(ra)

    @given(interval_lists, interval_lists)
    def test_intersect_matches_sets(self, a, b):
        ra, rb = AllocationRange.from_intervals(a), AllocationRange.from_intervals(b)
        assert members(ra.intersect(rb)) == members(ra) & members(rb)

    @given(interval_lists, st.integers(0, 40), st.integers(0, 40))
    def test_clip_matches_sets(self, a, lo, hi):
        ra = AllocationRange.from_intervals(a)
        assert members(ra.clip(lo, hi)) == {x for x in members(ra) if lo <= x <= hi}

    @given(interval_lists, st.integers(0, 60))
    def test_contains_and_largest_at_most(self, a, probe):
        ra = AllocationRange.from_intervals(a)
        assert ra.contains(probe) == (probe in members(ra))
        expected = max((x for x in members(ra) if x <= probe), default=None)
        assert ra.largest_at_most(probe) == expected

    def test_zero_and_span(self):
        assert AllocationRange.zero().intervals == ((0, 0),)
        assert AllocationRange.span(2, 5).intervals == ((2, 5),)
        assert AllocationRange.span(5, 2).is_empty()
        assert AllocationRange.span(0, 3).max_value() == 3
