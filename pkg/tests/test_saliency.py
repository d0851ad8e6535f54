"""Polarity-intersection saliency: slicing, accumulation, components."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as npst

from evrotor import (
    ConfigurationError,
    Region,
    ValidationError,
    accumulate_saliency,
    connected_components,
    partition_polarity_slices,
    polarity_intersection,
    render_gray,
    saliency_map,
    slice_indices,
    threshold_mask,
)

from conftest import SMALL, make_period
from oracles import flood_fill_components


def rows_strategy(max_x=SMALL.width - 1, max_y=SMALL.height - 1, max_size=60):
    return st.lists(
        st.tuples(
            st.integers(0, 999),
            st.integers(0, max_x),
            st.integers(0, max_y),
            st.integers(0, 1),
        ),
        max_size=max_size,
    )


class TestSlicing:
    def test_twenty_ms_splits_into_twenty_slices(self):
        rows = [(j * 1000 + 37, 1, 1, 1) for j in range(20)]
        period = make_period(rows, duration=20_000)
        assert list(slice_indices(period, 20)) == list(range(20))
        assert len(partition_polarity_slices(period, 20)) == 20

    def test_event_at_window_start_lands_in_first_slice(self):
        period = make_period([(0, 3, 4, 1)], duration=1000)
        pairs = partition_polarity_slices(period, 4)
        assert pairs[0].slice_index == 1
        assert pairs[0].pos[4, 3]
        assert not any(p.pos.any() for p in pairs[1:])

    def test_occupancy_is_binary_not_counted(self):
        period = make_period([(10, 5, 5, 1), (11, 5, 5, 1)], duration=1000)
        pairs = partition_polarity_slices(period, 2)
        assert pairs[0].pos.dtype == bool
        assert pairs[0].pos[5, 5]
        assert pairs[0].pos.sum() == 1

    def test_polarities_land_in_separate_grids(self):
        period = make_period([(10, 1, 1, 1), (20, 2, 2, 0)], duration=1000)
        pair = partition_polarity_slices(period, 2)[0]
        assert pair.pos[1, 1] and not pair.pos[2, 2]
        assert pair.neg[2, 2] and not pair.neg[1, 1]

    def test_rejects_bad_slice_counts(self):
        period = make_period([], duration=100)
        with pytest.raises(ConfigurationError):
            slice_indices(period, 1)
        with pytest.raises(ConfigurationError):
            slice_indices(period, 101)


class TestIntersection:
    def test_single_polarity_pixel_is_excluded(self):
        period = make_period([(10, 5, 5, 1)], duration=1000)
        pair = partition_polarity_slices(period, 2)[0]
        assert not polarity_intersection(pair).any()

    def test_pixel_with_both_polarities_is_kept(self):
        period = make_period([(10, 5, 5, 1), (12, 5, 5, 0)], duration=1000)
        inter = polarity_intersection(partition_polarity_slices(period, 2)[0])
        assert inter[5, 5] and inter.sum() == 1

    def test_all_zero_pos_annihilates(self):
        pair = partition_polarity_slices(
            make_period([(10, 5, 5, 0), (12, 6, 6, 0)], duration=1000), 2
        )[0]
        assert not polarity_intersection(pair).any()


class TestRendering:
    def test_full_intersection_saturates(self):
        rows = []
        for t_slice in range(20):
            rows.append((t_slice * 1000 + 100, 7, 7, 1))
            rows.append((t_slice * 1000 + 200, 7, 7, 0))
        smap = saliency_map(make_period(rows, duration=20_000), 20)
        assert smap.counts[7, 7] == 20
        assert smap.gray[7, 7] == 255

    def test_partial_intersection_renders_rounded(self):
        rows = []
        for t_slice in range(4):
            rows.append((t_slice * 1000 + 100, 7, 7, 1))
            rows.append((t_slice * 1000 + 200, 7, 7, 0))
        smap = saliency_map(make_period(rows, duration=20_000), 20)
        assert smap.counts[7, 7] == 4
        assert smap.gray[7, 7] == 51  # round(255 * 4 / 20)

    def test_single_polarity_stream_yields_zero_map(self):
        rows = [(t, t % SMALL.width, 3, 1) for t in range(0, 900, 30)]
        smap = saliency_map(make_period(rows, duration=1000), 4)
        assert not smap.counts.any()
        assert not smap.gray.any()

    def test_render_gray_caps_at_255(self):
        gray = render_gray(np.array([[30]]), 20)
        assert gray[0, 0] == 255

    def test_accumulate_rejects_empty_and_ragged_input(self):
        with pytest.raises(ConfigurationError):
            accumulate_saliency([])
        with pytest.raises(ValidationError):
            accumulate_saliency([np.zeros((2, 2), bool), np.zeros((3, 3), bool)])

    def test_fused_map_equals_modular_composition(self):
        rng = np.random.default_rng(7)
        rows = [
            (int(rng.integers(0, 1000)), int(rng.integers(0, SMALL.width)),
             int(rng.integers(0, SMALL.height)), int(rng.integers(0, 2)))
            for _ in range(200)
        ]
        period = make_period(rows, duration=1000)
        n = 5
        fused = saliency_map(period, n)
        modular = accumulate_saliency(
            polarity_intersection(pair) for pair in partition_polarity_slices(period, n)
        )
        assert np.array_equal(fused.counts, modular.counts)
        assert np.array_equal(fused.gray, modular.gray)


class TestThreshold:
    def test_threshold_is_strict(self):
        smap = saliency_map(make_period([], duration=1000), 2)
        gray = smap.gray.copy()
        gray[3, 3] = 50
        gray[4, 4] = 51
        strict = threshold_mask(
            type(smap)(counts=smap.counts, gray=gray, n_slices=2), 50
        )
        assert not strict[3, 3]
        assert strict[4, 4]
        assert strict.sum() == 1

    def test_zero_threshold_keeps_any_signal(self):
        period = make_period([(10, 5, 5, 1), (12, 5, 5, 0)], duration=1000)
        smap = saliency_map(period, 2)
        assert np.array_equal(threshold_mask(smap, 0), smap.gray > 0)

    def test_rejects_out_of_range_threshold(self):
        smap = saliency_map(make_period([], duration=1000), 2)
        with pytest.raises(ConfigurationError):
            threshold_mask(smap, 256)


class TestComponents:
    def test_solid_block_is_one_region(self):
        mask = np.zeros((30, 30), bool)
        mask[10:13, 10:13] = True
        regions = connected_components(mask)
        assert len(regions) == 1
        assert regions[0].bbox.as_tuple() == (10, 10, 3, 3)
        assert regions[0].area == 9

    def test_diagonal_touch_is_one_region(self):
        mask = np.zeros((10, 10), bool)
        mask[2, 2] = mask[3, 3] = True
        assert len(connected_components(mask)) == 1

    def test_all_zero_mask_has_no_regions(self):
        assert connected_components(np.zeros((5, 5), bool)) == []

    def test_regions_are_ordered_by_bbox(self):
        mask = np.zeros((20, 20), bool)
        mask[15, 15] = True
        mask[2, 8] = True
        mask[2, 1] = True
        boxes = [r.bbox.as_tuple() for r in connected_components(mask)]
        assert boxes == [(1, 2, 1, 1), (8, 2, 1, 1), (15, 15, 1, 1)]

    def test_rejects_non_2d_mask(self):
        with pytest.raises(ValidationError):
            connected_components(np.zeros(5, bool))

    @settings(max_examples=60, deadline=None)
    @given(npst.arrays(bool, npst.array_shapes(min_dims=2, max_dims=2, max_side=14)))
    def test_components_match_flood_fill(self, mask):
        regions = connected_components(mask)
        got = {frozenset(map(tuple, r.pixels)) for r in regions}
        expected = set(flood_fill_components(mask.tolist()))
        assert got == expected
        # soundness: pairwise disjoint and exactly covering the mask
        total = sum(r.area for r in regions)
        assert total == int(mask.sum())
        covered = np.zeros_like(mask)
        for r in regions:
            covered[r.pixels[:, 1], r.pixels[:, 0]] = True
        assert np.array_equal(covered, mask)

    def test_region_validates_pixels_inside_bbox(self):
        from evrotor import BBox

        with pytest.raises(ValidationError):
            Region(bbox=BBox(0, 0, 2, 2), pixels=np.array([[5, 5]]))
        with pytest.raises(ValidationError):
            Region(bbox=BBox(0, 0, 2, 2), pixels=np.empty((0, 2), np.int32))


class TestInvariants:
    @settings(max_examples=120, deadline=None)
    @given(rows=rows_strategy(), n=st.integers(2, 6))
    def test_single_polarity_annihilation(self, rows, n):
        positive_only = [(t, x, y, 1) for t, x, y, _ in rows]
        smap = saliency_map(make_period(positive_only), n)
        assert not smap.counts.any()

    @settings(max_examples=120, deadline=None)
    @given(rows=rows_strategy(), n=st.integers(2, 6))
    def test_polarity_swap_symmetry(self, rows, n):
        flipped = [(t, x, y, 1 - p) for t, x, y, p in rows]
        a = saliency_map(make_period(rows), n)
        b = saliency_map(make_period(flipped), n)
        assert np.array_equal(a.counts, b.counts)

    @settings(max_examples=120, deadline=None)
    @given(rows=rows_strategy(max_size=40), extra=rows_strategy(max_size=15),
           n=st.integers(2, 6))
    def test_adding_events_never_decreases_counts(self, rows, extra, n):
        base = saliency_map(make_period(rows), n)
        grown = saliency_map(make_period(rows + extra), n)
        assert np.all(grown.counts >= base.counts)

    @settings(max_examples=120, deadline=None)
    @given(rows=rows_strategy(max_x=SMALL.width - 9, max_y=SMALL.height - 7),
           n=st.integers(2, 6), dx=st.integers(0, 8), dy=st.integers(0, 6))
    def test_translation_equivariance(self, rows, n, dx, dy):
        shifted = [(t, x + dx, y + dy, p) for t, x, y, p in rows]
        a = saliency_map(make_period(rows), n)
        b = saliency_map(make_period(shifted), n)
        assert np.array_equal(np.roll(a.counts, (dy, dx), axis=(0, 1)), b.counts)
        mask_a = threshold_mask(a, 0)
        mask_b = threshold_mask(b, 0)
        boxes_a = {r.bbox.as_tuple() for r in connected_components(mask_a)}
        boxes_b = {r.bbox.as_tuple() for r in connected_components(mask_b)}
        assert {(x + dx, y + dy, w, h) for x, y, w, h in boxes_a} == boxes_b

    @settings(max_examples=120, deadline=None)
    @given(rows=rows_strategy(), n=st.integers(2, 6))
    def test_counts_bounded_by_slice_count(self, rows, n):
        smap = saliency_map(make_period(rows), n)
        assert smap.counts.max(initial=0) <= n
        assert smap.gray.max(initial=0) <= 255
