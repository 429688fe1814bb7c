import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapper_scope import (
    CoverError,
    CoverParams,
    FilterSpec,
    PointTable,
    RegionKey,
    fit_cover,
    interval_grid,
    preimage,
)
from mapper_scope.ingest import RowMeta


def table_from(matrix, names=None):
    matrix = np.atleast_2d(np.asarray(matrix, float))
    names = names or [f"c{i}" for i in range(matrix.shape[1])]
    meta = [RowMeta(RegionKey("00001", "X"), i) for i in range(len(matrix))]
    return PointTable(tuple((n, "u") for n in names), matrix, meta)


class TestIntervalGrid:
    def test_two_intervals_half_overlap(self):
        grid = interval_grid(0.0, 10.0, 2, 0.5)
        assert grid[0].lo == 0.0 and grid[1].hi == 10.0
        assert grid[0].hi == pytest.approx(20.0 / 3.0, abs=1e-9)
        assert grid[1].lo == pytest.approx(10.0 / 3.0, abs=1e-9)

    def test_single_interval_is_whole_range(self):
        for p in (0.0, 0.3, 0.9):
            grid = interval_grid(0.0, 1.0, 1, p)
            assert len(grid) == 1
            assert (grid[0].lo, grid[0].hi) == (0.0, 1.0)

    def test_month_axis_ten_intervals(self):
        grid = interval_grid(0.0, 213.0, 10, 0.5)
        length = 213.0 / 5.5
        stride = length / 2.0
        assert len(grid) == 10
        for j, iv in enumerate(grid):
            assert iv.hi - iv.lo == pytest.approx(length, abs=1e-9)
            assert iv.lo == pytest.approx(j * stride, abs=1e-9)

    def test_degenerate_range_rejected(self):
        with pytest.raises(CoverError, match="degenerate range"):
            interval_grid(1.0, 1.0, 3, 0.2)
        with pytest.raises(CoverError, match="degenerate range"):
            interval_grid(2.0, 1.0, 3, 0.2)

    def test_zero_intervals_rejected(self):
        with pytest.raises(CoverError, match=">= 1"):
            interval_grid(0.0, 1.0, 0, 0.2)

    def test_overlap_fraction_bounds(self):
        with pytest.raises(CoverError, match="overlap"):
            interval_grid(0.0, 1.0, 2, 1.0)
        with pytest.raises(CoverError, match="overlap"):
            interval_grid(0.0, 1.0, 2, -0.1)

    # span >= 1 with |lo| <= 1e4 keeps float cancellation well under the 1e-9
    # law (ulp of the bounds is ~2e-12 at worst).
    @given(
        lo=st.floats(-1e4, 1e4),
        span=st.floats(1.0, 1e6),
        n=st.integers(2, 20),
        p=st.floats(0.0, 0.9),
    )
    @settings(max_examples=200, deadline=None)
    def test_grid_laws(self, lo, span, n, p):
        hi = lo + span
        grid = interval_grid(lo, hi, n, p)
        lengths = [iv.hi - iv.lo for iv in grid]
        assert max(lengths) - min(lengths) < 1e-9 * span
        assert grid[0].lo == lo and grid[-1].hi == hi
        length = span / (n - (n - 1) * p)
        for a, b in zip(grid, grid[1:]):
            overlap = a.hi - b.lo
            assert overlap == pytest.approx(p * length, abs=1e-9 * max(1.0, span))
            assert b.lo <= a.hi + 1e-12 * span  # union leaves no gaps


class TestFitCover:
    def test_candidate_element_count(self, city_chain):
        cover = fit_cover(city_chain, FilterSpec((0, 1, 2, 3)), CoverParams(10, 0.5))
        assert cover.element_count() == 10_000

    def test_single_row_table_degenerate(self):
        table = table_from([[1.0, 2.0]])
        with pytest.raises(CoverError, match="degenerate filter dimension"):
            fit_cover(table, FilterSpec((0, 1)), CoverParams(3, 0.2))

    def test_constant_column_named(self):
        table = table_from([[0.0, 5.0], [1.0, 5.0]], names=["a", "b"])
        with pytest.raises(CoverError, match="'b' is constant"):
            fit_cover(table, FilterSpec((0, 1)), CoverParams(3, 0.2))

    def test_membership_invariant_under_column_scaling(self):
        rng = np.random.default_rng(3)
        matrix = rng.uniform(-5, 5, size=(60, 3))
        scaled = matrix.copy()
        scaled[:, 2] *= 1000.0
        filt = FilterSpec((0, 1, 2))
        params = CoverParams(6, 0.4)
        base = fit_cover(table_from(matrix), filt, params)
        other = fit_cover(table_from(scaled), filt, params)
        assert base.row_memberships(table_from(matrix), filt) == other.row_memberships(
            table_from(scaled), filt
        )

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_membership_invariant_under_affine_maps(self, seed):
        rng = np.random.default_rng(seed)
        rows = rng.integers(2, 50)
        dims = rng.integers(1, 4)
        matrix = rng.uniform(-10, 10, size=(rows, dims))
        if any(matrix[:, d].min() == matrix[:, d].max() for d in range(dims)):
            matrix[0] += 1.0
        scale = rng.uniform(0.1, 100.0, dims)
        offset = rng.uniform(-50, 50, dims)
        params = CoverParams(int(rng.integers(1, 12)), float(rng.uniform(0, 0.9)))
        filt = FilterSpec(tuple(range(dims)))
        base = fit_cover(table_from(matrix), filt, params)
        mapped = fit_cover(table_from(matrix * scale + offset), filt, params)
        assert base.row_memberships(table_from(matrix), filt) == mapped.row_memberships(
            table_from(matrix * scale + offset), filt
        )


class TestPreimage:
    def test_minimum_row_in_first_element(self):
        table = table_from([[0.0, 10.0], [1.0, 11.0], [2.0, 12.0]])
        filt = FilterSpec((0, 1))
        cover = fit_cover(table, filt, CoverParams(3, 0.3))
        assert 0 in preimage(cover, cover.element((1, 1)), table, filt)

    def test_one_dimensional_overlap_membership(self):
        table = table_from([[0.0], [5.0], [10.0]])
        filt = FilterSpec((0,))
        cover = fit_cover(table, filt, CoverParams(2, 0.5))
        assert preimage(cover, cover.element((1,)), table, filt) == {0, 1}
        assert preimage(cover, cover.element((2,)), table, filt) == {1, 2}

    def test_every_row_covered(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            rows = int(rng.integers(2, 40))
            dims = int(rng.integers(1, 4))
            matrix = rng.uniform(-100, 100, size=(rows, dims))
            matrix[0] += 1.0  # avoid fully duplicate rows making a dim constant
            table = table_from(matrix)
            filt = FilterSpec(tuple(range(dims)))
            try:
                cover = fit_cover(table, filt, CoverParams(int(rng.integers(1, 10)), float(rng.uniform(0, 0.9))))
            except CoverError:
                continue
            memberships = cover.row_memberships(table, filt)
            assert all(len(ids) >= 1 for ids in memberships)

    def test_overlap_band_row_in_two_elements(self):
        table = table_from([[0.0], [5.0], [10.0]])
        filt = FilterSpec((0,))
        cover = fit_cover(table, filt, CoverParams(2, 0.5))
        memberships = cover.row_memberships(table, filt)
        assert memberships[1] == ((1,), (2,))  # 5 sits strictly inside the band

    def test_foreign_element_rejected(self):
        table = table_from([[0.0], [10.0]])
        filt = FilterSpec((0,))
        cover = fit_cover(table, filt, CoverParams(2, 0.5))
        with pytest.raises(CoverError, match="not in this cover"):
            preimage(cover, cover.element((2,)).__class__((9,), cover.element((2,)).box), table, filt)

    def test_empty_preimage_allowed(self):
        table = table_from([[0.0], [0.1], [10.0]])
        filt = FilterSpec((0,))
        cover = fit_cover(table, filt, CoverParams(5, 0.0))
        middle = preimage(cover, cover.element((3,)), table, filt)
        assert middle == set()


class TestFilterSpec:
    def test_duplicate_dims_rejected(self):
        with pytest.raises(CoverError, match="distinct"):
            FilterSpec((0, 0))

    def test_from_columns(self, geo_chain):
        filt = FilterSpec.from_columns(geo_chain, ["month", "longitude"])
        assert filt.dims == (0, 2)

    def test_out_of_range_dim(self):
        table = table_from([[0.0], [1.0]])
        with pytest.raises(CoverError, match="out of range"):
            FilterSpec((3,)).validate(table)
