"""Core series type: validation, resampling, scaling, slope sign, CSV input."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsdiff.series import Series, minmax_scale, read_series_csv, resample_linear, slope_sign


class TestSeriesValidation:
    def test_rejects_short_series(self):
        """A series needs at least two samples."""
        with pytest.raises(ValueError):
            Series("s", [1.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Series("s", [0.0, np.nan, 1.0])
        with pytest.raises(ValueError):
            Series("s", [0.0, np.inf])

    def test_values_are_immutable_float64(self):
        s = Series("s", [1, 2, 3])
        assert s.values.dtype == np.float64
        with pytest.raises(ValueError):
            s.values[0] = 9.0

    def test_rejects_multidimensional(self):
        with pytest.raises(ValueError):
            Series("s", [[1.0, 2.0], [3.0, 4.0]])


class TestResampleLinear:
    def test_linear_segment(self):
        """[0, 1] resampled to 3 points inserts the midpoint."""
        out = resample_linear(Series("s", [0.0, 1.0]), 3)
        np.testing.assert_allclose(out.values, [0.0, 0.5, 1.0])

    def test_collinear_points(self):
        out = resample_linear(Series("s", [0.0, 2.0, 4.0]), 5)
        np.testing.assert_allclose(out.values, [0.0, 1.0, 2.0, 3.0, 4.0])

    def test_identity_when_length_matches(self):
        values = np.random.default_rng(42).standard_normal(17)
        s = Series("s", values)
        np.testing.assert_array_equal(resample_linear(s, 17).values, s.values)

    def test_endpoints_preserved(self):
        rng = np.random.default_rng(42)
        s = Series("s", rng.standard_normal(100))
        for n in (2, 7, 100, 513):
            out = resample_linear(s, n)
            assert out.length == n
            assert out.values[0] == s.values[0]
            assert out.values[-1] == s.values[-1]

    def test_rejects_n_below_two(self):
        with pytest.raises(ValueError):
            resample_linear(Series("s", [0.0, 1.0]), 1)


class TestMinMaxScale:
    def test_affine_map(self):
        np.testing.assert_allclose(minmax_scale(Series("s", [2.0, 4.0, 6.0])).values, [0.0, 0.5, 1.0])

    def test_constant_series_maps_to_half(self):
        """The degenerate max == min case centers the series at 0.5."""
        np.testing.assert_array_equal(minmax_scale(Series("s", [5.0, 5.0, 5.0])).values, [0.5, 0.5, 0.5])

    def test_unit_interval_unchanged(self):
        np.testing.assert_array_equal(minmax_scale(Series("s", [0.0, 1.0])).values, [0.0, 1.0])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
    @settings(max_examples=200, deadline=None)
    def test_output_in_unit_interval_and_idempotent(self, values):
        """Scaling lands in [0, 1] and scaling twice changes nothing beyond 1e-9."""
        scaled = minmax_scale(Series("s", values))
        assert scaled.values.min() >= 0.0
        assert scaled.values.max() <= 1.0
        twice = minmax_scale(scaled)
        np.testing.assert_allclose(twice.values, scaled.values, atol=1e-9)


class TestSlopeSign:
    def test_perfect_ramps(self):
        assert slope_sign(Series("s", [0.0, 1.0, 2.0, 3.0])) == 1
        assert slope_sign(Series("s", [3.0, 2.0, 1.0, 0.0])) == -1
        assert slope_sign(Series("s", [1.0, 1.0, 1.0, 1.0])) == 0

    @given(st.lists(st.integers(-100, 100), min_size=2, max_size=30), st.integers(-10, 10))
    @settings(max_examples=200, deadline=None)
    def test_invariant_under_power_of_two_scaling(self, values, k):
        """Scaling every sample by a positive constant preserves the slope sign.

        Powers of two commute with float rounding, so the scaled covariance is
        exactly 2**k times the original and the property holds with equality.
        """
        base = Series("s", np.array(values, dtype=np.float64))
        scaled = Series("s", base.values * 2.0**k)
        assert slope_sign(base) == slope_sign(scaled)

    def test_shift_invariance_on_sloped_data(self):
        """A constant offset does not change the sign of a clear slope."""
        rng = np.random.default_rng(42)
        walk = np.cumsum(rng.standard_normal(200)) + 0.05 * np.arange(200)
        for shift in (-1e4, -1.0, 0.0, 3.5, 1e4):
            assert slope_sign(Series("s", walk + shift)) == slope_sign(Series("s", walk))


class TestReadSeriesCsv:
    def test_reads_rows_with_ids(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("alpha,0,1,2\nbeta,3,4,5,6\n")
        out = read_series_csv(path)
        assert [s.id for s in out] == ["alpha", "beta"]
        np.testing.assert_array_equal(out[0].values, [0.0, 1.0, 2.0])
        assert out[1].length == 4

    def test_reads_rows_without_ids(self, tmp_path):
        """A numeric first cell means the row has no id column."""
        path = tmp_path / "series.csv"
        path.write_text("0.5,1.5,2.5\n1,2,3\n")
        out = read_series_csv(path)
        assert out[0].values[0] == 0.5
        assert out[0].length == 3

    def test_rejects_non_numeric_samples(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("row1,1.0,oops,3.0\n")
        with pytest.raises(ValueError):
            read_series_csv(path)

    def test_rejects_empty_file(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("\n")
        with pytest.raises(ValueError):
            read_series_csv(path)
