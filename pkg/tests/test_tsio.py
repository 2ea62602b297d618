"""Delimited-table ingestion, preprocessing, and series round trips."""

import numpy as np
import pytest

from spectral_cig import (
    InvalidInputError,
    MissingValueError,
    MultiAttributeSeries,
    load_series,
    preprocess,
    read_table,
    write_series,
)


def write_text(path, text):
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# parsing


class TestReadTable:
    def test_labels_and_values(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n1,2\n3,4\n")
        table = read_table(p)
        assert table.labels == ("a", "b")
        assert np.array_equal(table.values, [[1.0, 2.0], [3.0, 4.0]])
        assert table.n_rows == 2 and table.n_columns == 2

    def test_custom_delimiter_and_whitespace(self, tmp_path):
        p = write_text(tmp_path / "t.txt", " a ; b \n 1 ; 2 \n")
        table = read_table(p, delimiter=";")
        assert table.labels == ("a", "b")
        assert np.array_equal(table.values, [[1.0, 2.0]])

    def test_blank_lines_skipped(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n\n1,2\n  \n3,4\n")
        assert read_table(p).n_rows == 2

    def test_missing_tokens_become_nan(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b,c\nna,NaN,null\nNone,,5\n")
        values = read_table(p).values
        assert np.isnan(values[0]).all()
        assert np.isnan(values[1, :2]).all()
        assert values[1, 2] == 5.0

    def test_unparseable_cell_reports_position(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n1,x7\n")
        with pytest.raises(InvalidInputError, match="row 2.*'b'"):
            read_table(p)

    def test_ragged_row_rejected(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n1,2,3\n")
        with pytest.raises(InvalidInputError, match="row 2"):
            read_table(p)

    def test_header_only_rejected(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n")
        with pytest.raises(InvalidInputError):
            read_table(p)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            read_table(tmp_path / "absent.csv")


# ---------------------------------------------------------------------------
# series loading


class TestLoadSeries:
    def test_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        series = MultiAttributeSeries(data=rng.standard_normal((16, 6)), p=3, m=2)
        path = tmp_path / "s.csv"
        write_series(series, path)
        back = load_series(path, p=3, m=2)
        assert np.array_equal(back.data, series.data)
        assert back.p == 3 and back.m == 2

    def test_written_header_is_node_major(self, tmp_path):
        series = MultiAttributeSeries(data=np.ones((4, 4)), p=2, m=2)
        path = tmp_path / "s.csv"
        write_series(series, path)
        header = path.read_text().splitlines()[0]
        assert header == "node0_attr0,node0_attr1,node1_attr0,node1_attr1"

    def test_channel_count_mismatch(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b,c\n1,2,3\n")
        with pytest.raises(InvalidInputError, match="expected 4 channels"):
            load_series(p, p=2, m=2)

    def test_unknown_layout(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n1,2\n")
        with pytest.raises(InvalidInputError, match="layout"):
            load_series(p, p=2, m=1, layout="row-major")

    def test_attribute_major_reorder(self, tmp_path):
        # columns ordered attribute-major: n0a0, n1a0, n0a1, n1a1
        p = write_text(
            tmp_path / "t.csv",
            "n0a0,n1a0,n0a1,n1a1\n1,2,3,4\n1,2,3,4\n",
        )
        series = load_series(p, p=2, m=2, layout="attribute-major")
        assert series.channel(0, 0)[0] == 1.0
        assert series.channel(0, 1)[0] == 3.0
        assert series.channel(1, 0)[0] == 2.0
        assert series.channel(1, 1)[0] == 4.0

    def test_missing_value_rejected_by_default(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n1,2\n1,na\n")
        with pytest.raises(MissingValueError, match="row 3.*'b'"):
            load_series(p, p=2, m=1)

    def test_forward_fill_imputes_gaps(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\n1,10\nna,na\n3,na\n")
        series = load_series(p, p=2, m=1, forward_fill=True)
        assert np.array_equal(series.data, [[1.0, 10.0], [1.0, 10.0], [3.0, 10.0]])

    def test_forward_fill_needs_complete_first_row(self, tmp_path):
        p = write_text(tmp_path / "t.csv", "a,b\nna,2\n3,4\n")
        with pytest.raises(MissingValueError, match="first data row"):
            load_series(p, p=2, m=1, forward_fill=True)


# ---------------------------------------------------------------------------
# preprocessing


def positive_series(seed=0, n=200, p=2, m=2):
    rng = np.random.default_rng(seed)
    walk = np.cumsum(rng.standard_normal((n, m * p)) * 0.05, axis=0)
    return MultiAttributeSeries(data=np.exp(walk + 2.0), p=p, m=m)


class TestPreprocess:
    def test_log_ratio_only(self):
        series = positive_series()
        out = preprocess(series, detrend=False, scale=False)
        expected = np.log(series.data[1:] / series.data[:-1])
        assert np.allclose(out.data, expected, rtol=0, atol=0)
        assert out.n == series.n - 1
        assert out.p == series.p and out.m == series.m

    def test_postconditions_unit_power_and_no_trend(self):
        out = preprocess(positive_series())
        t = np.arange(out.n, dtype=float)
        for j in range(out.n_channels):
            col = out.data[:, j]
            assert np.mean(col**2) == pytest.approx(1.0, abs=1e-12)
            slope, intercept = np.polyfit(t, col, 1)
            assert abs(slope) <= 1e-10
            assert abs(intercept) <= 1e-8

    def test_shift_handles_zeros(self):
        data = np.column_stack([np.array([0.0, 1.0, 2.0, 4.0]), np.ones(4)])
        series = MultiAttributeSeries(data=data, p=2, m=1)
        out = preprocess(series, detrend=False, scale=False)
        assert np.all(np.isfinite(out.data))
        # the shifted first channel starts near zero, so the first ratio is huge
        assert out.data[0, 0] > 10.0

    def test_unshiftable_channel_rejected(self):
        data = np.column_stack([np.array([-5.0, 1.0, 1.0]), np.ones(3)])
        series = MultiAttributeSeries(data=data, p=2, m=1)
        with pytest.raises(InvalidInputError, match="non-positive"):
            preprocess(series)

    def test_constant_channel_warns_and_stays_zero(self):
        data = np.column_stack([np.full(10, 3.0), np.exp(np.arange(10.0))])
        series = MultiAttributeSeries(data=data, p=2, m=1)
        with pytest.warns(RuntimeWarning, match="constant"):
            out = preprocess(series)
        assert np.all(out.data[:, 0] == 0.0)

    def test_too_short_series_rejected(self):
        series = MultiAttributeSeries(data=np.ones((2, 2)), p=2, m=1)
        with pytest.raises(InvalidInputError, match="at least 3"):
            preprocess(series)
