import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tapestry.dataio import (MEAN, SUM, DataError, load_monthly_csv,
                             parse_subset_code, standardize_and_anomalize,
                             to_seasonal)


def write_csv(tmp_path, rows, header="year,month,temp,precip"):
    path = tmp_path / "data.csv"
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


def monthly_rows(start_year, n_months, fn):
    """Rows from (year, month) -> (v1, v2)."""
    rows = []
    year, month = start_year, 1
    for _ in range(n_months):
        vals = fn(year, month)
        rows.append(f"{year},{month}," + ",".join(str(v) for v in vals))
        month += 1
        if month > 12:
            month, year = 1, year + 1
    return rows


class TestLoadMonthlyCsv:
    def test_identity_load(self, tmp_path):
        rows = monthly_rows(2001, 24, lambda y, m: (m * 1.0, m * 2.0))
        table = load_monthly_csv(write_csv(tmp_path, rows), ["temp", "precip"], [MEAN, SUM])
        assert len(table.years) == 24
        assert table.variables == ("temp", "precip")
        assert table.values.shape == (24, 2)

    def test_duplicate_month_rejected(self, tmp_path):
        rows = monthly_rows(2001, 6, lambda y, m: (1.0, 2.0))
        rows.append("2001,3,9.0,9.0")
        with pytest.raises(DataError, match=r"(2001,3)"):
            load_monthly_csv(write_csv(tmp_path, rows), ["temp", "precip"], [MEAN, SUM])

    def test_nan_rejected(self, tmp_path):
        rows = ["2001,1,1.0,NaN"]
        with pytest.raises(DataError, match="non-finite"):
            load_monthly_csv(write_csv(tmp_path, rows), ["temp", "precip"], [MEAN, SUM])

    def test_missing_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("year,month,temp\n2001,1,1.0\n")
        with pytest.raises(DataError, match="header"):
            load_monthly_csv(path, ["temp", "precip"], [MEAN, SUM])

    def test_unparseable_number_names_row(self, tmp_path):
        rows = ["2001,1,1.0,2.0", "2001,2,oops,2.0"]
        with pytest.raises(DataError, match=":3"):
            load_monthly_csv(write_csv(tmp_path, rows), ["temp", "precip"], [MEAN, SUM])


class TestToSeasonal:
    def make_table(self, tmp_path, fn, n_months=36, start_year=2000):
        rows = monthly_rows(start_year, n_months, fn)
        return load_monthly_csv(write_csv(tmp_path, rows), ["temp", "precip"], [MEAN, SUM])

    def test_constant_mean(self, tmp_path):
        table = self.make_table(tmp_path, lambda y, m: (2.0, 0.0))
        with pytest.warns(UserWarning):
            s = to_seasonal(table)
        assert np.allclose(s.values[:, :, 0], 2.0)

    def test_sum_tag(self, tmp_path):
        # precip months 1,2,3 of Spring 2000 -> 6
        def fn(y, m):
            return (0.0, {3: 1.0, 4: 2.0, 5: 3.0}.get(m, 0.0) if y == 2001 else 0.0)
        with pytest.warns(UserWarning):
            s = to_seasonal(self.make_table(tmp_path, fn))
        yi = s.years.index(2001)
        assert s.values[yi, 1, 1] == pytest.approx(6.0)

    def test_sum_per_aggregation_rule(self, tmp_path):
        # sunspot-style SUM: months 10,20,30 -> 60
        def fn(y, m):
            return (0.0, {6: 10.0, 7: 20.0, 8: 30.0}.get(m, 0.0) if y == 2001 else 0.0)
        with pytest.warns(UserWarning):
            s = to_seasonal(self.make_table(tmp_path, fn))
        yi = s.years.index(2001)
        assert s.values[yi, 2, 1] == pytest.approx(60.0)

    def test_december_joins_next_winter(self, tmp_path):
        def fn(y, m):
            return (100.0 if (y, m) == (2000, 12) else 1.0, 0.0)
        with pytest.warns(UserWarning):
            s = to_seasonal(self.make_table(tmp_path, fn, n_months=36))
        yi = s.years.index(2001)
        assert s.values[yi, 0, 0] == pytest.approx((100.0 + 1.0 + 1.0) / 3.0)

    def test_roundtrip_constant_data(self, tmp_path):
        # MEAN seasonal values x3 recover monthly sums on constant data
        table = self.make_table(tmp_path, lambda y, m: (3.5, 1.0))
        with pytest.warns(UserWarning):
            s = to_seasonal(table)
        monthly_sum_per_season = 3 * 3.5
        assert np.allclose(s.values[:, :, 0] * 3, monthly_sum_per_season, atol=1e-9)

    def test_incomplete_seasons_dropped_with_warning(self, tmp_path):
        # 14 months starting Jan: leading Winter (no Dec) and trailing
        # partial seasons must be trimmed, leaving one whole year
        table = self.make_table(tmp_path, lambda y, m: (1.0, 1.0), n_months=26)
        with pytest.warns(UserWarning):
            s = to_seasonal(table)
        assert s.years == (2001,)


class TestStandardizeAndAnomalize:
    def test_two_year_symmetry(self):
        from conftest import make_series
        vals = np.zeros((8, 1))
        vals[0::4, 0] = [2.0, 4.0]     # winters of 2 training years
        vals[1::4, 0] = [1.0, 3.0]
        vals[2::4, 0] = [0.0, 2.0]
        vals[3::4, 0] = [5.0, 7.0]
        s = make_series(vals)
        out = standardize_and_anomalize(s, train_through=2001)
        winter = out.values[:, 0, 0]
        assert winter[0] == pytest.approx(-winter[1])

    def test_constant_variable_errors(self):
        from conftest import make_series
        s = make_series(np.ones((8, 1)))
        with pytest.raises(DataError, match="zero training sd"):
            standardize_and_anomalize(s, train_through=2001)

    def test_training_anomaly_means_zero(self, rng):
        from conftest import make_series
        s = make_series(rng.normal(size=(40, 3)))
        out = standardize_and_anomalize(s, train_through=2006)
        train = out.values[:7]
        assert np.allclose(train.mean(axis=0), 0.0, atol=1e-9)

    def test_test_years_use_training_parameters(self, rng):
        # hand-rolled two-pass mean/sd on a 3-year toy panel
        from conftest import make_series
        vals = rng.normal(size=(12, 1))
        s = make_series(vals)
        out = standardize_and_anomalize(s, train_through=2001)
        train = vals[:8, 0]
        mean = sum(train) / len(train)
        sd = (sum((v - mean) ** 2 for v in train) / len(train)) ** 0.5
        scaled = (vals[:, 0] - mean) / sd
        for sidx in range(4):
            season_train = [scaled[y * 4 + sidx] for y in range(2)]
            smean = sum(season_train) / 2
            expect_test = scaled[8 + sidx] - smean
            assert out.values[2, sidx, 0] == pytest.approx(expect_test, abs=1e-12)


class TestParseSubsetCode:
    def test_paper_codes(self):
        assert parse_subset_code("127", 9).subset == frozenset({1, 2, 7})
        assert parse_subset_code("1-9", 9).subset == frozenset(range(1, 10))

    def test_empty_errors(self):
        with pytest.raises(DataError):
            parse_subset_code("", 9)

    @pytest.mark.parametrize("code", ["0", "107", "93"])
    def test_bad_digits(self, code):
        with pytest.raises(DataError):
            parse_subset_code(code, 8)

    @given(st.lists(st.integers(1, 9), min_size=1, max_size=9, unique=True),
           st.lists(st.integers(1, 9), min_size=1, max_size=9, unique=True))
    def test_injective_on_digit_strings(self, a, b):
        ca = parse_subset_code("".join(map(str, a)), 9)
        cb = parse_subset_code("".join(map(str, b)), 9)
        if set(a) != set(b):
            assert ca.subset != cb.subset
