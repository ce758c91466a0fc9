import numpy as np
import pandas as pd
import pytest

from defense_emissions.cli import data_path
from defense_emissions.exceptions import ValidationError
from defense_emissions.panel_data import (
    PanelDataset,
    SpendingTransformer,
    gordon_krenn,
    hall_barro_redlick,
    load_panel,
    quadratic_trend,
    read_schema,
)


def _write(tmp_path, text, name="panel.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _economy(years, mil, ngdp, defl, rgdp):
    return pd.DataFrame({"country": "AAA", "year": years, "mil_share": mil, "nominal_gdp": ngdp,
                         "deflator": defl, "real_gdp": rgdp})


def test_load_small_csv(tmp_path):
    rows = ["country,year,mil_share,real_gdp,emissions"]
    for c in ("USA", "GBR"):
        for y in (1990, 1991, 1992):
            rows.append(f"{c},{y},0.03,100,5")
    panel = load_panel(_write(tmp_path, "\n".join(rows) + "\n"))
    assert len(panel) == 6
    assert panel.countries == ["GBR", "USA"]
    assert panel.years == [1990, 1991, 1992]


def test_duplicate_key_rejected(tmp_path):
    text = "country,year,mil_share,real_gdp\nUSA,1990,0.03,100\nUSA,1990,0.04,101\n"
    with pytest.raises(ValidationError, match="duplicate"):
        load_panel(_write(tmp_path, text))


def test_missing_column_and_bad_cell(tmp_path):
    with pytest.raises(ValidationError, match="missing"):
        load_panel(_write(tmp_path, "country,year,real_gdp\nUSA,1990,100\n"))
    with pytest.raises(ValidationError, match="non-numeric"):
        load_panel(_write(tmp_path, "country,year,mil_share,real_gdp\nUSA,1990,abc,100\n", "b.csv"))


def test_schema_renames_columns(tmp_path):
    schema = _write(tmp_path, "country = iso\nyear = yr\nmil_share = milex\n", "schema.cfg")
    csv = _write(tmp_path, "iso,yr,milex,real_gdp\nUSA,2000,0.03,10\nUSA,2001,0.031,11\n")
    panel = load_panel(csv, read_schema(schema))
    assert panel.frame["mil_share"].tolist() == [0.03, 0.031]


def test_out_of_range_rows_dropped_and_gaps_flagged():
    df = pd.DataFrame({"country": "AAA", "year": [2000, 2001, 2003], "mil_share": [0.02, 1.5, 0.02],
                       "real_gdp": [1.0, 1.0, 1.0]})
    panel = PanelDataset.from_frame(df)
    assert len(panel) == 2 and len(panel.rejected) == 1
    assert panel.gaps == {"AAA": (2000,)}


def test_shipped_panel_size():
    panel = load_panel(data_path("panel.csv"), read_schema(data_path("schema.cfg")))
    assert len(panel) == 940
    assert len(panel.countries) == 20


def test_quadratic_trend_cases():
    t = np.arange(1960, 2000)
    exact = pd.Series(2 + 3 * t + t**2, index=t, dtype=float)
    np.testing.assert_allclose(quadratic_trend(exact), exact, rtol=1e-12)
    const = pd.Series(4.0, index=t)
    np.testing.assert_allclose(quadratic_trend(const), 4.0, rtol=1e-12)
    cubic = pd.Series((t - 1980.0) ** 3 / 100, index=t)
    # normal equations on a shifted index keep the oracle well conditioned
    s = t - 1980.0
    Xs = np.column_stack([np.ones(len(t)), s, s**2])
    oracle = Xs @ np.linalg.solve(Xs.T @ Xs, Xs.T @ cubic.to_numpy())
    np.testing.assert_allclose(quadratic_trend(cubic).to_numpy(), oracle, atol=1e-9)
    with pytest.raises(ValidationError):
        quadratic_trend(pd.Series([1.0, 2.0, 3.0], index=[1, 2, 3]))


def test_gordon_krenn_examples(rng):
    years = np.arange(1970, 2000)
    s = years - 1970.0
    rgdp = 100 + 2 * s + 0.05 * s**2
    mil = rng.uniform(0.02, 0.05, len(years))
    ngdp = rgdp * 1.0
    gk = gordon_krenn(_economy(years, mil, ngdp, 1.0, rgdp))
    np.testing.assert_allclose(gk.values.to_numpy(), mil * ngdp / rgdp, rtol=1e-10)

    flat = gordon_krenn(_economy(years, 0.03, 50.0, 1.2, 80.0))
    np.testing.assert_allclose(flat.values.to_numpy(), flat.values.iloc[0], rtol=1e-12)

    rgdp = 100 * np.exp(0.03 * s + rng.normal(0, 0.01, len(s)))
    defl = np.exp(0.02 * s)
    ngdp = rgdp * defl
    gk = gordon_krenn(_economy(years, mil, ngdp, defl, rgdp))
    X = np.column_stack([np.ones_like(s), s, s**2])
    trend = X @ np.linalg.solve(X.T @ X, X.T @ rgdp)
    np.testing.assert_allclose(gk.values.to_numpy(), mil * ngdp / defl / trend, atol=1e-10)

    scaled = gordon_krenn(_economy(years, mil, 7.0 * ngdp, defl, rgdp))
    np.testing.assert_allclose(scaled.values / 7.0, gk.values, rtol=1e-12)


def test_hall_barro_redlick_examples(rng):
    years = np.arange(2000, 2005)
    out = hall_barro_redlick(_economy(years, 0.03, 100.0, 1.0, 100.0))
    assert len(out.values) == len(years) - 1
    np.testing.assert_allclose(out.values, 0.0)

    two = hall_barro_redlick(_economy([2000, 2001], [0.01, 0.02], 100.0, 1.0, 100.0))
    assert two.values.loc[2001] == pytest.approx(0.01)

    n = 30
    mil = np.abs(0.03 + rng.normal(0, 0.002, n).cumsum())
    ngdp = 100 * np.exp(rng.normal(0.03, 0.02, n).cumsum())
    defl = np.exp(rng.normal(0.02, 0.01, n).cumsum())
    rgdp = ngdp / defl
    out = hall_barro_redlick(_economy(np.arange(n) + 1950, mil, ngdp, defl, rgdp))
    m = mil * ngdp / defl
    np.testing.assert_allclose(out.values.to_numpy(), np.diff(m) / rgdp[:-1], atol=1e-12)

    with pytest.raises(ValidationError):
        hall_barro_redlick(_economy([2000, 2002], 0.03, 100.0, 1.0, 100.0))


def test_spending_transformer_long_frame():
    panel = load_panel(data_path("panel.csv"), read_schema(data_path("schema.cfg")))
    out = SpendingTransformer("hbr").fit_transform(panel)
    assert list(out.columns) == ["country", "year", "value"]
    assert len(out) == 940 - 20
    with pytest.raises(ValidationError):
        SpendingTransformer("bogus").fit(panel)
