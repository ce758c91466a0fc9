import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from oracles import dk_textbook
from defense_emissions.exceptions import DegenerateRegressorError, ValidationError
from defense_emissions.local_projections import (
    HIGH,
    LOW,
    LpSpec,
    PanelLocalProjection,
    SplitPanelLocalProjection,
    classify_emission_intensity,
    driscoll_kraay_cov,
    estimate_lp,
    split_lp,
    spillover_lp,
)
from defense_emissions.panel_data import PanelDataset
from defense_emissions.synthetic import simulate_lp_panel

BARE = LpSpec(horizon=4, controls=())


def step_panel(rng, n_c=40, n_y=200, size=lambda c: 1.0, noise=0.01):
    """log emissions move permanently by ``size(c)`` percent per unit shock."""
    frames, shocks = [], []
    years = 1800 + np.arange(n_y)
    for c in range(n_c):
        s = rng.normal(size=n_y)
        log_e = 3 + np.cumsum(size(c) * s / 100) + rng.normal(0, noise, n_y)
        frames.append(pd.DataFrame({"country": f"C{c:02d}", "year": years, "mil_share": 0.03,
                                    "real_gdp": 1.0, "emissions": np.exp(log_e)}))
        shocks.append(pd.DataFrame({"country": f"C{c:02d}", "year": years, "shock_pp": s}))
    return PanelDataset.from_frame(pd.concat(frames)), pd.concat(shocks)


# Driscoll-Kraay


def test_dk_matches_textbook_oracle(rng):
    time_ids = np.tile(np.arange(6), 3)
    X = np.column_stack([np.ones(18), rng.normal(size=(18, 2))])
    e = rng.normal(size=18)
    np.testing.assert_allclose(driscoll_kraay_cov(e, X, time_ids, 2), dk_textbook(e, X, time_ids, 2),
                               atol=1e-12, rtol=0)


def test_dk_lag_zero_single_country_is_white(rng):
    X = np.column_stack([np.ones(12), rng.normal(size=12)])
    e = rng.normal(size=12)
    bread = np.linalg.inv(X.T @ X)
    white = bread @ (X.T * e**2) @ X @ bread
    np.testing.assert_allclose(driscoll_kraay_cov(e, X, np.arange(12), 0), white, atol=1e-14)


def test_dk_zero_residuals_and_errors(rng):
    X = rng.normal(size=(10, 2))
    np.testing.assert_array_equal(driscoll_kraay_cov(np.zeros(10), X, np.arange(10) % 5, 2), 0.0)
    with pytest.raises(ValidationError):
        driscoll_kraay_cov(np.ones(10), X, np.zeros(10), 2)


def test_dk_rows_projection_matches_full(rng):
    time_ids = np.repeat(np.arange(8), 4)
    X = rng.normal(size=(32, 4))
    e = rng.normal(size=32)
    full = driscoll_kraay_cov(e, X, time_ids, 2)
    part = driscoll_kraay_cov(e, X, time_ids, 2, rows=[1, 3])
    np.testing.assert_allclose(part, full[np.ix_([1, 3], [1, 3])], atol=1e-13)


def test_dk_psd(rng):
    time_ids = np.repeat(np.arange(10), 3)
    X = rng.normal(size=(30, 3))
    cov = driscoll_kraay_cov(rng.normal(size=30), X, time_ids, 3)
    assert np.min(np.linalg.eigvalsh(cov)) > -1e-14


# estimate_lp


def test_permanent_step_recovered(rng):
    panel, shocks = step_panel(rng)
    irf = estimate_lp(panel, shocks, "emissions", BARE)
    assert np.max(np.abs(irf.beta - 1.0)) < 0.05
    assert irf.n_obs[0] > irf.n_obs[-1]


def test_unrelated_shock_averages_to_zero():
    betas = []
    for rep in range(20):
        rng = np.random.default_rng(rep)
        panel, _ = step_panel(rng, n_c=10, n_y=40)
        noise = pd.DataFrame({"country": panel.frame["country"], "year": panel.frame["year"],
                              "shock_pp": rng.normal(size=len(panel))})
        betas.append(estimate_lp(panel, noise, "emissions", BARE).beta)
    betas = np.array(betas)
    mc_se = betas.std(axis=0, ddof=1) / np.sqrt(len(betas))
    assert np.all(np.abs(betas.mean(axis=0)) < 2.5 * mc_se + 1e-3)


def test_zero_variance_shock_is_degenerate(rng):
    panel, shocks = step_panel(rng, n_c=5, n_y=30)
    shocks["shock_pp"] = 1.0
    with pytest.raises(DegenerateRegressorError):
        estimate_lp(panel, shocks, "emissions", BARE)


def test_fixed_effect_invariances(rng):
    panel, shocks = step_panel(rng, n_c=8, n_y=40, noise=0.05)
    base = estimate_lp(panel, shocks, "emissions", BARE)
    df = panel.frame.copy()
    codes = df["country"].str[1:].astype(int)
    df["emissions"] *= np.exp(0.3 * codes)
    by_country = estimate_lp(PanelDataset.from_frame(df), shocks, "emissions", BARE)
    np.testing.assert_allclose(by_country.beta, base.beta, atol=1e-9)
    df["emissions"] *= np.exp(0.01 * (df["year"] - 1800) ** 1.5)
    by_year = estimate_lp(PanelDataset.from_frame(df), shocks, "emissions", BARE)
    np.testing.assert_allclose(by_year.beta, base.beta, atol=1e-9)
    df["emissions"] *= 17.0
    np.testing.assert_allclose(estimate_lp(PanelDataset.from_frame(df), shocks, "emissions", BARE).beta,
                               base.beta, atol=1e-9)


def test_bands(rng):
    panel, shocks = step_panel(rng, n_c=8, n_y=40)
    irf = estimate_lp(panel, shocks, "emissions", BARE)
    assert np.all(irf.ci_lo <= irf.beta) and np.all(irf.beta <= irf.ci_hi)
    np.testing.assert_allclose(irf.ci_hi - irf.ci_lo, 2 * norm.ppf(0.84) * irf.se, rtol=1e-12)
    assert norm.ppf(0.84) == pytest.approx(0.9945, abs=1e-4)
    wide = estimate_lp(panel, shocks, "emissions", LpSpec(horizon=4, controls=(), ci_level=0.9))
    assert np.all(wide.ci_hi - wide.ci_lo > irf.ci_hi - irf.ci_lo)


def test_default_controls_and_estimator(rng):
    df, shocks = simulate_lp_panel(10, 50, rng, max_h=4)
    panel = PanelDataset.from_frame(df)
    irf = estimate_lp(panel, shocks, "emissions", LpSpec(horizon=4))
    est = PanelLocalProjection(horizon=4).fit(panel, shocks)
    np.testing.assert_array_equal(est.predict(), irf.beta)
    assert est.get_params()["horizon"] == 4
    frame = irf.to_frame()
    assert list(frame.columns) == ["h", "beta", "se", "lo", "hi", "n"]


def test_log_drops_nonpositive_rows(rng):
    panel, shocks = step_panel(rng, n_c=6, n_y=40)
    df = panel.frame.copy()
    df.loc[3, "emissions"] = 0.0
    irf = estimate_lp(PanelDataset.from_frame(df), shocks, "emissions", BARE)
    assert irf.dropped_nonpositive == 1


# groups and split


def test_median_split():
    df = pd.DataFrame({"country": list("ABCD"), "year": 2000, "mil_share": 0.02,
                       "real_gdp": 1.0, "emissions": [1.0, 2.0, 3.0, 4.0]})
    g = classify_emission_intensity(PanelDataset.from_frame(df))
    assert sorted(g.members(HIGH)) == ["C", "D"]
    df["emissions"] = 2.0
    g = classify_emission_intensity(PanelDataset.from_frame(df))
    assert g.members(HIGH) == []


def test_split_trivial_partition_equals_estimate_lp(rng):
    panel, shocks = step_panel(rng, n_c=6, n_y=40)
    groups = {c: LOW for c in panel.countries}
    out = split_lp(panel, shocks, "emissions", BARE, groups)
    ref = estimate_lp(panel, shocks, "emissions", BARE)
    assert out[HIGH] is None
    np.testing.assert_allclose(out[LOW].beta, ref.beta, atol=1e-10)
    np.testing.assert_allclose(out[LOW].se, ref.se, rtol=1e-8)


def test_split_recovers_ratio(rng):
    panel, shocks = step_panel(rng, n_c=20, n_y=120, size=lambda c: 2.0 if c < 10 else 1.0)
    groups = {c: HIGH if int(c[1:]) < 10 else LOW for c in panel.countries}
    out = SplitPanelLocalProjection(horizon=4, controls=(), groups=groups).fit(panel, shocks).irfs_
    ratio = out[HIGH].beta / out[LOW].beta
    assert np.all(np.abs(ratio - 2.0) < 0.15)


def test_split_single_country_group(rng):
    panel, shocks = step_panel(rng, n_c=4, n_y=30)
    groups = {"C00": HIGH, "C01": LOW, "C02": LOW, "C03": LOW}
    with pytest.raises(DegenerateRegressorError):
        split_lp(panel, shocks, "emissions", BARE, groups)


# spillover


def ally_panel(rng, effect):
    # the shock is common, so precision comes from the time dimension alone
    years = 1000 + np.arange(1500)
    us = rng.normal(size=len(years))
    kernel = np.array([effect] * 4) / 100
    frames = []
    for c in range(6):
        share = 0.02 + np.convolve(us, kernel)[: len(years)] + rng.normal(0, 1e-4, len(years))
        frames.append(pd.DataFrame({"country": f"A{c:02d}", "year": years, "mil_share": share,
                                    "real_gdp": 1.0}))
    return PanelDataset.from_frame(pd.concat(frames)), pd.DataFrame({"country": "USA", "year": years,
                                                                     "shock_pp": us})


def test_spillover_recovers_known_response(rng):
    panel, us = ally_panel(rng, 0.15)
    irf = spillover_lp(panel, us, spec=LpSpec(horizon=6, controls=(), year_fe=False))
    np.testing.assert_allclose(irf.beta[:4], 0.15, atol=0.03)
    np.testing.assert_allclose(irf.beta[4:], 0.0, atol=0.03)
    flat = spillover_lp(*ally_panel(rng, 0.0), spec=LpSpec(horizon=6, controls=(), year_fe=False))
    assert np.max(np.abs(flat.beta)) < 0.01


def test_spillover_with_year_effects_is_collinear(rng):
    panel, us = ally_panel(rng, 0.15)
    with pytest.raises(DegenerateRegressorError):
        spillover_lp(panel, us, spec=LpSpec(horizon=2, controls=(), year_fe=True))
