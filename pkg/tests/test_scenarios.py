import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from defense_emissions.exceptions import ConfigError, ValidationError
from defense_emissions.scenarios import (
    PRESETS,
    DamageSpec,
    ScenarioSpec,
    emissions_report,
    energy_multiplier,
    government_path,
    parse_grid,
    parse_scenario,
    procurement_multiplier,
    scc_damages,
    steady_g_hat,
    sweep,
)
from defense_emissions.solvers import solve_steady


def test_multiplier_examples():
    assert procurement_multiplier(0.02, 0.3, 0.0) == 1.0
    assert procurement_multiplier(0.02, 0.3, 0.01) == pytest.approx(1.15)
    assert procurement_multiplier(0.0066, 0.3, 0.033) == pytest.approx(2.5)
    assert energy_multiplier(0.00066, 0.05, 0.033) == pytest.approx(3.5)
    assert energy_multiplier(0.001, 0.0, 0.05) == 1.0
    with pytest.raises(ValidationError):
        procurement_multiplier(0.0, 0.3, 0.01)


@given(S=st.floats(1e-4, 0.1), s=st.floats(0, 1), E=st.floats(-0.01, 0.2))
def test_multipliers_affine(S, s, E):
    pm = procurement_multiplier(S, s, E)
    assert pm == pytest.approx(1 + s * E / S, rel=1e-12)
    if E >= 0:
        assert pm >= 1


def test_presets_and_ordering(fixture_calib):
    assert PRESETS == {"baseline": (0.3, 0.05), "personnel": (0.2, 0.02), "material": (0.4, 0.1)}
    ms = {k: ScenarioSpec.preset(k, 2.0).multipliers(fixture_calib) for k in PRESETS}
    assert ms["material"][0] > ms["baseline"][0] > ms["personnel"][0]
    assert ms["material"][1] > ms["baseline"][1] > ms["personnel"][1]
    with pytest.raises(ValidationError):
        ScenarioSpec(s_P=0.2, label="baseline")


def test_spec_validation():
    with pytest.raises(ValidationError):
        ScenarioSpec(s_P=0.8, s_E=0.3, label="custom")
    with pytest.raises(ValidationError):
        ScenarioSpec(rho=0.0)
    with pytest.raises(ValidationError):
        ScenarioSpec(E_pp=-5.0, base_mil_share=0.03)


def test_government_path_examples(toy_calib):
    flat = government_path(ScenarioSpec(E_pp=1.0, S_P=0.003, S_E=0.0005), toy_calib, 5)
    pm, em = ScenarioSpec(E_pp=1.0, S_P=0.003, S_E=0.0005).multipliers(toy_calib)
    np.testing.assert_allclose(flat.values[:, 0], pm)
    np.testing.assert_allclose(flat.values[:, 1], em)
    np.testing.assert_array_equal(flat.values[:, 2], 1.0)

    # S_P = s_P * E gives PM - 1 = 1
    scen = ScenarioSpec(E_pp=1.0, s_P=0.3, s_E=0.0, rho=0.86, S_P=0.003, label="custom")
    g = government_path(scen, toy_calib, 300)
    assert g.values[10, 0] == pytest.approx(1 + 0.86**10)
    assert g.values[10, 0] == pytest.approx(1.2213, abs=1e-4)
    assert abs(g.values[-1, 0] - 1) < 1e-15
    assert np.all(np.diff(g.values[:, 0]) <= 0)


def test_delayed_shock(toy_calib):
    scen = ScenarioSpec(E_pp=1.0, rho=0.5, t0=3, S_P=0.003, S_E=0.0005)
    g = government_path(scen, toy_calib, 6)
    np.testing.assert_array_equal(g.values[:3], 1.0)
    assert g.values[3, 0] > 1


def test_damages():
    spec = DamageSpec(190, 6.09e9, 2e13)
    assert scc_damages(0.0, spec) == (0.0, 0.0)
    assert scc_damages(1.18, spec)[0] == pytest.approx(13.65e9, rel=1e-2)
    assert scc_damages(6.0, spec)[0] == pytest.approx(69.4e9, rel=1e-2)
    dollars, share = scc_damages(6.0, spec)
    assert share == pytest.approx(100 * dollars / 2e13)
    assert scc_damages(2.0, spec)[0] == pytest.approx(2 * scc_damages(1.0, spec)[0])
    with pytest.raises(ValidationError):
        DamageSpec(-1, 1, 1)


def test_parse_scenario_keys(toy_calib):
    scen, dmg = parse_scenario({"E_pp": "korean_war", "base_mil_share": "0.033", "rho": "0.86"})
    assert scen.E_pp == pytest.approx(13.9 - 3.3)
    assert dmg is None
    scen, _ = parse_scenario({"E_pp": "doubling", "base_mil_share": "0.033"})
    assert scen.E_pp == pytest.approx(3.3)
    scen, dmg = parse_scenario({"E_pp": "1", "preset": "material", "scc": "190",
                                "base_emissions_t": "6.09e9", "base_gdp": "2e13"})
    assert (scen.s_P, scen.s_E) == (0.4, 0.1)
    assert dmg.scc == 190
    for bad in ({"E_pp": "lots"}, {"preset": "navy"}, {"color": "red"}, {"scc": "190"},
                {"preset": "baseline", "s_P": "0.9"}):
        with pytest.raises(ConfigError):
            parse_scenario(bad)


def test_grid_parsing():
    np.testing.assert_allclose(parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(parse_grid("0,2.5"), [0, 2.5])
    with pytest.raises(ConfigError):
        parse_grid("0:1:0")


def test_report_decomposition(toy_calib):
    scen = ScenarioSpec.preset("baseline", 0.0)
    rep = emissions_report(solve_steady(toy_calib, steady_g_hat(scen, toy_calib)), scen, toy_calib)
    assert rep["emissions_pct"] == 0 and rep["real_gdp_pct"] == 0
    scen = ScenarioSpec.preset("baseline", 1.0)
    rep = emissions_report(solve_steady(toy_calib, steady_g_hat(scen, toy_calib)), scen, toy_calib,
                           DamageSpec(190, 6.09e9, 2e13))
    assert abs(rep["decomposition"]["gap"]) < 1e-14
    assert "transition" in rep["damages"]["note"]


def test_sweep_frame(toy_calib):
    df = sweep(toy_calib, [0.0, 1.0], ["baseline"])
    assert list(df.columns) == ["preset", "E_pp", "emissions_pct", "intensity_pct", "real_gdp_pct"]
    assert df["emissions_pct"].iloc[0] == 0
