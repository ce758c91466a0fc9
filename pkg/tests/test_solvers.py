import numpy as np
import pytest

from oracles import LevelEconomy
from defense_emissions.exceptions import ConvergenceError, ValidationError
from defense_emissions.network import HatState
from defense_emissions.scenarios import ScenarioSpec, steady_g_hat
from defense_emissions.solvers import (
    decompose_shocks,
    household_budget_gap,
    industry_report,
    solve_steady,
    solve_transition,
)

HAT_KEYS = ("p", "y", "VA", "X", "K", "Li", "r", "pI", "I", "f", "PVA", "PX", "C", "L", "w")


def test_zero_shock_is_trivial(toy_calib):
    sol = solve_steady(toy_calib, np.ones(3))
    assert sol.iterations == 0
    assert sol.state.max_abs_deviation(HatState.ones(3)) == 0.0
    assert sol.E_hat == pytest.approx(1.0, abs=1e-15)


def test_toy_economy_matches_level_solver():
    rng = np.random.default_rng(4)
    econ = LevelEconomy.random(3, rng)
    G = np.array([0.1, 0.2, 0.1]) * econ.solve(np.zeros(3))["C"]
    base = econ.solve(G)
    calib = econ.calibration(base, np.array([0.2, 0.4, 0.2]), 0.15, 0.05)
    ghat = np.array([2.0, 1.0, 1.0])
    new = econ.solve(G * ghat)
    sol = solve_steady(calib, ghat)
    for k in HAT_KEYS:
        np.testing.assert_allclose(getattr(sol.state, k), np.asarray(new[k]) / np.asarray(base[k]), atol=1e-8)


def test_solution_invariants(fixture_calib):
    G = steady_g_hat(ScenarioSpec.preset("baseline", 1.0), fixture_calib)
    sol = solve_steady(fixture_calib, G)
    assert sol.residual_norm < 1e-10
    assert np.exp(fixture_calib.beta_cons @ np.log(sol.state.p)) == pytest.approx(1.0, abs=1e-10)
    assert abs(household_budget_gap(sol.state, G, fixture_calib)) < 1e-12
    d = sol.log_decomposition()
    assert abs(d["gap"]) < 1e-14
    assert sol.E_hat > 1 and sol.intensity_hat > 1 and sol.Y_hat > 1


def test_emissions_increase_with_small_shocks(toy_calib):
    E = [solve_steady(toy_calib, steady_g_hat(ScenarioSpec.preset("baseline", e), toy_calib)).E_hat
         for e in (0.0, 0.01, 0.02)]
    assert E[0] < E[1] < E[2]


def test_iteration_cap(fixture_calib):
    G = steady_g_hat(ScenarioSpec.preset("material", 10.0), fixture_calib)
    with pytest.raises(ConvergenceError):
        solve_steady(fixture_calib, G, max_iter=1)


def test_transition_zero_shock(fixture_calib):
    sol = solve_transition(fixture_calib, ScenarioSpec(E_pp=0.0, rho=0.86), T=50)
    assert max(s.max_abs_deviation(HatState.ones(fixture_calib.n)) for s in sol.path) < 1e-12


def test_permanent_transition_lands_on_steady_state(fixture_calib):
    scen = ScenarioSpec.preset("baseline", 1.0)
    path = solve_transition(fixture_calib, scen)
    steady = solve_steady(fixture_calib, steady_g_hat(scen, fixture_calib))
    assert path.path[-1].max_abs_deviation(steady.state) < 1e-6
    np.testing.assert_array_equal(path.path[0].K, 1.0)


def test_temporary_transition_returns(fixture_calib):
    sol = solve_transition(fixture_calib, ScenarioSpec.preset("baseline", 1.0, rho=0.86), T=200)
    assert sol.path[-1].max_abs_deviation(HatState.ones(fixture_calib.n)) < 1e-6
    assert sol.E_hat[0] > 1
    gaps = [abs(d["gap"]) for d in sol.log_decomposition()]
    assert max(gaps) < 1e-13


def test_linear_path_scales_with_shock(fixture_calib):
    full = solve_transition(fixture_calib, ScenarioSpec.preset("baseline", 1.0, rho=0.86), T=100)
    half = solve_transition(fixture_calib, ScenarioSpec.preset("baseline", 0.5, rho=0.86), T=100)
    for k in ("y", "K", "p", "C"):
        a = np.log([getattr(s, k) for s in full.path])
        b = np.log([getattr(s, k) for s in half.path])
        np.testing.assert_allclose(b, a / 2, atol=1e-10)


def test_nonlinear_method_agrees_for_small_shocks(fixture_calib):
    scen = ScenarioSpec.preset("baseline", 0.1, rho=0.86)
    lin = solve_transition(fixture_calib, scen, T=100)
    non = solve_transition(fixture_calib, scen, T=100, method="nonlinear")
    dev = np.abs(lin.E_hat - 1).max()
    assert np.max(np.abs(lin.E_hat - non.E_hat)) < 0.05 * dev
    assert non.method == "nonlinear"
    with pytest.raises(ValidationError):
        solve_transition(fixture_calib, scen, T=100, method="spectral")


def test_decomposition(fixture_calib, toy_calib):
    off = decompose_shocks(toy_calib, ScenarioSpec(E_pp=0.0))
    for key in ("weapon", "energy", "joint"):
        assert off[key].E_hat == pytest.approx(1.0, abs=1e-15)
    out = decompose_shocks(fixture_calib, ScenarioSpec.preset("baseline", 1.0))
    joint = out["joint"].E_hat - 1
    assert out["energy"].E_hat > out["weapon"].E_hat
    assert abs(out["nonlinearity_gap"]) < 0.05 * abs(joint)


def test_industry_report(toy_calib, fixture_calib):
    trivial = industry_report(solve_steady(toy_calib, np.ones(3)), toy_calib)
    np.testing.assert_allclose(trivial[["output_pct", "capital_pct"]].to_numpy(), 0.0, atol=1e-12)
    shocked = industry_report(solve_steady(toy_calib, [3.0, 1.0, 1.0]), toy_calib)
    assert shocked["industry"].iloc[0] == toy_calib.labels[0]
    path = solve_transition(fixture_calib, ScenarioSpec.preset("baseline", 1.0, rho=0.86), T=100)
    rep = industry_report(path, fixture_calib)
    assert rep["weapon"].iloc[:2].all()
