"""Steady-state and perfect-foresight transition solvers."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import linalg

from .calibration import Calibration
from .exceptions import ConvergenceError, ValidationError
from .network import (
    GovernmentPath,
    HatState,
    Layout,
    _check_G,
    emissions_hat,
    fuel_hat,
    real_gdp_hat,
    reduced_jacobians,
    reduced_residuals,
    state_from_reduced,
    steady_residuals,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SteadySolution:
    state: HatState
    G_hat: np.ndarray
    E_hat: float
    Y_hat: float
    intensity_hat: float
    residual_norm: float
    iterations: int
    z: np.ndarray = field(repr=False, default=None)

    def log_decomposition(self) -> dict[str, float]:
        return _log_decomposition(self.E_hat, self.Y_hat, self.intensity_hat)


@dataclass(frozen=True)
class TransitionSolution:
    """Perfect-foresight path for ``t = 0..T``.

    ``K_next[t]`` is the capital stock installed for use in ``t + 1``; this is
    the dating used for capital responses in reports.
    """

    path: tuple[HatState, ...]
    K_next: np.ndarray
    G_path: GovernmentPath
    E_hat: np.ndarray
    Y_hat: np.ndarray
    intensity_hat: np.ndarray
    terminal: HatState
    terminal_gap: float
    method: str
    iterations: int = 0

    @property
    def T(self) -> int:
        return len(self.path) - 1

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": np.arange(self.T + 1),
            "E_hat": self.E_hat,
            "Y_hat": self.Y_hat,
            "intensity_hat": self.intensity_hat,
            "emissions_pct": 100 * (self.E_hat - 1),
            "real_gdp_pct": 100 * (self.Y_hat - 1),
            "intensity_pct": 100 * (self.intensity_hat - 1),
        })

    def capital_frame(self, labels=None) -> pd.DataFrame:
        labels = list(labels) if labels is not None else [f"industry_{i}" for i in range(self.K_next.shape[1])]
        df = pd.DataFrame(100 * (self.K_next - 1), columns=labels)
        df.insert(0, "t", np.arange(self.T + 1))
        return df

    def log_decomposition(self) -> list[dict[str, float]]:
        return [_log_decomposition(e, y, i) for e, y, i in zip(self.E_hat, self.Y_hat, self.intensity_hat)]


def _log_decomposition(E: float, Y: float, I: float) -> dict[str, float]:
    lnE, lnY, lnI = float(np.log(E)), float(np.log(Y)), float(np.log(I))
    return {"ln_E": lnE, "ln_Y": lnY, "ln_intensity": lnI, "gap": lnE - lnY - lnI}


def aggregates(state: HatState, G_hat, calib: Calibration) -> tuple[float, float, float]:
    """Emissions, real GDP and emission-intensity hats of one state."""
    E = emissions_hat(state, fuel_hat(G_hat, calib), calib)
    Y = real_gdp_hat(state, G_hat, calib)
    return E, Y, E / Y


def solve_steady(calib: Calibration, G_hat, *, tol: float = 1e-12, max_iter: int = 200) -> SteadySolution:
    """Newton iteration in logs from the all-ones state, with backtracking.

    Steps are halved (at most 30 times) until the residual max-norm falls.
    """
    n = calib.n
    G = _check_G(G_hat, n)
    lay = Layout(n)
    lg = np.log(G)

    def resid(z):
        return reduced_residuals(z[lay.Kn], z, z, lg, calib, lay)

    def jac(z):
        JK, Jz, Jn, _ = reduced_jacobians(z[lay.Kn], z, z, lg, calib, lay)
        J = Jz + Jn
        J[:, lay.Kn] += JK
        return J

    z = np.zeros(lay.size)
    r = resid(z)
    norm = np.max(np.abs(r))
    it = 0
    while norm >= tol:
        if it >= max_iter:
            raise ConvergenceError(f"steady state did not converge in {max_iter} iterations (residual {norm:.3g})")
        J = jac(z)
        try:
            dz = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Jacobian in steady-state Newton step") from exc
        step = 1.0
        for _ in range(31):
            z_try = z + step * dz
            with np.errstate(over="ignore", invalid="ignore"):
                r_try = resid(z_try)
            n_try = np.max(np.abs(r_try))
            if np.isfinite(n_try) and n_try < norm:
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"line search failed at residual {norm:.3g}")
        z, r, norm = z_try, r_try, n_try
        it += 1
    state = state_from_reduced(z, z[lay.Kn], calib, lay)
    full = float(np.linalg.norm(steady_residuals(state, calib, G)))
    if full >= 1e-10:
        raise ConvergenceError(f"steady-state residual norm {full:.3g} exceeds 1e-10")
    E, Y, I = aggregates(state, G, calib)
    return SteadySolution(state, G, E, Y, I, full, it, z)


# --------------------------------------------------------------------------
# transitions


def saddle_policy(JK: np.ndarray, Jz: np.ndarray, Jn: np.ndarray, lay: Layout, *,
                  tol: float = 1e-13, max_iter: int = 2000) -> np.ndarray:
    """Stable-manifold response ``x_t = P k_{t-1}`` of the linearized system.

    ``k`` is the log capital deviation. ``P`` is the fixed point of the
    backward recursion ``P = -(Jz + Jn P S)^{-1} JK`` started from ``P = 0``,
    i.e. the limit of pinning next-period variables ever further ahead.
    """
    P = np.zeros((lay.size, lay.n))
    for _ in range(max_iter):
        A = Jz.copy()
        A[:, lay.Kn] += Jn @ P
        try:
            # the first block (P = 0) is close to singular; later ones are fine
            P_new = -np.linalg.solve(A, JK)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular period block in saddle-path recursion") from exc
        if not np.all(np.isfinite(P_new)):
            raise ConvergenceError("saddle-path recursion diverged")
        if np.max(np.abs(P_new - P)) < tol:
            radius = np.max(np.abs(np.linalg.eigvals(P_new[lay.Kn])))
            if radius >= 1:
                raise ConvergenceError(f"capital policy is not stable (spectral radius {radius:.4g})")
            return P_new
        P = P_new
    raise ConvergenceError("saddle-path recursion did not converge")


class _PathSystem:
    """Linear systems along a path, solved by a backward block recursion.

    Period ``t`` reads ``JK_t k_{t-1} + Jz_t x_t + Jn_t x_{t+1} = b_t`` with
    ``k_t`` the capital part of ``x_t``. After the last period the path
    follows the saddle policy around the expansion point.
    """

    def __init__(self, calib: Calibration, zbar: np.ndarray, gbar: np.ndarray, T: int):
        self.calib, self.zbar, self.T = calib, zbar, T
        lay = self.lay = Layout(calib.n)
        JK, Jz, Jn, Jg = reduced_jacobians(zbar[lay.Kn], zbar, zbar, gbar, calib, lay)
        self.F0 = reduced_residuals(zbar[lay.Kn], zbar, zbar, gbar, calib, lay)
        self.D = Jg
        self.bar = (JK, Jz, Jn)
        self.P = saddle_policy(JK, Jz, Jn, lay)

    def _factor(self, JK, Jz, Jn, P_next):
        A = Jz.copy()
        A[:, self.lay.Kn] += Jn @ P_next
        lu = linalg.lu_factor(A, check_finite=False)
        return lu, -linalg.lu_solve(lu, JK, check_finite=False)

    def _recursion(self, blocks, b: np.ndarray, dk0: np.ndarray) -> np.ndarray:
        """Backward sweep for policies and intercepts, then a forward pass.

        ``blocks=None`` means every period uses the expansion-point blocks,
        where the saddle policy is already a fixed point and one factorization
        serves all periods.
        """
        lay = self.lay
        P_next, c_next = self.P, np.zeros(lay.size)
        Ps, cs = [None] * (self.T + 1), [None] * (self.T + 1)
        if blocks is None:
            lu, _ = self._factor(*self.bar, self.P)
        for t in range(self.T, -1, -1):
            if blocks is None:
                JK, Jz, Jn = self.bar
                P_t = self.P
            else:
                JK, Jz, Jn = blocks[t]
                lu, P_t = self._factor(JK, Jz, Jn, P_next)
            c_t = linalg.lu_solve(lu, b[t] - Jn @ c_next, check_finite=False)
            Ps[t], cs[t], P_next, c_next = P_t, c_t, P_t, c_t
        X = np.empty((self.T + 1, lay.size))
        k = dk0
        for t in range(self.T + 1):
            X[t] = Ps[t] @ k + cs[t]
            k = X[t, lay.Kn]
        if not np.all(np.isfinite(X)):
            raise ConvergenceError("transition recursion produced non-finite values")
        return X

    def solve_linear(self, dK0: np.ndarray, dg: np.ndarray) -> np.ndarray:
        b = -(self.F0[None, :] + dg @ self.D.T)
        return self._recursion(None, b, dK0)

    def terminal(self, Z: np.ndarray) -> np.ndarray:
        kn = self.lay.Kn
        return self.zbar + self.P @ (Z[-1, kn] - self.zbar[kn])

    def _lagged(self, Z, lK0):
        lK = np.vstack([lK0, Z[:-1, self.lay.Kn]])
        Zn = np.vstack([Z[1:], self.terminal(Z)])
        return lK, Zn

    def nonlinear_residual(self, Z: np.ndarray, lK0: np.ndarray, lg: np.ndarray) -> np.ndarray:
        lK, Zn = self._lagged(Z, lK0)
        return np.vstack([reduced_residuals(lK[t], Z[t], Zn[t], lg[t], self.calib, self.lay)
                          for t in range(self.T + 1)])

    def newton_step(self, Z, lK0, lg, R) -> np.ndarray:
        lK, Zn = self._lagged(Z, lK0)
        blocks = [reduced_jacobians(lK[t], Z[t], Zn[t], lg[t], self.calib, self.lay)[:3]
                  for t in range(self.T + 1)]
        return self._recursion(blocks, -R, np.zeros(self.lay.n))


def _g_path(G_path: GovernmentPath, T: int) -> np.ndarray:
    return np.log(np.vstack([G_path.at(t) for t in range(T + 1)]))


def solve_transition_path(calib: Calibration, make_path, *, permanent: bool, T: int = 200,
                          T_max: int = 800, tol: float = 1e-6, method: str = "linear",
                          newton_tol: float = 1e-10) -> TransitionSolution:
    """Solve a transition for the government path produced by ``make_path(T)``.

    Temporary shocks are expanded around the initial steady state, which is
    also the terminal condition. Permanent shocks are expanded around the new
    steady state so the path lands exactly on it; capital starts at its
    initial level in both cases. Beyond ``T`` the economy follows the saddle
    policy of the linearized model. ``T`` doubles (up to ``T_max``) while the
    state at ``T`` is further than ``tol`` from the terminal state.
    """
    if method not in ("linear", "nonlinear"):
        raise ValidationError(f"unknown transition method {method!r}")
    if T < 1:
        raise ValidationError("T must be at least 1")
    n = calib.n
    lay = Layout(n)
    while True:
        G_path = make_path(T)
        lg = _g_path(G_path, T)
        if permanent:
            ss = solve_steady(calib, G_path.at(T))
            zbar, gbar, terminal = ss.z, np.log(ss.G_hat), ss.state
        else:
            zbar, gbar, terminal = np.zeros(lay.size), np.zeros(n), HatState.ones(n)
        lK0 = np.zeros(n)
        system = _PathSystem(calib, zbar, gbar, T)
        # level deviations of G, so the linear path is exactly linear in the shock
        Z = zbar + system.solve_linear(lK0 - zbar[lay.Kn], np.exp(lg - gbar) - 1)
        iterations = 0
        if method == "nonlinear":
            Z, iterations = _newton_path(system, Z, lK0, lg, newton_tol)
        path = [state_from_reduced(Z[t], lK0 if t == 0 else Z[t - 1, lay.Kn], calib, lay)
                for t in range(T + 1)]
        gap = path[-1].max_abs_deviation(terminal)
        gap = max(gap, float(np.max(np.abs(np.exp(Z[-1, lay.Kn]) - terminal.K))))
        if gap <= tol or T >= T_max:
            break
        logger.info("terminal gap %.3g at T=%d; doubling horizon", gap, T)
        T = min(2 * T, T_max)
    if gap > tol:
        raise ConvergenceError(f"terminal gap {gap:.3g} exceeds {tol:g} at T={T}; raise T_max")
    aggs = np.array([aggregates(s, G_path.at(t), calib) for t, s in enumerate(path)])
    return TransitionSolution(
        path=tuple(path), K_next=np.exp(Z[:, lay.Kn]), G_path=G_path,
        E_hat=aggs[:, 0], Y_hat=aggs[:, 1], intensity_hat=aggs[:, 2],
        terminal=terminal, terminal_gap=gap, method=method, iterations=iterations,
    )


def _newton_path(system: _PathSystem, Z, lK0, lg, tol: float, max_iter: int = 50):
    """Damped Newton on the stacked nonlinear system, started from the linear path."""
    with np.errstate(over="ignore", invalid="ignore"):
        R = system.nonlinear_residual(Z, lK0, lg)
    norm = np.max(np.abs(R))
    if not np.isfinite(norm):
        Z = np.zeros_like(Z) + system.zbar
        R = system.nonlinear_residual(Z, lK0, lg)
        norm = np.max(np.abs(R))
    for it in range(1, max_iter + 1):
        if norm < tol:
            return Z, it - 1
        dZ = system.newton_step(Z, lK0, lg, R)
        step = 1.0
        for _ in range(31):
            Z_try = Z + step * dZ
            with np.errstate(over="ignore", invalid="ignore"):
                R_try = system.nonlinear_residual(Z_try, lK0, lg)
            n_try = np.max(np.abs(R_try))
            if np.isfinite(n_try) and n_try < norm:
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"nonlinear transition line search failed at residual {norm:.3g}")
        Z, R, norm = Z_try, R_try, n_try
    if norm < tol:
        return Z, max_iter
    raise ConvergenceError(f"nonlinear transition solve did not converge (residual {norm:.3g})")


def solve_transition(calib: Calibration, scenario, T: int = 200, **kwargs) -> TransitionSolution:
    """Transition path for a :class:`~defense_emissions.scenarios.ScenarioSpec`."""
    from .scenarios import government_path

    return solve_transition_path(
        calib, lambda horizon: government_path(scenario, calib, horizon),
        permanent=scenario.rho >= 1.0, T=T, **kwargs,
    )


def decompose_shocks(calib: Calibration, scenario) -> dict:
    """Permanent-shock solves with each component alone and jointly.

    Returns ``weapon``, ``energy`` and ``joint`` solutions plus the gap
    between the joint total effect and the sum of component effects.
    """
    from .scenarios import steady_g_hat

    out = {
        "weapon": solve_steady(calib, steady_g_hat(scenario, calib, weapon=True, energy=False)),
        "energy": solve_steady(calib, steady_g_hat(scenario, calib, weapon=False, energy=True)),
        "joint": solve_steady(calib, steady_g_hat(scenario, calib)),
    }
    out["nonlinearity_gap"] = (out["joint"].E_hat - 1) - (out["weapon"].E_hat - 1) - (out["energy"].E_hat - 1)
    return out


def industry_report(solution, calib: Calibration, period: int = 0) -> pd.DataFrame:
    """Per-industry output and capital changes in percent, largest output gain first.

    For a transition, output is taken at ``period`` and capital is the stock
    installed for the following period.
    """
    if isinstance(solution, TransitionSolution):
        state = solution.path[period]
        capital = solution.K_next[period]
    elif isinstance(solution, SteadySolution):
        state, capital = solution.state, solution.state.K
    else:
        raise ValidationError("industry_report needs a SteadySolution or TransitionSolution")
    df = pd.DataFrame({
        "industry": list(calib.labels),
        "output_pct": 100 * (state.y - 1),
        "capital_pct": 100 * (capital - 1),
        "weapon": [i in calib.weapon_set for i in range(calib.n)],
        "energy": [i in calib.energy_set for i in range(calib.n)],
    })
    return df.sort_values("output_pct", ascending=False, kind="stable").reset_index(drop=True)


def household_budget_gap(state: HatState, G_hat, calib: Calibration) -> float:
    """Spending minus income net of lump-sum taxes, in units of base GDP.

    Zero at any state satisfying the firm and household conditions when the
    base table is column-balanced.
    """
    G = _check_G(G_hat, calib.n)
    go = calib.gross_output
    inv_base = calib.iota.T @ go  # base investment spending by installing industry
    spend = go @ (calib.phi * state.p * state.f) + inv_base @ (state.pI * state.I)
    labor = go @ (calib.alpha * calib.theta) * state.w * state.L
    capital = (go * (1 - calib.alpha) * calib.theta) @ (state.r * state.K)
    taxes = go @ (calib.gamma * state.p * G)
    gdp = go @ (calib.phi + calib.gamma + calib.iota.sum(axis=1))
    return float((spend - labor - capital + taxes) / gdp)
