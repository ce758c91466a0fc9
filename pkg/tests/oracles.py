"""Independent reference implementations used only by the test-suite.

Nothing here imports the solver or estimator internals; the level economy is
written directly from the firm and household first-order conditions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from defense_emissions.calibration import Calibration


def ols_residuals(y, X):
    """Residuals from the normal equations X'X b = X'y."""
    b = np.linalg.solve(X.T @ X, X.T @ y)
    return y - X @ b


def dk_textbook(resid, X, time_ids, lags):
    """Driscoll-Kraay covariance written out loop by loop.

    h_t = sum_i x_it e_it ;  S = Omega_0 + sum_j w_j (Omega_j + Omega_j')
    with Omega_j = sum_t h_t h_{t-j}' and w_j = 1 - j / (lags + 1).
    """
    periods = sorted(set(time_ids))
    k = X.shape[1]
    h = {t: np.zeros(k) for t in periods}
    for row, t in enumerate(time_ids):
        h[t] += X[row] * resid[row]
    S = np.zeros((k, k))
    for t in periods:
        S += np.outer(h[t], h[t])
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        for idx in range(j, len(periods)):
            t, s = periods[idx], periods[idx - j]
            if t - s != j:
                continue
            S += w * (np.outer(h[t], h[s]) + np.outer(h[s], h[t]))
    bread = np.linalg.inv(X.T @ X)
    return bread @ S @ bread


# --------------------------------------------------------------------------
# level-space network economy


@dataclass
class LevelEconomy:
    theta: np.ndarray
    alpha: np.ndarray
    omega: np.ndarray  # omega[j, i]: share of good j in i's intermediate bundle
    chi: np.ndarray  # chi[j, i]: share of good j in i's investment bundle
    delta: np.ndarray
    beta: float
    frisch: float
    cons: np.ndarray
    psi: float  # labour disutility scale
    tfp: np.ndarray

    @property
    def n(self):
        return len(self.theta)

    @classmethod
    def random(cls, n, rng):
        return cls(
            theta=rng.uniform(0.3, 0.8, n), alpha=rng.uniform(0.3, 0.8, n),
            omega=rng.dirichlet(np.ones(n), size=n).T, chi=rng.dirichlet(np.ones(n), size=n).T,
            delta=rng.uniform(0.03, 0.2, n), beta=float(rng.uniform(0.9, 0.99)),
            frisch=float(rng.uniform(0.2, 2.0)), cons=rng.dirichlet(np.ones(n)),
            psi=float(rng.uniform(0.5, 2.0)), tfp=rng.uniform(0.8, 1.2, n),
        )

    def prices(self, tol=1e-15):
        """Unit-cost fixed point with w = 1, then rescaled so the consumption price index is 1."""
        n = self.n
        a, th = self.alpha, self.theta
        lp = np.zeros(n)
        for _ in range(100_000):
            pI = np.exp(self.chi.T @ lp - np.sum(self.chi * np.log(np.where(self.chi > 0, self.chi, 1)), axis=0))
            r = pI * (1 / self.beta - 1 + self.delta)
            lPVA = (1 - a) * np.log(r / (1 - a)) + a * np.log(1 / a)
            lPX = self.omega.T @ lp - np.sum(self.omega * np.log(np.where(self.omega > 0, self.omega, 1)), axis=0)
            new = th * (lPVA - np.log(th)) + (1 - th) * (lPX - np.log(1 - th)) - np.log(self.tfp)
            if np.max(np.abs(new - lp)) < tol:
                lp = new
                break
            lp = new
        else:
            raise RuntimeError("price fixed point did not converge")
        P = np.exp(self.cons @ lp)  # Cobb-Douglas index up to a constant, identical across solves
        p = np.exp(lp) / P
        w = 1.0 / P
        pI = np.exp(self.chi.T @ np.log(p) - np.sum(self.chi * np.log(np.where(self.chi > 0, self.chi, 1)), axis=0))
        r = pI * (1 / self.beta - 1 + self.delta)
        return p, w, r, pI

    def solve(self, G):
        """Steady state for government purchases ``G`` (quantities)."""
        p, w, r, pI = self.prices()
        a, th = self.alpha, self.theta
        # nominal output Y solves Y = M Y + cons * C + p G
        inv_per_Y = self.delta * pI * (1 - a) * th / r  # investment spending per unit of Y_j
        M = self.omega * (1 - th)[None, :] + self.chi * inv_per_Y[None, :]
        Minv = np.linalg.inv(np.eye(self.n) - M)

        def nominal(C):
            return Minv @ (self.cons * C + p * G)

        def excess(C):
            labour_demand = np.sum(a * th * nominal(C)) / w
            labour_supply = (w / (self.psi * C)) ** self.frisch
            return labour_demand - labour_supply

        lo, hi = 1.0, 1.0
        while excess(hi) < 0:
            hi *= 2
        while excess(lo) > 0:
            lo /= 2
        C = brentq(excess, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        Y = nominal(C)
        VA_val = th * Y
        K = (1 - a) * VA_val / r
        Li = a * VA_val / w
        I = self.delta * K
        PVA = VA_val / (K ** (1 - a) * Li ** a)
        X_val = (1 - th) * Y
        PX = np.exp(self.omega.T @ np.log(p) - np.sum(self.omega * np.log(np.where(self.omega > 0, self.omega, 1)), axis=0))
        return dict(p=p, y=Y / p, Y=Y, VA=VA_val / PVA, X=X_val / PX, K=K, Li=Li, r=r, pI=pI, I=I,
                    f=self.cons * C / p, PVA=PVA, PX=PX, C=C, L=Li.sum(), w=w, G=G)

    def calibration(self, base, eps, eps_hh, eps_govt, weapon=(0,), energy=()):
        Y = base["Y"]
        inv_spend = base["pI"] * base["I"]
        Delta = self.omega * ((1 - self.theta) * Y)[None, :] / Y[:, None]
        iota = self.chi * inv_spend[None, :] / Y[:, None]
        return Calibration(
            Delta=Delta, iota=iota, phi=self.cons * base["C"] / Y, gamma=base["p"] * base["G"] / Y,
            lam=base["Li"] / base["L"], omega=self.omega, chi=self.chi, alpha=self.alpha,
            theta=self.theta, delta_dep=self.delta, beta_cons=self.cons, eps_ind=eps,
            eps_hh=eps_hh, eps_govt=eps_govt, gross_output=Y, beta_disc=self.beta,
            frisch=self.frisch, weapon_set=weapon, energy_set=energy,
        ).validate()


def laspeyres(economy, base, new):
    """Final uses (consumption, government, investment goods by supplier) at base prices."""
    def final(s):
        invest = economy.chi @ (s["pI"] * s["I"]) / s["p"]
        return np.sum(base["p"] * (s["f"] + s["G"] + invest))
    return final(new) / final(base)
