"""Exact-hat equilibrium conditions of the production-network model.

Every variable is a ratio to its value in the initial steady state, so the
initial steady state is the all-ones state. Two representations coexist:

* :class:`HatState` carries every per-industry and aggregate hat and is what
  the public residual functions check, one residual per model equation.
* The solvers work on a reduced log vector. Intermediate and investment-good
  purchases are Cobb-Douglas, so ``x_ij = p_j y_j / p_i`` and
  ``i_ij = pI_j I_j / p_i`` in hats; bundle quantities and factor demands are
  likewise closed-form in prices and output. Per period the reduced vector is
  ``[ln p, ln y, ln r, ln I, ln K_next, ln C, ln w, ln L]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .calibration import Calibration
from .exceptions import ValidationError

_VECTOR_FIELDS = ("p", "y", "VA", "X", "K", "Li", "r", "pI", "I", "f", "PVA", "PX")
_SCALAR_FIELDS = ("C", "L", "w")

STEADY_EQUATIONS = (
    "household_demand", "numeraire", "labor_supply", "investment_price", "euler",
    "investment_replacement", "production", "value_added_bundle", "value_added_demand",
    "value_added_price", "capital_demand", "labor_demand", "intermediate_demand",
    "intermediate_price", "goods_clearing", "labor_clearing",
)


@dataclass(frozen=True)
class HatState:
    """Full set of hat variables for one period.

    ``Li`` is industry labour and ``L`` aggregate labour supply. Pairwise
    purchases are implied by prices and aggregates and are not stored.
    """

    p: np.ndarray
    y: np.ndarray
    VA: np.ndarray
    X: np.ndarray
    K: np.ndarray
    Li: np.ndarray
    r: np.ndarray
    pI: np.ndarray
    I: np.ndarray
    f: np.ndarray
    PVA: np.ndarray
    PX: np.ndarray
    C: float
    L: float
    w: float

    def __post_init__(self):
        n = None
        for name in _VECTOR_FIELDS:
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if arr.ndim != 1:
                raise ValidationError(f"{name} must be a vector")
            n = len(arr) if n is None else n
            if len(arr) != n:
                raise ValidationError(f"{name} has length {len(arr)}, expected {n}")
            object.__setattr__(self, name, arr)
        for name in _SCALAR_FIELDS:
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def n(self) -> int:
        return len(self.p)

    def check_positive(self) -> "HatState":
        for name in _VECTOR_FIELDS + _SCALAR_FIELDS:
            val = np.asarray(getattr(self, name))
            if not np.all(np.isfinite(val)) or np.any(val <= 0):
                raise ValidationError(f"hat variable {name} must be finite and strictly positive")
        return self

    @classmethod
    def ones(cls, n: int) -> "HatState":
        kw = {k: np.ones(n) for k in _VECTOR_FIELDS}
        kw.update({k: 1.0 for k in _SCALAR_FIELDS})
        return cls(**kw)

    def to_dict(self) -> dict:
        return {f.name: (getattr(self, f.name).tolist() if f.name in _VECTOR_FIELDS else getattr(self, f.name))
                for f in fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "HatState":
        return cls(**{k: data[k] for k in _VECTOR_FIELDS + _SCALAR_FIELDS})

    def max_abs_deviation(self, other: "HatState") -> float:
        return max(float(np.max(np.abs(np.asarray(getattr(self, k)) - np.asarray(getattr(other, k)))))
                   for k in _VECTOR_FIELDS + _SCALAR_FIELDS)


@dataclass(frozen=True)
class GovernmentPath:
    """Government purchase hats, ``values[t, i]`` for ``t = 0..T``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValidationError("government hats must be finite and positive")
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> int:
        return self.values.shape[0] - 1

    def at(self, t: int) -> np.ndarray:
        return self.values[min(t, self.T)]

    @classmethod
    def constant(cls, G_hat, T: int) -> "GovernmentPath":
        return cls(np.tile(np.asarray(G_hat, dtype=float), (T + 1, 1)))


def _check_G(G_hat, n: int) -> np.ndarray:
    G = np.asarray(G_hat, dtype=float)
    if G.ndim == 0:
        G = np.full(n, float(G))
    if G.shape != (n,):
        raise ValidationError(f"G_hat has shape {G.shape}, expected ({n},)")
    if not np.all(np.isfinite(G)) or np.any(G <= 0):
        raise ValidationError("G_hat must be finite and positive")
    return G


def _check_state(state: HatState, calib: Calibration) -> HatState:
    if state.n != calib.n:
        raise ValidationError(f"state has {state.n} industries, calibration has {calib.n}")
    return state.check_positive()


# --------------------------------------------------------------------------
# full-state residuals


def _static_blocks(s: HatState, calib: Calibration, G: np.ndarray) -> dict[str, np.ndarray]:
    """Residuals of the within-period conditions; multiplicative ones in logs."""
    lg = {k: np.log(getattr(s, k)) for k in _VECTOR_FIELDS}
    lC, lL, lw = np.log(s.C), np.log(s.L), np.log(s.w)
    a, th = calib.alpha, calib.theta
    inv_use = (calib.iota @ (s.pI * s.I)) / s.p
    int_use = (calib.Delta @ (s.PX * s.X)) / s.p
    return {
        "household_demand": lg["f"] - (lC - lg["p"]),
        "numeraire": np.atleast_1d(calib.beta_cons @ lg["p"]),
        "labor_supply": np.atleast_1d(lL - calib.frisch * (lw - lC)),
        "investment_price": lg["pI"] - calib.chi.T @ lg["p"],
        "production": lg["y"] - th * lg["VA"] - (1 - th) * lg["X"],
        "value_added_bundle": lg["VA"] - (1 - a) * lg["K"] - a * lg["Li"],
        "value_added_demand": lg["VA"] - (lg["p"] + lg["y"] - lg["PVA"]),
        "value_added_price": lg["PVA"] - (1 - a) * lg["r"] - a * lw,
        "capital_demand": lg["K"] - (lg["PVA"] + lg["VA"] - lg["r"]),
        "labor_demand": lg["Li"] - (lg["PVA"] + lg["VA"] - lw),
        "intermediate_demand": lg["X"] - (lg["p"] + lg["y"] - lg["PX"]),
        "intermediate_price": lg["PX"] - calib.omega.T @ lg["p"],
        "goods_clearing": int_use + inv_use + calib.phi * s.f + calib.gamma * G - s.y,
        "labor_clearing": np.atleast_1d(calib.lam @ s.Li - s.L),
    }


def _steady_euler(s: HatState, calib: Calibration) -> np.ndarray:
    b, d = calib.beta_disc, calib.delta_dep
    return np.log(s.pI) - np.log((1 - b * (1 - d)) * s.r + b * (1 - d) * s.pI)


def steady_residual_blocks(state: HatState, calib: Calibration, G_hat) -> dict[str, np.ndarray]:
    _check_state(state, calib)
    G = _check_G(G_hat, calib.n)
    blocks = _static_blocks(state, calib, G)
    blocks["euler"] = _steady_euler(state, calib)
    blocks["investment_replacement"] = np.log(state.I) - np.log(state.K)
    return {k: blocks[k] for k in STEADY_EQUATIONS}


def steady_residuals(state: HatState, calib: Calibration, G_hat) -> np.ndarray:
    """Stacked steady-state residuals, zero exactly at an equilibrium.

    Goods and labour clearing are in hat units (shares of base output or
    labour); the remaining equations are log differences.
    """
    return np.concatenate(list(steady_residual_blocks(state, calib, G_hat).values()))


def dynamic_residuals(path: Sequence[HatState], K0, terminal: HatState, calib: Calibration,
                      G_path: GovernmentPath) -> np.ndarray:
    """Stacked residuals of a perfect-foresight path ``t = 0..T``.

    The Euler equation and capital accumulation at ``T`` look ahead to
    ``terminal``. A final block pins ``K_0`` to ``K0``.
    """
    path = list(path)
    if len(path) < 2:
        raise ValidationError("path needs at least two periods")
    n = calib.n
    K0 = np.asarray(K0, dtype=float)
    if K0.shape != (n,) or np.any(K0 <= 0):
        raise ValidationError("K0 must be a positive n-vector")
    _check_state(terminal, calib)
    b, d = calib.beta_disc, calib.delta_dep
    a_r = (1 - b * (1 - d)) / b
    out = []
    for t, s in enumerate(path):
        _check_state(s, calib)
        nxt = path[t + 1] if t + 1 < len(path) else terminal
        blocks = _static_blocks(s, calib, _check_G(G_path.at(t), n))
        blocks["euler"] = (np.log(s.pI) - np.log(s.C) - np.log(b) + np.log(nxt.C)
                           - np.log(a_r * nxt.r + (1 - d) * nxt.pI))
        blocks["investment_replacement"] = np.log(nxt.K) - np.log((1 - d) * s.K + d * s.I)
        out.extend(blocks[k] for k in STEADY_EQUATIONS)
    out.append(np.log(path[0].K) - np.log(K0))
    return np.concatenate(out)


# --------------------------------------------------------------------------
# aggregates


def fuel_hat(G_hat, calib: Calibration) -> float:
    """Common government hat on the energy/fuel industries (purchase-weighted)."""
    G = np.asarray(G_hat, dtype=float)
    idx = list(calib.energy_set)
    if not idx:
        return 1.0
    w = calib.gamma[idx] * calib.gross_output[idx]
    if w.sum() <= 0:
        return float(np.mean(G[idx]))
    return float(w @ G[idx] / w.sum())


def emissions_hat(state: HatState, G_fuel_hat: float, calib: Calibration) -> float:
    """``sum_i eps_i y_i + eps_HH C + eps_Govt G_fuel`` in hats."""
    # the same expression at unit hats, so Ê is exactly 1 there despite share rounding
    total = calib.eps_ind @ np.ones(calib.n) + calib.eps_hh + calib.eps_govt
    if abs(total - 1.0) > 1e-8:
        raise ValidationError(f"emission shares sum to {total!r}, not 1")
    return float((calib.eps_ind @ state.y + calib.eps_hh * state.C + calib.eps_govt * G_fuel_hat) / total)


def real_gdp_hat(state: HatState, G_hat, calib: Calibration) -> float:
    """Laspeyres quantity index of final uses at base prices."""
    G = _check_G(G_hat, calib.n)
    go = calib.gross_output
    base = go @ (calib.phi + calib.gamma + calib.iota.sum(axis=1))
    if base <= 0:
        raise ValidationError("economy has no final uses")
    inv = (calib.iota @ (state.pI * state.I)) / state.p
    return float(go @ (calib.phi * state.f + calib.gamma * G + inv) / base)


# --------------------------------------------------------------------------
# reduced log-space system shared by the solvers


class Layout:
    """Index slices of the reduced per-period vector."""

    def __init__(self, n: int):
        self.n = n
        self.p = slice(0, n)
        self.y = slice(n, 2 * n)
        self.r = slice(2 * n, 3 * n)
        self.I = slice(3 * n, 4 * n)
        self.Kn = slice(4 * n, 5 * n)
        self.C = 5 * n
        self.w = 5 * n + 1
        self.L = 5 * n + 2
        self.size = 5 * n + 3


def reduced_residuals(lK, z, z_next, lg, calib: Calibration, lay: Layout) -> np.ndarray:
    """One period of the reduced system.

    ``lK`` is log capital in place this period, ``z``/``z_next`` the reduced
    vectors for this and next period, ``lg`` log government hats. Blocks:
    zero profit, capital demand, goods clearing, Euler, accumulation (each
    ``n``), then numeraire, labour supply and labour clearing.
    """
    lp, ly, lr, lI, lKn = z[lay.p], z[lay.y], z[lay.r], z[lay.I], z[lay.Kn]
    lC, lw, lL = z[lay.C], z[lay.w], z[lay.L]
    a, th, d, b = calib.alpha, calib.theta, calib.delta_dep, calib.beta_disc
    lpI = calib.chi.T @ lp
    py = np.exp(lp + ly)
    ip = np.exp(-lp)
    lpI_n = calib.chi.T @ z_next[lay.p]
    r_euler = (lpI - lC + z_next[lay.C] - np.log(b)
               - np.log((1 - b * (1 - d)) / b * np.exp(z_next[lay.r]) + (1 - d) * np.exp(lpI_n)))
    return np.concatenate([
        lp - th * ((1 - a) * lr + a * lw) - (1 - th) * (calib.omega.T @ lp),
        lK - (lp + ly - lr),
        ip * (calib.Delta @ py + calib.iota @ np.exp(lpI + lI)) + calib.phi * np.exp(lC - lp)
        + calib.gamma * np.exp(lg) - np.exp(ly),
        r_euler,
        lKn - np.log((1 - d) * np.exp(lK) + d * np.exp(lI)),
        [calib.beta_cons @ lp, lL - calib.frisch * (lw - lC), calib.lam @ (py / np.exp(lw)) - np.exp(lL)],
    ])


def reduced_jacobians(lK, z, z_next, lg, calib: Calibration, lay: Layout):
    """Analytic derivatives of :func:`reduced_residuals`.

    Returns ``(d/dlK, d/dz, d/dz_next, d/dlg)`` as dense arrays.
    """
    n, m = lay.n, lay.size
    lp, ly, lr, lI, lKn = z[lay.p], z[lay.y], z[lay.r], z[lay.I], z[lay.Kn]
    lC, lw, lL = z[lay.C], z[lay.w], z[lay.L]
    a, th, d, b = calib.alpha, calib.theta, calib.delta_dep, calib.beta_disc
    chiT = calib.chi.T
    eye = np.eye(n)
    py = np.exp(lp + ly)
    ip = np.exp(-lp)
    q = np.exp(chiT @ lp + lI)
    hh = calib.phi * np.exp(lC - lp)
    int_ = calib.Delta * py[None, :] * ip[:, None]
    inv_ = calib.iota * q[None, :] * ip[:, None]
    JK, Jz, Jn = np.zeros((m, n)), np.zeros((m, m)), np.zeros((m, m))
    Jg = np.zeros((m, n))
    zp, kd, gc, eu, ac = (slice(k * n, (k + 1) * n) for k in range(5))
    # zero profit
    Jz[zp, lay.p] = eye - (1 - th)[:, None] * calib.omega.T
    Jz[zp, lay.r] = np.diag(-th * (1 - a))
    Jz[zp, lay.w] = -th * a
    # capital demand
    JK[kd] = eye
    Jz[kd, lay.p] = -eye
    Jz[kd, lay.y] = -eye
    Jz[kd, lay.r] = eye
    # goods clearing
    Jz[gc, lay.p] = -np.diag(int_.sum(1) + inv_.sum(1) + hh) + int_ + inv_ @ chiT
    Jz[gc, lay.y] = int_ - np.diag(np.exp(ly))
    Jz[gc, lay.I] = inv_
    Jz[gc, lay.C] = hh
    Jg[gc] = np.diag(calib.gamma * np.exp(lg))
    # Euler
    c1 = (1 - b * (1 - d)) / b
    er = c1 * np.exp(z_next[lay.r])
    ep = (1 - d) * np.exp(chiT @ z_next[lay.p])
    D = er + ep
    Jz[eu, lay.p] = chiT
    Jz[eu, lay.C] = -1.0
    Jn[eu, lay.C] = 1.0
    Jn[eu, lay.r] = np.diag(-er / D)
    Jn[eu, lay.p] = -(ep / D)[:, None] * chiT
    # accumulation
    Q = (1 - d) * np.exp(lK) + d * np.exp(lI)
    Jz[ac, lay.Kn] = eye
    JK[ac] = np.diag(-(1 - d) * np.exp(lK) / Q)
    Jz[ac, lay.I] = np.diag(-d * np.exp(lI) / Q)
    # numeraire, labour supply, labour clearing
    Jz[5 * n, lay.p] = calib.beta_cons
    Jz[5 * n + 1, lay.L] = 1.0
    Jz[5 * n + 1, lay.w] = -calib.frisch
    Jz[5 * n + 1, lay.C] = calib.frisch
    v = calib.lam * py / np.exp(lw)
    Jz[5 * n + 2, lay.p] = v
    Jz[5 * n + 2, lay.y] = v
    Jz[5 * n + 2, lay.w] = -v.sum()
    Jz[5 * n + 2, lay.L] = -np.exp(lL)
    return JK, Jz, Jn, Jg


def state_from_reduced(z, lK, calib: Calibration, lay: Layout) -> HatState:
    """Rebuild every hat from a reduced vector and current log capital."""
    lp, ly, lr, lI = z[lay.p], z[lay.y], z[lay.r], z[lay.I]
    lw, lC = z[lay.w], z[lay.C]
    a, th = calib.alpha, calib.theta
    lPVA = (1 - a) * lr + a * lw
    lPX = calib.omega.T @ lp
    lVA = lp + ly - lPVA
    lX = lp + ly - lPX
    return HatState(
        p=np.exp(lp), y=np.exp(ly), VA=np.exp(lVA), X=np.exp(lX), K=np.exp(lK),
        Li=np.exp(lp + ly - lw), r=np.exp(lr), pI=np.exp(calib.chi.T @ lp), I=np.exp(lI),
        f=np.exp(lC - lp), PVA=np.exp(lPVA), PX=np.exp(lPX),
        C=np.exp(lC), L=np.exp(z[lay.L]), w=np.exp(lw),
    )
