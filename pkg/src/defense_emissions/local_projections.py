"""Panel local projections with two-way fixed effects and Driscoll-Kraay errors."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy import linalg
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateRegressorError, ValidationError
from .panel_data import PanelDataset
from .shocks import ShockSeries, shocks_to_frame

logger = logging.getLogger(__name__)

HIGH, LOW = "HIGH", "LOW"


@dataclass(frozen=True)
class Control:
    """A lagged control: ``column`` transformed by ``kind`` ("dlog" or "level")."""

    column: str
    kind: str = "dlog"
    lags: tuple[int, ...] = (1,)


DEFAULT_CONTROLS = (
    Control("gdp_pc", "dlog", (1, 2)),
    Control("exports", "dlog", (1,)),
    Control("imports", "dlog", (1,)),
    Control("democracy", "level", (1,)),
)

DERIVED_OUTCOMES = {
    "emission_intensity": ("emissions", "real_gdp"),
    "energy_intensity": ("energy_use", "real_gdp"),
}


@dataclass(frozen=True)
class LpSpec:
    horizon: int = 15
    lags: int = 2
    controls: tuple[Control, ...] = DEFAULT_CONTROLS
    country_fe: bool = True
    year_fe: bool = True
    ci_level: float = 0.68
    dk_lags: int = 2

    def __post_init__(self):
        if self.horizon < 0 or self.dk_lags < 0 or self.lags < 0:
            raise ValidationError("horizon, lags and dk_lags must be non-negative")
        if not 0 < self.ci_level < 1:
            raise ValidationError("ci_level must lie in (0, 1)")


@dataclass(frozen=True)
class IrfResult:
    horizons: np.ndarray
    beta: np.ndarray
    se: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    n_obs: np.ndarray
    ci_level: float = 0.68
    dropped_nonpositive: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"h": self.horizons, "beta": self.beta, "se": self.se,
             "lo": self.ci_lo, "hi": self.ci_hi, "n": self.n_obs}
        )

    def to_plotdata(self, label: str = "irf") -> pd.DataFrame:
        """Long format: one row per (series, h, statistic)."""
        wide = self.to_frame().drop(columns="n")
        long = wide.melt(id_vars="h", var_name="stat", value_name="value")
        long.insert(0, "series", label)
        return long


@dataclass(frozen=True)
class GroupClassification:
    groups: Mapping[str, str]
    intensity: Mapping[str, float] = field(default_factory=dict)
    median: float = np.nan

    def members(self, label: str) -> list[str]:
        return [c for c, g in self.groups.items() if g == label]


# --------------------------------------------------------------------------
# Driscoll-Kraay covariance


def _bartlett(lags: int) -> np.ndarray:
    return 1.0 - np.arange(lags + 1) / (lags + 1.0)


def driscoll_kraay_cov(residuals, regressors, time_ids, lags: int = 2, *, xtx_inv=None,
                       rows: Sequence[int] | None = None) -> np.ndarray:
    """Driscoll-Kraay covariance ``(X'X)^-1 S (X'X)^-1``.

    ``S = sum_j w_j (Omega_j + Omega_j')`` (``Omega_0`` counted once), where
    ``Omega_j = sum_t h_t h_{t-j}'`` and ``h_t`` is the cross-sectional sum of
    scores ``x_it * e_it`` in period ``t``. Lags are measured in time units, so
    a missing period contributes a zero score. Weights are Bartlett,
    ``w_j = 1 - j / (lags + 1)``.
    """
    e = np.asarray(residuals, dtype=float).ravel()
    X = regressors
    time_ids = np.asarray(time_ids)
    if X.shape[0] != e.shape[0] or time_ids.shape[0] != e.shape[0]:
        raise ValidationError("residuals, regressors and time_ids must align")
    if lags < 0:
        raise ValidationError("lags must be non-negative")
    periods, t_idx = np.unique(time_ids, return_inverse=True)
    if len(periods) < lags + 1:
        raise ValidationError(f"{len(periods)} time periods is too few for {lags} lags")
    span = int(periods[-1] - periods[0]) + 1 if np.issubdtype(periods.dtype, np.number) else len(periods)
    offset = (periods - periods[0]).astype(int) if np.issubdtype(periods.dtype, np.number) else np.arange(len(periods))
    # aggregate scores by period: H[s] = sum over obs in period s of x * e
    agg = sp.csr_matrix((e, (offset[t_idx], np.arange(e.size))), shape=(span, e.size))
    H = agg @ X
    H = H.toarray() if sp.issparse(H) else np.asarray(H)
    if xtx_inv is None:
        xtx = X.T @ X
        xtx = xtx.toarray() if sp.issparse(xtx) else np.asarray(xtx)
        xtx_inv = linalg.inv(xtx)
    bread = xtx_inv if rows is None else xtx_inv[np.asarray(rows, dtype=int)]
    # projecting the scores first gives bread @ S @ bread' without forming S
    U = H @ bread.T
    w = _bartlett(lags)
    cov = w[0] * (U.T @ U)
    for j in range(1, lags + 1):
        if j >= span:
            break
        omega = U[j:].T @ U[:-j]
        cov += w[j] * (omega + omega.T)
    return (cov + cov.T) / 2


# --------------------------------------------------------------------------
# design construction


def _shock_frame(shocks) -> pd.DataFrame:
    if isinstance(shocks, ShockSeries):
        shocks = [shocks]
    if isinstance(shocks, pd.DataFrame):
        df = shocks.copy()
    else:
        df = shocks_to_frame(list(shocks))
    if "shock_pp" not in df.columns:
        if "shock" in df.columns:
            df = df.rename(columns={"shock": "shock_pp"})
        else:
            raise ValidationError("shock frame needs a 'shock_pp' column")
    df["country"] = df["country"].astype(str)
    df["year"] = df["year"].astype(int)
    return df[["country", "year", "shock_pp"]]


def _outcome_values(frame: pd.DataFrame, outcome: str) -> np.ndarray:
    if outcome in DERIVED_OUTCOMES:
        num, den = DERIVED_OUTCOMES[outcome]
        return (frame[num] / frame[den]).to_numpy(dtype=float)
    if outcome not in frame.columns:
        raise ValidationError(f"unknown outcome column {outcome!r}")
    return frame[outcome].to_numpy(dtype=float)


@dataclass
class _Prepared:
    data: pd.DataFrame  # country, year, y, shock, control columns (reindexed, gaps = NaN)
    control_cols: list[str]
    dropped: int


def _prepare(panel: PanelDataset, shocks, outcome: str, log: bool, scale: float, spec: LpSpec,
             common_shock: bool = False) -> _Prepared:
    df = panel.frame.copy()
    y = _outcome_values(df, outcome)
    dropped = 0
    if log:
        bad = ~(y > 0) & ~np.isnan(y)
        dropped = int(bad.sum())
        if dropped:
            logger.warning("dropping %d rows with non-positive %s under log transform", dropped, outcome)
        y = np.where(y > 0, y, np.nan)
        y = np.log(y)
    df["_y"] = scale * y

    sh = _shock_frame(shocks)
    if common_shock:
        if sh["country"].nunique() != 1:
            raise ValidationError("a common shock must come from exactly one source country")
        df = df.merge(sh[["year", "shock_pp"]], on="year", how="left")
    else:
        df = df.merge(sh, on=["country", "year"], how="left")

    # reindex every country to a contiguous year range so shifts never bridge gaps
    bounds = df.groupby("country", sort=False)["year"].agg(["min", "max"])
    lengths = (bounds["max"] - bounds["min"] + 1).to_numpy()
    full = pd.MultiIndex.from_arrays(
        [np.repeat(bounds.index.to_numpy(), lengths),
         np.concatenate([np.arange(a, b + 1) for a, b in zip(bounds["min"], bounds["max"])])],
        names=["country", "year"],
    )
    sub = df.set_index(["country", "year"]).reindex(full)
    grouped_by = sub.index.get_level_values("country")
    data = pd.DataFrame({"country": grouped_by, "year": sub.index.get_level_values("year"),
                         "y": sub["_y"].to_numpy(), "shock": sub["shock_pp"].to_numpy()})
    for ctl in spec.controls:
        if ctl.column not in sub.columns:
            raise ValidationError(f"control column {ctl.column!r} missing from panel")
        base = sub[ctl.column].astype(float)
        if ctl.kind == "dlog":
            with np.errstate(divide="ignore", invalid="ignore"):
                base = np.log(base.where(base > 0)).groupby(grouped_by, sort=False).diff()
        elif ctl.kind != "level":
            raise ValidationError(f"unknown control kind {ctl.kind!r}")
        g = base.groupby(grouped_by, sort=False)
        for lag in ctl.lags:
            data[f"{ctl.column}_{ctl.kind}_l{lag}"] = g.shift(lag).to_numpy()
    control_cols = [f"{c.column}_{c.kind}_l{lag}" for c in spec.controls for lag in c.lags]
    return _Prepared(data, control_cols, dropped)


def _horizon_sample(prep: _Prepared, h: int, lags: int) -> pd.DataFrame:
    g = prep.data.groupby("country", sort=False)["y"]
    d = prep.data[["country", "year", "shock", *prep.control_cols]].copy()
    d["lhs"] = g.shift(-h).to_numpy() - g.shift(1).to_numpy()
    dy = g.diff()
    dy_cols = []
    for j in range(1, lags + 1):
        col = f"dy_l{j}"
        d[col] = dy.groupby(prep.data["country"]).shift(j).to_numpy()
        dy_cols.append(col)
    d = d.dropna()
    d.attrs["dy_cols"] = dy_cols
    return d


def _dummies(codes: np.ndarray, drop_first: bool) -> sp.csr_matrix:
    levels, idx = np.unique(codes, return_inverse=True)
    mat = sp.csr_matrix((np.ones(len(idx)), (np.arange(len(idx)), idx)), shape=(len(idx), len(levels)))
    return mat[:, 1:] if drop_first else mat


def _solve(X, y, time_ids, dk_lags: int, focus: Sequence[int]):
    """OLS with rank check; returns coefficients, DK covariance of ``focus``, residuals."""
    xtx = X.T @ X
    xtx = xtx.toarray() if sp.issparse(xtx) else np.asarray(xtx)
    xty = np.asarray(X.T @ y).ravel()
    scale = np.sqrt(np.clip(np.diag(xtx), 1e-300, None))
    evals, evecs = linalg.eigh(xtx / np.outer(scale, scale))
    if evals[0] <= 1e-11 * evals[-1]:
        raise DegenerateRegressorError("collinear design after fixed-effect construction")
    inv = (evecs / evals) @ evecs.T / np.outer(scale, scale)
    coef = inv @ xty
    for k in focus:
        partial = 1.0 / inv[k, k]  # residual sum of squares of column k on the others
        if partial <= 1e-10 * xtx[k, k]:
            raise DegenerateRegressorError("shock regressor has no variation beyond other regressors")
    resid = y - X @ coef
    cov = driscoll_kraay_cov(resid, X, time_ids, dk_lags, xtx_inv=inv, rows=focus)
    return coef, cov, resid


def _band(beta, se, ci_level):
    z = norm.ppf(0.5 + ci_level / 2.0)
    return beta - z * se, beta + z * se


def _fit_horizon(prep: _Prepared, h: int, spec: LpSpec):
    d = _horizon_sample(prep, h, spec.lags)
    if d.empty:
        raise ValidationError(f"empty estimation sample at horizon {h}")
    core_cols = ["shock", *prep.control_cols, *d.attrs["dy_cols"]]
    blocks = [sp.csr_matrix(d[core_cols].to_numpy(dtype=float)), sp.csr_matrix(np.ones((len(d), 1)))]
    if spec.country_fe:
        blocks.append(_dummies(d["country"].to_numpy(), True))
    if spec.year_fe:
        blocks.append(_dummies(d["year"].to_numpy(), True))
    X = sp.hstack(blocks, format="csr")
    if X.shape[0] <= X.shape[1]:
        raise ValidationError(f"horizon {h}: {X.shape[0]} observations for {X.shape[1]} regressors")
    coef, cov, _ = _solve(X, d["lhs"].to_numpy(), d["year"].to_numpy(), spec.dk_lags, focus=[0])
    return coef[0], float(np.sqrt(max(cov[0, 0], 0.0))), len(d)


def _collect(fits, spec: LpSpec, dropped: int) -> IrfResult:
    beta = np.array([f[0] for f in fits])
    se = np.array([f[1] for f in fits])
    lo, hi = _band(beta, se, spec.ci_level)
    return IrfResult(np.arange(spec.horizon + 1), beta, se, lo, hi,
                     np.array([f[2] for f in fits]), spec.ci_level, dropped)


def _map_horizons(func, spec: LpSpec, threads: int):
    hs = range(spec.horizon + 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(func, hs))  # map preserves horizon order
    return [func(h) for h in hs]


def estimate_lp(panel: PanelDataset, shocks, outcome: str, spec: LpSpec | None = None, *,
                log: bool = True, scale: float = 100.0, threads: int = 1) -> IrfResult:
    """Estimate the impulse response of ``outcome`` to the shocks, horizon by horizon.

    The left-hand side is ``scale * (y[t+h] - y[t-1])`` with ``y`` logged when
    ``log`` is set, so with shocks in percentage points ``beta[h]`` reads as
    percent (or, for an unlogged share, percentage points) per 1 p.p. shock.
    """
    spec = spec or LpSpec()
    prep = _prepare(panel, shocks, outcome, log, scale, spec)
    fits = _map_horizons(lambda h: _fit_horizon(prep, h, spec), spec, threads)
    return _collect(fits, spec, prep.dropped)


def spillover_lp(panel: PanelDataset, source_shocks, outcome: str = "mil_share", spec: LpSpec | None = None, *,
                 log: bool = False, scale: float = 100.0, threads: int = 1) -> IrfResult:
    """Response of every country in ``panel`` to one source country's shocks.

    The source shock is replicated across all rows by year, so year effects
    must stay off (the default here); switching them on makes the shock
    collinear with the year dummies.
    """
    spec = spec or LpSpec(year_fe=False)
    prep = _prepare(panel, source_shocks, outcome, log, scale, spec, common_shock=True)
    fits = _map_horizons(lambda h: _fit_horizon(prep, h, spec), spec, threads)
    return _collect(fits, spec, prep.dropped)


def classify_emission_intensity(panel: PanelDataset) -> GroupClassification:
    """Median split of countries by time-averaged emissions per unit of real GDP.

    A country exactly at the median is classified LOW.
    """
    df = panel.frame.dropna(subset=["emissions", "real_gdp"])
    intensity = (df["emissions"] / df["real_gdp"]).groupby(df["country"], sort=False).mean()
    if len(intensity) < 2:
        raise ValidationError("need at least 2 countries to classify")
    med = float(np.median(intensity.to_numpy()))
    groups = {c: (HIGH if v > med else LOW) for c, v in intensity.items()}
    return GroupClassification(groups, intensity.to_dict(), med)


def _fit_split_horizon(prep: _Prepared, h: int, spec: LpSpec, labels: list[str], groups: Mapping[str, str]):
    d = _horizon_sample(prep, h, spec.lags)
    d = d[d["country"].map(groups).isin(labels)]
    if d.empty:
        raise ValidationError(f"empty estimation sample at horizon {h}")
    core_cols = ["shock", *prep.control_cols, *d.attrs["dy_cols"]]
    member = d["country"].map(groups).to_numpy()
    blocks, focus = [], []
    width = 0
    for label in labels:
        ind = (member == label).astype(float)[:, None]
        focus.append(width)
        core = sp.csr_matrix(d[core_cols].to_numpy(dtype=float) * ind)
        blocks.append(core)
        width += core.shape[1]
        if spec.year_fe:
            yd = _dummies(d["year"].to_numpy(), False).multiply(ind).tocsr()
            keep = np.flatnonzero(np.asarray(yd.sum(axis=0)).ravel() > 0)[1:]
            blocks.append(yd[:, keep])
            width += len(keep)
        if not spec.country_fe:
            blocks.append(sp.csr_matrix(ind))
            width += 1
    if spec.country_fe:
        blocks.append(_dummies(d["country"].to_numpy(), False))
    X = sp.hstack(blocks, format="csr")
    coef, cov, _ = _solve(X, d["lhs"].to_numpy(), d["year"].to_numpy(), spec.dk_lags, focus=focus)
    n_by = [int((member == lab).sum()) for lab in labels]
    return [(coef[k], float(np.sqrt(max(cov[i, i], 0.0))), n) for i, (k, n) in enumerate(zip(focus, n_by))]


def split_lp(panel: PanelDataset, shocks, outcome: str, spec: LpSpec | None = None,
             groups: GroupClassification | Mapping[str, str] | None = None, *,
             log: bool = True, scale: float = 100.0, threads: int = 1) -> dict[str, IrfResult | None]:
    """Fully interacted local projection for the HIGH and LOW groups.

    Every regressor, including the year effects, gets a group-specific
    coefficient inside one stacked regression; country effects stay country
    specific. A group without member countries yields ``None``.
    """
    spec = spec or LpSpec()
    if groups is None:
        groups = classify_emission_intensity(panel)
    mapping = dict(groups.groups if isinstance(groups, GroupClassification) else groups)
    present = set(panel.countries)
    labels = []
    for label in (HIGH, LOW):
        members = [c for c, g in mapping.items() if g == label and c in present]
        if not members:
            logger.warning("group %s has no countries; skipping", label)
            continue
        if len(members) < 2 and spec.year_fe:
            raise DegenerateRegressorError(
                f"group {label} has a single country; its year effects absorb the shock"
            )
        labels.append(label)
    if not labels:
        raise ValidationError("no classified countries in panel")
    prep = _prepare(panel, shocks, outcome, log, scale, spec)
    per_h = _map_horizons(lambda h: _fit_split_horizon(prep, h, spec, labels, mapping), spec, threads)
    out: dict[str, IrfResult | None] = {HIGH: None, LOW: None}
    for i, label in enumerate(labels):
        out[label] = _collect([row[i] for row in per_h], spec, prep.dropped)
    return out


class PanelLocalProjection(BaseEstimator):
    """Estimator wrapper around :func:`estimate_lp`.

    ``fit(panel, shocks)`` stores the impulse response in ``irf_``.
    """

    def __init__(self, outcome: str = "emissions", log: bool = True, horizon: int = 15, lags: int = 2,
                 controls=DEFAULT_CONTROLS, country_fe: bool = True, year_fe: bool = True,
                 ci_level: float = 0.68, dk_lags: int = 2, scale: float = 100.0):
        self.outcome = outcome
        self.log = log
        self.horizon = horizon
        self.lags = lags
        self.controls = controls
        self.country_fe = country_fe
        self.year_fe = year_fe
        self.ci_level = ci_level
        self.dk_lags = dk_lags
        self.scale = scale

    @property
    def spec(self) -> LpSpec:
        return LpSpec(self.horizon, self.lags, tuple(self.controls), self.country_fe,
                      self.year_fe, self.ci_level, self.dk_lags)

    def fit(self, panel: PanelDataset, shocks):
        self.irf_ = estimate_lp(panel, shocks, self.outcome, self.spec, log=self.log, scale=self.scale)
        return self

    def predict(self, horizons=None) -> np.ndarray:
        """Point responses at ``horizons`` (all horizons by default)."""
        check_is_fitted(self, "irf_")
        if horizons is None:
            return self.irf_.beta.copy()
        return self.irf_.beta[np.asarray(horizons, dtype=int)]


class SplitPanelLocalProjection(PanelLocalProjection):
    """Group-interacted variant; ``irfs_`` maps ``HIGH``/``LOW`` to results."""

    def __init__(self, outcome: str = "emissions", log: bool = True, horizon: int = 15, lags: int = 2,
                 controls=DEFAULT_CONTROLS, country_fe: bool = True, year_fe: bool = True,
                 ci_level: float = 0.68, dk_lags: int = 2, scale: float = 100.0, groups=None):
        super().__init__(outcome, log, horizon, lags, controls, country_fe, year_fe, ci_level, dk_lags, scale)
        self.groups = groups

    def fit(self, panel: PanelDataset, shocks):
        groups = self.groups if self.groups is not None else classify_emission_intensity(panel)
        self.groups_ = groups
        self.irfs_ = split_lp(panel, shocks, self.outcome, self.spec, groups, log=self.log, scale=self.scale)
        return self

    def predict(self, horizons=None) -> dict[str, np.ndarray | None]:
        check_is_fitted(self, "irfs_")
        idx = slice(None) if horizons is None else np.asarray(horizons, dtype=int)
        return {k: (None if v is None else v.beta[idx]) for k, v in self.irfs_.items()}


def with_spec(spec: LpSpec, **changes) -> LpSpec:
    return replace(spec, **changes)
