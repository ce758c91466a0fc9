"""Military-spending shocks as per-country regression forecast errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateRegressorError, ValidationError
from .panel_data import PanelDataset, SpendingTransformer, TransformedSeries

#: Extra observations demanded beyond the bare ``h + l + 1`` regression size.
MIN_EXTRA_OBS = 10
PP = 100.0  # fraction -> percentage points


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    n_obs: int
    rank: int


def ols(y, X, *, allow_rank_deficient: bool = False) -> OlsFit:
    """Ordinary least squares via SVD.

    Raises ``DegenerateRegressorError`` for a rank-deficient design unless
    ``allow_rank_deficient`` is set, in which case the minimum-norm solution
    is returned (residuals are still uniquely defined).
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0]:
        raise ValidationError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] <= X.shape[1]:
        raise ValidationError(
            f"insufficient observations: {X.shape[0]} rows for {X.shape[1]} regressors"
        )
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1] and not allow_rank_deficient:
        raise DegenerateRegressorError(f"design matrix has rank {rank} < {X.shape[1]} columns")
    fitted = X @ coef
    return OlsFit(coef, y - fitted, fitted, X.shape[0], int(rank))


@dataclass(frozen=True)
class ShockSeries:
    country: str
    shocks: pd.Series  # year -> shock in percentage points
    horizon_h: int
    lag_l: int


def _hamilton_design(values: np.ndarray, h: int, l: int):
    n = len(values)
    rows = np.arange(l, n - h)
    X = np.column_stack([np.ones(len(rows))] + [values[rows - k] for k in range(l + 1)])
    return rows, X, values[rows + h]


def _contiguous_series(series) -> tuple[str, pd.Series]:
    if isinstance(series, TransformedSeries):
        country, s = series.country, series.values
    else:
        s = pd.Series(series)
        country = str(s.name) if s.name is not None else ""
    s = s.dropna().astype(float).sort_index()
    if np.any(np.diff(s.index.to_numpy()) != 1):
        raise ValidationError(f"{country}: year gap breaks the lag window")
    return country, s


def _check_length(country: str, n: int, h: int, l: int) -> None:
    if h < 1 or l < 0:
        raise ValidationError("need h >= 1 and l >= 0")
    if n < h + l + 1 + MIN_EXTRA_OBS:
        raise ValidationError(f"{country}: {n} observations, need at least {h + l + 1 + MIN_EXTRA_OBS}")


def hamilton_shocks(series, h: int = 2, l: int = 2) -> ShockSeries:
    """Regress ``M[t+h]`` on ``1, M[t], ..., M[t-l]`` and return the residuals.

    The residual for the regression row ``t`` is dated ``t + h``. ``series``
    holds fractions; the shocks come back in percentage points.
    """
    country, s = _contiguous_series(series)
    _check_length(country, len(s), h, l)
    rows, X, target = _hamilton_design(s.to_numpy(), h, l)
    fit = ols(target, X, allow_rank_deficient=True)
    dates = s.index.to_numpy()[rows + h]
    return ShockSeries(country, pd.Series(PP * fit.residuals, index=dates), h, l)


def passthrough_shocks(series) -> ShockSeries:
    """Use a spending measure directly as the shock (the HBR mode)."""
    country, s = _contiguous_series(series)
    return ShockSeries(country, PP * s, 0, 0)


def shocks_to_frame(shocks) -> pd.DataFrame:
    """Stack ShockSeries into a long ``(country, year, shock_pp)`` frame."""
    parts = [
        pd.DataFrame({"country": s.country, "year": s.shocks.index.astype(int), "shock_pp": s.shocks.to_numpy()})
        for s in shocks
    ]
    if not parts:
        return pd.DataFrame(columns=["country", "year", "shock_pp"])
    return pd.concat(parts, ignore_index=True)


class HamiltonFilter(BaseEstimator, TransformerMixin):
    """Per-country Hamilton regression filter.

    ``fit`` estimates one forecasting regression per country; ``transform``
    returns the long frame of forecast errors ``(country, year, shock_pp)``.
    Input is a long frame with ``country``, ``year`` and ``value`` columns
    holding fractions (e.g. the output of :class:`SpendingTransformer`).

    Parameters
    ----------
    h : int, default 2
        Forecast horizon.
    l : int, default 2
        Number of extra lags; the regression uses ``l + 1`` own values.
    """

    def __init__(self, h: int = 2, l: int = 2):
        self.h = h
        self.l = l

    def _series(self, X):
        df = pd.DataFrame(X)
        for c in ("country", "year", "value"):
            if c not in df.columns:
                raise ValidationError(f"HamiltonFilter input needs a {c!r} column")
        for country, sub in df.groupby("country", sort=False):
            yield str(country), pd.Series(sub["value"].to_numpy(), index=sub["year"].to_numpy(), name=str(country))

    def fit(self, X, y=None):
        self.coef_ = {}
        for country, s in self._series(X):
            _, s = _contiguous_series(s)
            _check_length(country, len(s), self.h, self.l)
            _, Xd, target = _hamilton_design(s.to_numpy(), self.h, self.l)
            self.coef_[country] = ols(target, Xd, allow_rank_deficient=True).coefficients
        return self

    def transform(self, X) -> pd.DataFrame:
        check_is_fitted(self, "coef_")
        out = []
        for country, s in self._series(X):
            if country not in self.coef_:
                raise ValidationError(f"country {country!r} was not seen during fit")
            _, s = _contiguous_series(s)
            rows, Xd, target = _hamilton_design(s.to_numpy(), self.h, self.l)
            resid = target - Xd @ self.coef_[country]
            dates = s.index.to_numpy()[rows + self.h]
            out.append(ShockSeries(country, pd.Series(PP * resid, index=dates), self.h, self.l))
        return shocks_to_frame(out)


def extract_shocks(panel: PanelDataset, var: str = "share", h: int = 2, l: int = 2) -> pd.DataFrame:
    """End-to-end shock extraction for every country in ``panel``.

    ``var="hbr"`` passes the Hall-Barro-Redlick measure through unfiltered.
    """
    measures = SpendingTransformer(kind=var).fit_transform(panel)
    if var == "hbr":
        series = [
            passthrough_shocks(pd.Series(sub["value"].to_numpy(), index=sub["year"].to_numpy(), name=c))
            for c, sub in measures.groupby("country", sort=False)
        ]
        return shocks_to_frame(series)
    return HamiltonFilter(h=h, l=l).fit_transform(measures)
