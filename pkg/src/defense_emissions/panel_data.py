"""Country-year panel ingestion and military-spending transformations.

Spending shares are stored as fractions of GDP. Conversion to percentage
points happens only when shocks are produced (see :mod:`.shocks`).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConfigError, ValidationError

logger = logging.getLogger(__name__)

#: Canonical panel fields. ``country``, ``year`` and ``mil_share`` are required.
PANEL_FIELDS = (
    "country",
    "year",
    "mil_share",
    "nominal_gdp",
    "real_gdp",
    "deflator",
    "emissions",
    "energy_use",
    "gdp_pc",
    "exports",
    "imports",
    "democracy",
    "steel",
    "patents_total",
    "patents_green",
)
REQUIRED_FIELDS = ("country", "year", "mil_share")
NUMERIC_FIELDS = PANEL_FIELDS[2:]

# (field, lower, upper, lower_open) ; None means unbounded
_BOUNDS = {
    "mil_share": (0.0, 1.0, False),
    "real_gdp": (0.0, None, True),
    "deflator": (0.0, None, True),
    "nominal_gdp": (0.0, None, False),
    "emissions": (0.0, None, False),
    "energy_use": (0.0, None, False),
    "democracy": (0.0, 1.0, False),
    "steel": (0.0, None, False),
    "patents_total": (0.0, None, False),
    "patents_green": (0.0, None, False),
}


@dataclass(frozen=True)
class PanelObservation:
    country: str
    year: int
    mil_share: float
    nominal_gdp: float = np.nan
    real_gdp: float = np.nan
    deflator: float = np.nan
    emissions: float = np.nan
    energy_use: float = np.nan
    gdp_pc: float = np.nan
    exports: float = np.nan
    imports: float = np.nan
    democracy: float = np.nan
    steel: float = np.nan
    patents_total: float = np.nan
    patents_green: float = np.nan


@dataclass(frozen=True)
class PanelDataset:
    """Validated country-year panel.

    ``frame`` holds one row per (country, year), sorted, with every canonical
    field present as a column (missing values are NaN). Treat it as read-only.
    """

    frame: pd.DataFrame
    rejected: tuple = ()
    gaps: Mapping[str, tuple] = field(default_factory=dict)

    @property
    def countries(self) -> list[str]:
        return list(dict.fromkeys(self.frame["country"]))

    @property
    def years(self) -> list[int]:
        return sorted(self.frame["year"].unique().tolist())

    @property
    def rows(self) -> list[PanelObservation]:
        return list(self.observations())

    def observations(self) -> Iterator[PanelObservation]:
        for rec in self.frame[list(PANEL_FIELDS)].itertuples(index=False):
            yield PanelObservation(*rec)

    def __len__(self) -> int:
        return len(self.frame)

    def country_frame(self, country: str) -> pd.DataFrame:
        sub = self.frame[self.frame["country"] == country]
        return sub.set_index("year").sort_index()

    def subset(self, countries) -> "PanelDataset":
        keep = set(countries)
        sub = self.frame[self.frame["country"].isin(keep)].reset_index(drop=True)
        return PanelDataset(sub, gaps={c: g for c, g in self.gaps.items() if c in keep})

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "PanelDataset":
        """Validate an in-memory frame that already uses canonical column names."""
        return _validate_frame(df.copy())


def read_schema(path) -> dict[str, str]:
    """Parse a ``canonical = csv_column`` schema file."""
    schema = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PANEL_FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown panel field {key!r}")
        schema[key] = value
    return schema


def load_panel(path, schema: Mapping[str, str] | None = None) -> PanelDataset:
    """Load a UTF-8 CSV panel, renaming columns through ``schema``.

    ``schema`` maps canonical field names to CSV header names; unmapped
    fields are looked up under their canonical name.
    """
    schema = dict(schema or {})
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    rename = {}
    for canon in PANEL_FIELDS:
        col = schema.get(canon, canon)
        if col in raw.columns:
            rename[col] = canon
        elif canon in REQUIRED_FIELDS:
            raise ValidationError(f"missing required column {col!r} (field {canon})")
    df = raw[list(rename)].rename(columns=rename)
    for name in ["year", *NUMERIC_FIELDS]:
        if name not in df.columns:
            continue
        cells = df[name].str.strip()
        numeric = pd.to_numeric(cells.replace("", np.nan), errors="coerce")
        bad = numeric.isna() & (cells != "")
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ValidationError(
                f"non-numeric cell in column {name!r} at data row {row + 1}: {cells.iloc[row]!r}"
            )
        df[name] = numeric
    if df["year"].isna().any():
        raise ValidationError("year column has empty cells")
    return _validate_frame(df)


def _validate_frame(df: pd.DataFrame) -> PanelDataset:
    for name in REQUIRED_FIELDS:
        if name not in df.columns:
            raise ValidationError(f"missing required column {name!r}")
    for name in PANEL_FIELDS:
        if name not in df.columns:
            df[name] = np.nan
    df["country"] = df["country"].astype(str)
    if np.any(df["year"] != np.round(df["year"])):
        raise ValidationError("year values must be integers")
    df["year"] = df["year"].astype(int)
    dup = df.duplicated(["country", "year"], keep=False)
    if dup.any():
        first = df.loc[dup, ["country", "year"]].iloc[0]
        raise ValidationError(f"duplicate (country, year) key: ({first.country}, {first.year})")

    rejected = []
    ok = np.ones(len(df), dtype=bool)
    for name, (lo, hi, lo_open) in _BOUNDS.items():
        vals = df[name].to_numpy(dtype=float)
        present = ~np.isnan(vals)
        viol = present & ((vals <= lo) if lo_open else (vals < lo))
        if hi is not None:
            viol |= present & (vals > hi)
        for idx in np.flatnonzero(viol & ok):
            rejected.append(
                f"{df['country'].iat[idx]} {df['year'].iat[idx]}: {name}={vals[idx]!r} out of range"
            )
        ok &= ~viol
    if rejected:
        logger.warning("rejected %d panel rows failing invariants", len(rejected))
    df = df.loc[ok, list(PANEL_FIELDS)].sort_values(["country", "year"], kind="stable")
    df = df.reset_index(drop=True)

    gaps = {}
    for country, years in df.groupby("country", sort=False)["year"]:
        y = years.to_numpy()
        holes = tuple(int(a) for a, b in zip(y[:-1], y[1:]) if b - a != 1)
        if holes:
            gaps[country] = holes
            logger.warning("country %s has year gaps after %s", country, holes)
    return PanelDataset(df, rejected=tuple(rejected), gaps=gaps)


@dataclass(frozen=True)
class TransformedSeries:
    country: str
    values: pd.Series  # year -> value
    kind: str  # level_share | gordon_krenn | hall_barro_redlick

    def __post_init__(self):
        if not np.all(np.isfinite(self.values.to_numpy(dtype=float))):
            raise ValidationError(f"{self.kind} series for {self.country} has non-finite values")


def quadratic_trend(series) -> pd.Series:
    """Least-squares fit of ``series`` on ``{1, t, t**2}``; returns fitted values."""
    s = pd.Series(series, dtype=float).dropna().sort_index()
    if len(s) < 4:
        raise ValidationError("quadratic trend needs at least 4 observations")
    t = s.index.to_numpy(dtype=float)
    # centring and scaling the time index keeps the design well conditioned
    tc = (t - t.mean()) / max(np.ptp(t), 1.0)
    design = np.column_stack([np.ones_like(tc), tc, tc**2])
    coef, *_ = np.linalg.lstsq(design, s.to_numpy(), rcond=None)
    return pd.Series(design @ coef, index=s.index)


def _as_country_frame(obs) -> tuple[str, pd.DataFrame]:
    if isinstance(obs, PanelDataset):
        countries = obs.countries
        if len(countries) != 1:
            raise ValidationError("expected observations for exactly one country")
        return countries[0], obs.country_frame(countries[0])
    df = pd.DataFrame(obs)
    if "year" in df.columns:
        df = df.set_index("year")
    country = str(df["country"].iloc[0]) if "country" in df.columns else ""
    return country, df.sort_index()


def real_military_spending(df: pd.DataFrame) -> pd.Series:
    """Nominal military spending deflated by the GDP deflator."""
    return df["mil_share"] * df["nominal_gdp"] / df["deflator"]


def gordon_krenn(obs) -> TransformedSeries:
    """Real military spending over the quadratic trend of real GDP."""
    country, df = _as_country_frame(obs)
    df = df.dropna(subset=["mil_share", "nominal_gdp", "deflator", "real_gdp"])
    trend = quadratic_trend(df["real_gdp"])
    if np.any(trend <= 0):
        raise ValidationError(f"{country}: non-positive real GDP trend value")
    return TransformedSeries(country, real_military_spending(df) / trend, "gordon_krenn")


def hall_barro_redlick(obs) -> TransformedSeries:
    """Change in real military spending relative to previous-year real GDP."""
    country, df = _as_country_frame(obs)
    df = df.dropna(subset=["mil_share", "nominal_gdp", "deflator", "real_gdp"])
    if len(df) < 2:
        raise ValidationError(f"{country}: need at least 2 consecutive years")
    years = df.index.to_numpy()
    if np.any(np.diff(years) != 1):
        raise ValidationError(f"{country}: non-contiguous years in HBR window")
    m_star = real_military_spending(df).to_numpy()
    y_real = df["real_gdp"].to_numpy()
    values = (m_star[1:] - m_star[:-1]) / y_real[:-1]
    return TransformedSeries(country, pd.Series(values, index=years[1:]), "hall_barro_redlick")


def level_share(obs) -> TransformedSeries:
    country, df = _as_country_frame(obs)
    return TransformedSeries(country, df["mil_share"].dropna(), "level_share")


_KINDS = {"share": level_share, "gk": gordon_krenn, "hbr": hall_barro_redlick}


class SpendingTransformer(BaseEstimator, TransformerMixin):
    """Turn a panel into a long ``(country, year, value)`` frame of spending measures.

    Parameters
    ----------
    kind : {"share", "gk", "hbr"}
        Military-spending share, Gordon-Krenn ratio, or Hall-Barro-Redlick change.
    """

    def __init__(self, kind: str = "share"):
        self.kind = kind

    def fit(self, X, y=None):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown spending transformation {self.kind!r}")
        return self

    def transform(self, X) -> pd.DataFrame:
        panel = X if isinstance(X, PanelDataset) else PanelDataset.from_frame(pd.DataFrame(X))
        func = _KINDS[self.kind]
        parts = []
        for country in panel.countries:
            ts = func(panel.country_frame(country).assign(country=country))
            parts.append(
                pd.DataFrame({"country": country, "year": ts.values.index, "value": ts.values.to_numpy()})
            )
        return pd.concat(parts, ignore_index=True)
