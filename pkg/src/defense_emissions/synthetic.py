"""Synthetic economies and panels used by the shipped fixtures and tests.

Nothing here is real data. Tables are built so that every row and column
balances exactly, which keeps calibrated shares internally consistent.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from .calibration import (
    Calibration,
    CalibrationConfig,
    EmissionLevels,
    InvestmentNetwork,
    UseTable,
    build_calibration,
    write_calibration_inputs,
)

INDUSTRIES_41 = (
    "Farms, forestry and fishing", "Oil and gas extraction", "Mining, except oil and gas",
    "Support activities for mining", "Utilities", "Construction", "Wood products",
    "Nonmetallic mineral products", "Primary metals", "Fabricated metal products", "Machinery",
    "Computer and electronic products", "Electrical equipment and appliances",
    "Motor vehicles and parts", "Other transportation equipment", "Furniture and related products",
    "Miscellaneous manufacturing", "Food, beverage and tobacco products", "Textile products",
    "Apparel and leather", "Paper products", "Printing", "Petroleum and coal products",
    "Chemical products", "Plastics and rubber products", "Wholesale trade", "Retail trade",
    "Air transportation", "Rail transportation", "Water transportation", "Truck transportation",
    "Other transportation and warehousing", "Information", "Finance and insurance", "Real estate",
    "Professional and business services", "Educational services", "Health care and social assistance",
    "Arts, entertainment and recreation", "Accommodation and food services", "Other services",
)

# emissions per unit of gross output, arbitrary units
_INTENSITY = {
    "Utilities": 60.0, "Petroleum and coal products": 25.0, "Primary metals": 18.0,
    "Oil and gas extraction": 14.0, "Nonmetallic mineral products": 16.0, "Chemical products": 7.0,
    "Air transportation": 12.0, "Water transportation": 9.0, "Truck transportation": 6.0,
    "Rail transportation": 5.0, "Mining, except oil and gas": 5.0, "Farms, forestry and fishing": 6.0,
    "Paper products": 4.0, "Fabricated metal products": 1.5, "Other transportation equipment": 0.8,
}
_INVESTMENT_HUBS = {
    "Construction": 0.40, "Machinery": 0.18, "Computer and electronic products": 0.12,
    "Motor vehicles and parts": 0.10, "Professional and business services": 0.10,
    "Electrical equipment and appliances": 0.04, "Other transportation equipment": 0.03,
    "Fabricated metal products": 0.03,
}
_SUPPLY_LINKS = [
    ("Primary metals", "Fabricated metal products", 2.0), ("Primary metals", "Machinery", 1.0),
    ("Primary metals", "Other transportation equipment", 0.8), ("Primary metals", "Motor vehicles and parts", 0.8),
    ("Oil and gas extraction", "Petroleum and coal products", 4.0), ("Oil and gas extraction", "Utilities", 1.5),
    ("Petroleum and coal products", "Air transportation", 1.5), ("Petroleum and coal products", "Truck transportation", 1.2),
    ("Mining, except oil and gas", "Primary metals", 1.0), ("Chemical products", "Plastics and rubber products", 1.5),
    ("Fabricated metal products", "Other transportation equipment", 0.8),
    ("Computer and electronic products", "Other transportation equipment", 0.8),
]
GDP = 1000.0
BASE_MIL_SHARE = 0.033
S_P = 0.2 * BASE_MIL_SHARE
S_E = 0.02 * BASE_MIL_SHARE


def _balanced_table(theta, alpha, omega, F_hh, F_gov, F_inv, labels, codes=()):
    """Gross output that clears every row given final demand, and the table it implies."""
    n = len(theta)
    A = omega * (1 - theta)[None, :]
    go = np.linalg.solve(np.eye(n) - A, F_hh + F_gov + F_inv)
    Z = A * go[None, :]
    return UseTable(
        intermediate=Z, labor_comp=alpha * theta * go, capital_comp=(1 - alpha) * theta * go,
        household_final=F_hh, government_final=F_gov, investment_final=F_inv, gross_output=go,
        labels=tuple(labels), codes=tuple(codes),
    )


def _ras(seed_matrix, row_totals, col_totals, iters: int = 200):
    M = seed_matrix.copy()
    for _ in range(iters):
        rs = M.sum(1)
        M *= np.divide(row_totals, rs, out=np.zeros_like(rs), where=rs > 0)[:, None]
        cs = M.sum(0)
        M *= np.divide(col_totals, cs, out=np.zeros_like(cs), where=cs > 0)[None, :]
    return M


def fixture_tables(seed: int = 2017):
    """Raw inputs of the shipped 41-industry synthetic calibration.

    Returns ``(use, networks, depreciation, dep_years, emissions, config_lines)``.
    Government purchases from the weapon and energy industries are set to the
    base procurement and energy shares of GDP.
    """
    rng = np.random.default_rng(seed)
    labels = list(INDUSTRIES_41)
    n = len(labels)
    codes = [f"I{i:02d}" for i in range(n)]
    idx = {lab: i for i, lab in enumerate(labels)}
    services = [idx[k] for k in labels[25:]]

    theta = rng.uniform(0.32, 0.5, n)
    theta[services] = rng.uniform(0.55, 0.72, len(services))
    alpha = rng.uniform(0.45, 0.75, n)
    for name, a in [("Real estate", 0.12), ("Oil and gas extraction", 0.25), ("Utilities", 0.3),
                    ("Petroleum and coal products", 0.3), ("Information", 0.45)]:
        alpha[idx[name]] = a

    omega = rng.dirichlet(np.full(n, 0.25), size=n).T  # columns are buyers
    omega += 0.02 / n
    omega[idx["Utilities"], :] += 0.03
    omega[idx["Wholesale trade"], :] += 0.03
    omega[idx["Professional and business services"], :] += 0.05
    for src, dst, w in _SUPPLY_LINKS:
        omega[idx[src], idx[dst]] += w * 0.2
    omega /= omega.sum(axis=0, keepdims=True)

    F_hh = rng.gamma(1.2, 1.0, n)
    for name in ("Primary metals", "Support activities for mining", "Oil and gas extraction",
                 "Fabricated metal products", "Other transportation equipment", "Machinery",
                 "Mining, except oil and gas", "Construction"):
        F_hh[idx[name]] *= 0.02
    for name, boost in [("Real estate", 12), ("Health care and social assistance", 10), ("Retail trade", 8),
                        ("Finance and insurance", 6), ("Accommodation and food services", 5),
                        ("Food, beverage and tobacco products", 4), ("Utilities", 1.5),
                        ("Petroleum and coal products", 1.5)]:
        F_hh[idx[name]] *= boost
    F_hh *= 0.68 * GDP / F_hh.sum()

    F_gov = np.zeros(n)
    for name in ("Educational services", "Health care and social assistance", "Professional and business services",
                 "Construction", "Other services", "Information"):
        F_gov[idx[name]] = rng.uniform(0.5, 1.5)
    F_gov *= (0.14 - S_P - S_E) * GDP / F_gov.sum()
    F_gov[idx["Fabricated metal products"]] = 0.35 * S_P * GDP
    F_gov[idx["Other transportation equipment"]] = 0.65 * S_P * GDP
    F_gov[idx["Utilities"]] = 0.3 * S_E * GDP
    F_gov[idx["Petroleum and coal products"]] = 0.7 * S_E * GDP

    F_inv = np.zeros(n)
    for name, share in _INVESTMENT_HUBS.items():
        F_inv[idx[name]] = share
    F_inv *= 0.18 * GDP / F_inv.sum()

    use = _balanced_table(theta, alpha, omega, F_hh, F_gov, F_inv, labels, codes)

    # investment networks: only hub rows sell investment goods, so each year is singular
    cap = use.capital_comp
    dep_base = np.clip(rng.lognormal(np.log(0.07), 0.5, n), 0.025, 0.2)
    dep_base[idx["Real estate"]] = 0.025
    dep_base[idx["Utilities"]] = 0.035
    dep_base[idx["Computer and electronic products"]] = 0.16
    hub_rows = np.flatnonzero(F_inv > 0)
    years = list(range(1948, 2019))
    networks = []
    for k, year in enumerate(years):
        drift = np.ones(n)
        drift[idx["Computer and electronic products"]] = 0.3 + 1.4 * k / len(years)
        drift[idx["Professional and business services"]] = 0.2 + 1.6 * k / len(years)
        seed_m = np.zeros((n, n))
        seed_m[hub_rows] = (F_inv * drift)[hub_rows, None] * rng.lognormal(0, 0.35, (len(hub_rows), n))
        col_tot = dep_base * cap / 0.1 * rng.lognormal(0, 0.1, n)
        if year == 2017:
            col_tot *= F_inv.sum() / col_tot.sum()
            flows = _ras(seed_m, F_inv, col_tot)
        else:
            flows = seed_m * (col_tot / seed_m.sum(0))[None, :]
        networks.append(InvestmentNetwork(flows, year))

    dep_years = list(range(1947, 2019))
    depreciation = np.clip(dep_base[None, :] * rng.lognormal(0, 0.08, (len(dep_years), n)), 0.01, 0.4)

    intensity = np.full(n, 0.6) * rng.uniform(0.6, 1.4, n)
    for name, v in _INTENSITY.items():
        intensity[idx[name]] = v
    ind = intensity * use.gross_output
    emissions = EmissionLevels(ind, household=0.22 * ind.sum() / 0.77, government=0.01 * ind.sum() / 0.77)
    config_lines = {
        "beta": "0.98", "frisch": "0.4", "maintenance_share": "0.125", "target_year": "2017",
        "base_mil_share": str(BASE_MIL_SHARE),
        "weapon_labels": "Fabricated metal products; Other transportation equipment",
        "energy_labels": "Utilities; Petroleum and coal products",
    }
    return use, networks, depreciation, dep_years, emissions, config_lines


def fixture_calibration(seed: int = 2017) -> Calibration:
    use, networks, dep, _, em, _ = fixture_tables(seed)
    return build_calibration(use, networks, dep, em, CalibrationConfig(base_mil_share=BASE_MIL_SHARE))


def write_fixture(directory, seed: int = 2017) -> Path:
    use, networks, dep, dep_years, em, cfg = fixture_tables(seed)
    write_calibration_inputs(directory, use, networks, dep, dep_years, em, cfg)
    return Path(directory)


def random_tables(n: int, rng: np.random.Generator, years: int = 3):
    """Small random balanced economy; industry 0 is the weapon and industry 1 the energy sector."""
    theta = rng.uniform(0.3, 0.8, n)
    alpha = rng.uniform(0.3, 0.8, n)
    omega = rng.dirichlet(np.ones(n), size=n).T
    F_hh = rng.uniform(0.5, 2.0, n)
    F_gov = rng.uniform(0.05, 0.5, n)
    F_inv = rng.uniform(0.1, 1.0, n) * (rng.uniform(size=n) < 0.7)
    F_inv[rng.integers(n)] += 0.5
    labels = tuple(f"industry_{i}" for i in range(n))
    use = _balanced_table(theta, alpha, omega, F_hh, F_gov, F_inv, labels)
    networks = [InvestmentNetwork(F_inv[:, None] * rng.dirichlet(np.ones(n))[None, :] * rng.lognormal(0, 0.2, (n, n)), 2000 + k)
                for k in range(years)]
    dep = rng.uniform(0.03, 0.2, (years, n))
    em = EmissionLevels(rng.uniform(0.1, 2.0, n), float(rng.uniform(0.1, 1)), float(rng.uniform(0.01, 0.2)))
    return use, networks, dep, em


def random_calibration(n: int, rng: np.random.Generator, maintenance_share: float = 0.125) -> Calibration:
    use, networks, dep, em = random_tables(n, rng)
    cfg = CalibrationConfig(
        maintenance_share=maintenance_share, target_year=None,
        weapon_labels=("industry_0",), energy_labels=("industry_1",) if n > 1 else (),
        beta_disc=float(rng.uniform(0.9, 0.99)), frisch=float(rng.uniform(0.2, 2.0)),
    )
    return build_calibration(use, networks, dep, em, cfg)


# --------------------------------------------------------------------------
# panels


def hump_irf(h, peak: float = 2.0, peak_h: int = 6, end_h: int = 12):
    """Zero at impact, ``peak`` at ``peak_h``, back to zero from ``end_h`` on."""
    h = np.asarray(h, dtype=float)
    rise = peak * np.sin(0.5 * np.pi * h / peak_h)
    fall = peak * np.sin(0.5 * np.pi * (end_h - h) / (end_h - peak_h))
    return np.where(h <= peak_h, rise, np.where(h < end_h, fall, 0.0)) * (h >= 0)


def simulate_ar2_panel(n_countries: int, n_years: int, rng: np.random.Generator,
                       phi=(0.6, 0.2), sigma: float = 0.004, start_year: int = 1900) -> pd.DataFrame:
    """Military shares following a stationary AR(2) around country means."""
    rows = []
    for c in range(n_countries):
        mean = rng.uniform(0.01, 0.05)
        e = rng.normal(0, sigma, n_years + 50)
        x = np.zeros(n_years + 50)
        for t in range(2, len(x)):
            x[t] = phi[0] * x[t - 1] + phi[1] * x[t - 2] + e[t]
        share = np.clip(mean + x[50:], 1e-4, 0.9)
        rows.append(pd.DataFrame({"country": f"C{c:02d}", "year": start_year + np.arange(n_years),
                                  "mil_share": share}))
    return pd.concat(rows, ignore_index=True)


def simulate_lp_panel(n_countries: int, n_years: int, rng: np.random.Generator, irf=hump_irf,
                      max_h: int = 15, noise: float = 0.01, start_year: int = 1800):
    """Panel where log emissions respond to an i.i.d. shock with the given IRF.

    Returns ``(panel_frame, shock_frame)``; shocks are in percentage points and
    the outcome moves by ``irf(h)`` percent per point at horizon ``h``.
    """
    psi = irf(np.arange(max_h + 1)) / 100
    frames, shocks = [], []
    years = start_year + np.arange(n_years)
    common = rng.normal(0, 0.01, n_years).cumsum()
    for c in range(n_countries):
        s = rng.normal(0, 1.0, n_years + max_h)
        resp = np.convolve(s, psi)[max_h:max_h + n_years]
        log_e = rng.normal(5, 1) + common + resp + rng.normal(0, noise, n_years).cumsum() * 0.3 \
            + rng.normal(0, noise, n_years)
        gdp_pc = np.exp(rng.normal(0.02, 0.02, n_years).cumsum())
        frames.append(pd.DataFrame({
            "country": f"C{c:02d}", "year": years, "mil_share": rng.uniform(0.01, 0.05, n_years),
            "emissions": np.exp(log_e), "real_gdp": 100 * gdp_pc, "gdp_pc": gdp_pc,
            "exports": np.exp(rng.normal(0, 0.03, n_years).cumsum()),
            "imports": np.exp(rng.normal(0, 0.03, n_years).cumsum()),
            "democracy": rng.uniform(0.3, 0.9, n_years),
        }))
        shocks.append(pd.DataFrame({"country": f"C{c:02d}", "year": years, "shock_pp": s[max_h:]}))
    return pd.concat(frames, ignore_index=True), pd.concat(shocks, ignore_index=True)


def simulate_country_panel(n_countries: int = 20, first_year: int = 1970, last_year: int = 2016,
                           seed: int = 7) -> pd.DataFrame:
    """Full-schema synthetic panel with a hump response of emissions to spending shocks."""
    rng = np.random.default_rng(seed)
    years = np.arange(first_year, last_year + 1)
    T = len(years)
    psi = hump_irf(np.arange(16)) / 100
    out = []
    for c in range(n_countries):
        mean = rng.uniform(0.012, 0.045)
        e = rng.normal(0, 0.003, T + 30)
        x = np.zeros(T + 30)
        for t in range(2, T + 30):
            x[t] = 0.9 * x[t - 1] - 0.1 * x[t - 2] + e[t]
        share = np.clip(mean + x[30:], 0.002, 0.2)
        innov = 100 * e[30:]
        growth = rng.normal(0.025, 0.02, T)
        real_gdp = 500 * rng.uniform(0.2, 5) * np.exp(growth.cumsum())
        deflator = np.exp(rng.normal(0.03, 0.01, T).cumsum())
        pop = rng.uniform(3, 80) * np.exp(0.005 * np.arange(T))
        intensity0 = rng.uniform(0.2, 0.8)
        resp = np.convolve(innov, psi)[:T]
        log_int = np.log(intensity0) - 0.012 * np.arange(T) + rng.normal(0, 0.01, T).cumsum() * 0.5
        emissions = np.exp(log_int + resp) * real_gdp
        energy = emissions * rng.uniform(2, 4) * np.exp(rng.normal(0, 0.01, T))
        patents = np.round(rng.uniform(100, 5000) * np.exp(rng.normal(0.03, 0.05, T).cumsum()))
        out.append(pd.DataFrame({
            "country": f"Country{c:02d}", "year": years, "mil_share": share,
            "nominal_gdp": real_gdp * deflator, "real_gdp": real_gdp, "deflator": deflator,
            "emissions": emissions, "energy_use": energy, "gdp_pc": real_gdp / pop,
            "exports": real_gdp * rng.uniform(0.1, 0.4) * np.exp(rng.normal(0, 0.03, T).cumsum()),
            "imports": real_gdp * rng.uniform(0.1, 0.4) * np.exp(rng.normal(0, 0.03, T).cumsum()),
            "democracy": np.clip(rng.uniform(0.5, 0.9) + rng.normal(0, 0.01, T).cumsum(), 0, 1),
            "steel": real_gdp * rng.uniform(0.01, 0.05) * np.exp(resp * 1.5 + rng.normal(0, 0.03, T)),
            "patents_total": patents,
            "patents_green": np.round(patents * rng.uniform(0.05, 0.15)),
        }))
    return pd.concat(out, ignore_index=True)
