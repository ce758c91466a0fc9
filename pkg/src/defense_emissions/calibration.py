"""Production-network calibration from input-output and investment tables."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from ._validation import (
    check_finite_array,
    check_matching_length,
    check_nonnegative,
    check_square,
    check_sums_to_one,
)
from .exceptions import ConfigError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_WEAPON_LABELS = ("Fabricated metal products", "Other transportation equipment")
DEFAULT_ENERGY_LABELS = ("Utilities", "Petroleum and coal products")
NEG_CLIP = 1e-8
BALANCE_TOL = 1e-6


@dataclass(frozen=True)
class UseTable:
    """Industry-by-industry use table in purchaser values.

    ``intermediate[i, j]`` is the value of good ``i`` used by industry ``j``.
    """

    intermediate: np.ndarray
    labor_comp: np.ndarray
    capital_comp: np.ndarray
    household_final: np.ndarray
    government_final: np.ndarray
    investment_final: np.ndarray
    gross_output: np.ndarray
    labels: tuple[str, ...] = ()
    codes: tuple[str, ...] = ()

    def __post_init__(self):
        n = check_square(self.intermediate, "intermediate").shape[0]
        vectors = {f.name: getattr(self, f.name) for f in fields(self)
                   if f.name not in ("intermediate", "labels", "codes")}
        check_matching_length(n, **vectors)
        for name, vec in [("intermediate", self.intermediate), *vectors.items()]:
            object.__setattr__(self, name, check_nonnegative(vec, name))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"industry_{i}" for i in range(n)))
        if not self.codes:
            object.__setattr__(self, "codes", tuple(str(i) for i in range(n)))

    @property
    def n(self) -> int:
        return self.intermediate.shape[0]

    def final_demand(self) -> np.ndarray:
        return self.household_final + self.government_final + self.investment_final

    def row_gap(self) -> np.ndarray:
        """Gross output minus total uses, per producing industry."""
        return self.gross_output - self.intermediate.sum(axis=1) - self.final_demand()


@dataclass(frozen=True)
class InvestmentNetwork:
    """``flows[i, j]``: investment goods produced by ``i`` and installed by ``j``."""

    flows: np.ndarray
    year: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "flows", check_nonnegative(check_square(self.flows, "flows"), "flows"))


@dataclass(frozen=True)
class EmissionLevels:
    industry: np.ndarray
    household: float
    government: float

    def shares(self):
        ind = check_nonnegative(self.industry, "industry emissions")
        if self.household < 0 or self.government < 0:
            raise ValidationError("emission levels must be non-negative")
        total = ind.sum() + self.household + self.government
        if total <= 0:
            raise ValidationError("total emissions must be positive")
        return ind / total, self.household / total, self.government / total


@dataclass(frozen=True)
class CalibrationConfig:
    beta_disc: float = 0.98
    frisch: float = 0.4
    maintenance_share: float = 0.125
    target_year: int | None = 2017
    weapon_labels: tuple[str, ...] = DEFAULT_WEAPON_LABELS
    energy_labels: tuple[str, ...] = DEFAULT_ENERGY_LABELS
    base_mil_share: float = 0.033
    S_P: float | None = None
    S_E: float | None = None


@dataclass(frozen=True)
class Calibration:
    """All share parameters of the network model.

    Matrix orientation follows the producer-first convention: ``Delta[i, j]``,
    ``iota[i, j]``, ``omega[j, i]`` and ``chi[j, i]`` all index the supplying
    industry first. ``gross_output`` holds base-year nominal output and is used
    only as Laspeyres weights.
    """

    Delta: np.ndarray
    iota: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    omega: np.ndarray
    chi: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray
    delta_dep: np.ndarray
    beta_cons: np.ndarray
    eps_ind: np.ndarray
    eps_hh: float
    eps_govt: float
    gross_output: np.ndarray
    beta_disc: float = 0.98
    frisch: float = 0.4
    weapon_set: tuple[int, ...] = ()
    energy_set: tuple[int, ...] = ()
    base_mil_share: float = 0.033
    S_P: float = 0.0
    S_E: float = 0.0
    labels: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.phi)

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, (list, np.ndarray)) and f.name not in ("weapon_set", "energy_set", "labels"):
                object.__setattr__(self, f.name, np.asarray(val, dtype=float))
        object.__setattr__(self, "weapon_set", tuple(int(i) for i in self.weapon_set))
        object.__setattr__(self, "energy_set", tuple(int(i) for i in self.energy_set))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"industry_{i}" for i in range(self.n)))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    def validate(self, tol: float = 1e-10) -> "Calibration":
        n = self.n
        for name in ("Delta", "iota", "omega", "chi"):
            mat = check_finite_array(getattr(self, name), name, ndim=2)
            if mat.shape != (n, n):
                raise ValidationError(f"{name} has shape {mat.shape}, expected {(n, n)}")
            check_nonnegative(mat, name, tol)
        check_sums_to_one(self.omega, "omega columns", axis=0, tol=tol)
        check_sums_to_one(self.chi, "chi columns", axis=0, tol=tol)
        check_sums_to_one(self.beta_cons, "consumption shares", tol=tol)
        check_sums_to_one(self.lam, "labor shares", tol=tol)
        exhaustion = self.Delta.sum(1) + self.iota.sum(1) + self.phi + self.gamma
        check_sums_to_one(exhaustion[:, None], "output exhaustion", axis=1, tol=tol)
        check_sums_to_one(np.append(self.eps_ind, [self.eps_hh, self.eps_govt]), "emission shares", tol=tol)
        if np.any((self.alpha <= 0) | (self.alpha >= 1)):
            raise ValidationError("alpha must lie in (0, 1)")
        if np.any((self.theta <= 0) | (self.theta > 1)):
            raise ValidationError("theta must lie in (0, 1]")
        if np.any((self.delta_dep <= 0) | (self.delta_dep > 1)):
            raise ValidationError("depreciation must lie in (0, 1]")
        if not 0 < self.beta_disc < 1 or self.frisch <= 0:
            raise ValidationError("need 0 < beta < 1 and a positive Frisch elasticity")
        if np.any(self.gross_output <= 0):
            raise ValidationError("gross output weights must be positive")
        for name in ("phi", "gamma", "lam", "beta_cons", "eps_ind"):
            check_nonnegative(getattr(self, name), name, tol)
        return self

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else (list(v) if isinstance(v, tuple) else v)
        return out

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: Mapping) -> "Calibration":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown calibration keys: {sorted(unknown)}")
        return cls(**dict(data)).validate()

    @classmethod
    def from_json(cls, path) -> "Calibration":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def with_shares(self, **changes) -> "Calibration":
        return replace(self, **changes)


# --------------------------------------------------------------------------
# table operations


def direct_requirements(H) -> np.ndarray:
    """``A = I - H^-1`` for a total-requirements matrix ``H``."""
    H = check_square(H, "H")
    try:
        inv = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("total requirements matrix is singular") from exc
    if not np.all(np.isfinite(inv)) or np.linalg.cond(H) > 1e14:
        raise ValidationError("total requirements matrix is singular")
    A = np.eye(H.shape[0]) - inv
    if A.min() < -NEG_CLIP:
        raise ValidationError(f"direct requirements entry {A.min():.3g} is negative: inconsistent table")
    return np.clip(A, 0.0, None)


def invert_total_requirements(H, final_demand) -> np.ndarray:
    """Recover intermediate flows from a total-requirements table.

    Gross output is ``H @ final_demand`` and ``flows[i, j] = A[i, j] * output[j]``.
    """
    A = direct_requirements(H)
    f = check_nonnegative(final_demand, "final_demand")
    output = np.asarray(H, dtype=float) @ f
    return A * output[None, :]


def balance_use_table(use: UseTable, tol: float = BALANCE_TOL) -> tuple[UseTable, list[str]]:
    """Push row slack above ``tol`` (relative) into the final-demand cells pro rata."""
    gap = use.row_gap()
    rel = np.abs(gap) / np.maximum(use.gross_output, 1e-300)
    report = []
    hh, gov, inv = use.household_final.copy(), use.government_final.copy(), use.investment_final.copy()
    for i in np.flatnonzero(rel > tol):
        final = hh[i] + gov[i] + inv[i]
        if final <= 0:
            if gap[i] < 0:
                raise ValidationError(f"{use.labels[i]}: uses exceed output with no final demand to absorb it")
            hh[i] = gap[i]
        else:
            scale = (final + gap[i]) / final
            if scale < 0:
                raise ValidationError(f"{use.labels[i]}: slack {gap[i]:.4g} exceeds final demand")
            hh[i] *= scale
            gov[i] *= scale
            inv[i] *= scale
        report.append(f"{use.labels[i]}: distributed slack {gap[i]:.6g} ({rel[i]:.3g} of output)")
    if report:
        logger.info("use table balancing adjusted %d rows", len(report))
    return replace(use, household_final=hh, government_final=gov, investment_final=inv), report


def _normalise_columns(mat: np.ndarray) -> np.ndarray:
    """Column shares; an all-zero column becomes the unit vector on the diagonal."""
    sums = mat.sum(axis=0)
    out = np.divide(mat, sums, out=np.zeros_like(mat), where=sums > 0)
    empty = np.flatnonzero(sums <= 0)
    out[empty, empty] = 1.0
    return out


def average_chi(networks: Sequence[InvestmentNetwork]) -> np.ndarray:
    """Per-year column shares of the investment network, averaged over years.

    A column only enters the average in years where the industry invested.
    """
    if not networks:
        raise ValidationError("need at least one investment network")
    n = networks[0].flows.shape[0]
    acc = np.zeros((n, n))
    count = np.zeros(n)
    for net in networks:
        if net.flows.shape != (n, n):
            raise ValidationError("investment networks disagree on size")
        sums = net.flows.sum(axis=0)
        active = sums > 0
        acc[:, active] += net.flows[:, active] / sums[active]
        count += active
    chi = np.divide(acc, count, out=np.zeros_like(acc), where=count > 0)
    never = np.flatnonzero(count == 0)
    if never.size:
        logger.warning("industries %s never invest; treating their capital as self-produced", never.tolist())
        chi[never, never] = 1.0
    return chi


def maintenance_adjustment(chi, iota, share: float = 0.125) -> tuple[np.ndarray, np.ndarray]:
    """Add own-industry maintenance investment to the investment network.

    Every column of ``chi`` becomes ``(1 - share) * chi[:, j] + share * e_j``.
    ``iota`` gets the same convex shift along rows so each producer's total
    investment-goods deliveries (and hence output exhaustion) are unchanged.
    """
    chi = check_square(chi, "chi")
    iota = check_square(iota, "iota")
    if not 0 <= share < 1:
        raise ValidationError("maintenance share must lie in [0, 1)")
    check_sums_to_one(chi, "chi columns", axis=0, tol=1e-8)
    n = chi.shape[0]
    chi_adj = (1.0 - share) * chi + share * np.eye(n)
    iota_adj = (1.0 - share) * iota + share * np.diag(iota.sum(axis=1))
    if share > 0:
        sign, logdet = np.linalg.slogdet(chi_adj)
        if sign == 0 or logdet < -700:
            raise ValidationError("investment network is still singular after maintenance adjustment")
    return chi_adj, iota_adj


def _indices_for(labels: Sequence[str], wanted: Sequence[str]) -> tuple[int, ...]:
    idx = []
    norm = [lab.strip().lower() for lab in labels]
    for w in wanted:
        key = w.strip().lower()
        if key not in norm:
            raise ValidationError(f"industry label {w!r} not found")
        idx.append(norm.index(key))
    return tuple(idx)


def build_calibration(use: UseTable, networks: Sequence[InvestmentNetwork] | InvestmentNetwork,
                      depreciation, emissions: EmissionLevels,
                      config: CalibrationConfig | None = None) -> Calibration:
    """Compute every network-model share parameter from raw tables.

    ``depreciation`` is an array of per-year depreciation-rate vectors (or one
    vector); its column means are used. Investment-network column shares are
    averaged over all supplied years before the maintenance adjustment; the
    delivery matrix ``iota`` uses the ``config.target_year`` network (the last
    one if no year matches).
    """
    config = config or CalibrationConfig()
    if isinstance(networks, InvestmentNetwork):
        networks = [networks]
    networks = list(networks)
    use, _ = balance_use_table(use)
    n = use.n
    go = use.gross_output
    if np.any(go <= 0):
        raise ValidationError("every industry needs positive gross output")
    if np.any(use.labor_comp <= 0) or np.any(use.capital_comp <= 0):
        raise ValidationError("labor and capital compensation must be positive for every industry")

    Delta = use.intermediate / go[:, None]
    phi = use.household_final / go
    gamma = use.government_final / go

    target = [net for net in networks if net.year == config.target_year] or networks[-1:]
    flows = target[0].flows
    rows = flows.sum(axis=1)
    row_share = np.divide(flows, rows[:, None], out=np.zeros_like(flows), where=rows[:, None] > 0)
    orphan = np.flatnonzero((rows <= 0) & (use.investment_final > 0))
    row_share[orphan, orphan] = 1.0
    iota = (use.investment_final / go)[:, None] * row_share

    chi, iota = maintenance_adjustment(average_chi(networks), iota, config.maintenance_share)

    va = use.labor_comp + use.capital_comp
    alpha = use.labor_comp / va
    theta = va / go
    omega = _normalise_columns(use.intermediate)
    lam = use.labor_comp / use.labor_comp.sum()
    if use.household_final.sum() <= 0:
        raise ValidationError("household final demand is zero")
    beta_cons = use.household_final / use.household_final.sum()

    dep = np.atleast_2d(np.asarray(depreciation, dtype=float))
    if dep.shape[1] != n:
        raise ValidationError(f"depreciation has {dep.shape[1]} industries, expected {n}")
    delta_dep = np.nanmean(dep, axis=0)

    if len(emissions.industry) != n:
        raise ValidationError("industry emissions length mismatch")
    eps_ind, eps_hh, eps_govt = emissions.shares()

    weapon = _indices_for(use.labels, config.weapon_labels)
    energy = _indices_for(use.labels, config.energy_labels)
    gdp = use.final_demand().sum()
    S_P = config.S_P if config.S_P is not None else use.government_final[list(weapon)].sum() / gdp
    S_E = config.S_E if config.S_E is not None else use.government_final[list(energy)].sum() / gdp

    calib = Calibration(
        Delta=Delta, iota=iota, phi=phi, gamma=gamma, lam=lam, omega=omega, chi=chi,
        alpha=alpha, theta=theta, delta_dep=delta_dep, beta_cons=beta_cons,
        eps_ind=eps_ind, eps_hh=float(eps_hh), eps_govt=float(eps_govt), gross_output=go.copy(),
        beta_disc=config.beta_disc, frisch=config.frisch, weapon_set=weapon, energy_set=energy,
        base_mil_share=config.base_mil_share, S_P=float(S_P), S_E=float(S_E), labels=use.labels,
    )
    return calib.validate(tol=1e-8)


def synthesize_use_table(calib: Calibration) -> tuple[UseTable, InvestmentNetwork]:
    """Rebuild a use table and target-year investment network from shares."""
    go = calib.gross_output
    theta_va = calib.theta * go
    use = UseTable(
        intermediate=calib.Delta * go[:, None],
        labor_comp=calib.alpha * theta_va,
        capital_comp=(1 - calib.alpha) * theta_va,
        household_final=calib.phi * go,
        government_final=calib.gamma * go,
        investment_final=calib.iota.sum(axis=1) * go,
        gross_output=go.copy(),
        labels=calib.labels,
    )
    return use, InvestmentNetwork(calib.iota * go[:, None], year=None)


# --------------------------------------------------------------------------
# CSV directory format


def aggregate_industries(use: UseTable, networks, depreciation, emissions: EmissionLevels,
                         mapping: Mapping[str, int], target_labels: Sequence[str] | None = None):
    """Contract source industries onto targets by summing flows.

    Depreciation rates are averaged with capital-compensation weights.
    """
    src_pos = {code: i for i, code in enumerate(use.codes)}
    missing = set(src_pos) - set(mapping)
    if missing:
        raise ValidationError(f"mapping lacks source codes {sorted(missing)[:5]}")
    m = max(mapping.values()) + 1
    P = np.zeros((use.n, m))
    for code, tgt in mapping.items():
        if code in src_pos:
            P[src_pos[code], tgt] = 1.0
    if np.any(P.sum(axis=0) == 0):
        raise ValidationError("some target industries receive no source industry")
    labels = tuple(target_labels) if target_labels else tuple(
        next(use.labels[i] for i in range(use.n) if P[i, t]) for t in range(m)
    )
    agg = UseTable(
        intermediate=P.T @ use.intermediate @ P,
        labor_comp=P.T @ use.labor_comp, capital_comp=P.T @ use.capital_comp,
        household_final=P.T @ use.household_final, government_final=P.T @ use.government_final,
        investment_final=P.T @ use.investment_final, gross_output=P.T @ use.gross_output,
        labels=labels, codes=tuple(str(t) for t in range(m)),
    )
    nets = [InvestmentNetwork(P.T @ net.flows @ P, net.year) for net in networks]
    dep = np.atleast_2d(depreciation)
    weights = P * use.capital_comp[:, None]
    dep_agg = dep @ weights / weights.sum(axis=0)
    em = EmissionLevels(P.T @ emissions.industry, emissions.household, emissions.government)
    return agg, nets, dep_agg, em


_CONFIG_TYPES = {
    "beta": ("beta_disc", float), "beta_disc": ("beta_disc", float), "frisch": ("frisch", float),
    "xi": ("frisch", float), "maintenance_share": ("maintenance_share", float),
    "target_year": ("target_year", int), "base_mil_share": ("base_mil_share", float),
    "S_P": ("S_P", float), "S_E": ("S_E", float),
    "weapon_labels": ("weapon_labels", lambda s: tuple(x.strip() for x in s.split(";") if x.strip())),
    "energy_labels": ("energy_labels", lambda s: tuple(x.strip() for x in s.split(";") if x.strip())),
}


def read_key_values(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def parse_config(values: Mapping[str, str]) -> CalibrationConfig:
    kwargs = {}
    for key, raw in values.items():
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"unknown calibration config key {key!r}")
        name, conv = _CONFIG_TYPES[key]
        try:
            kwargs[name] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return CalibrationConfig(**kwargs)


USE_VECTOR_COLUMNS = ("labor_comp", "capital_comp", "household_final", "government_final",
                      "investment_final", "gross_output")


def read_use_table(path) -> UseTable:
    df = pd.read_csv(path, dtype={"code": str})
    for col in ("code", "label", *USE_VECTOR_COLUMNS):
        if col not in df.columns:
            raise ValidationError(f"use table lacks column {col!r}")
    codes = tuple(df["code"].astype(str))
    missing = [c for c in codes if c not in df.columns]
    if missing:
        raise ValidationError(f"use table lacks intermediate columns {missing[:5]}")
    try:
        inter = df[list(codes)].to_numpy(dtype=float)
        vecs = {c: df[c].to_numpy(dtype=float) for c in USE_VECTOR_COLUMNS}
    except ValueError as exc:
        raise ValidationError(f"non-numeric cell in use table: {exc}") from exc
    return UseTable(intermediate=inter, labels=tuple(df["label"].astype(str)), codes=codes, **vecs)


def write_use_table(use: UseTable, path) -> None:
    df = pd.DataFrame(use.intermediate, columns=list(use.codes))
    df.insert(0, "label", use.labels)
    df.insert(0, "code", use.codes)
    for col in USE_VECTOR_COLUMNS:
        df[col] = getattr(use, col)
    df.to_csv(path, index=False, float_format="%.17g")


def read_square(path, codes: Sequence[str]) -> np.ndarray:
    df = pd.read_csv(path, index_col=0, dtype={0: str})
    df.index = df.index.astype(str)
    try:
        return df.loc[list(codes), list(codes)].to_numpy(dtype=float)
    except KeyError as exc:
        raise ValidationError(f"{path}: industry codes do not match the use table") from exc


def load_calibration_inputs(directory):
    """Read the raw calibration CSVs from ``directory``.

    Returns ``(use, networks, depreciation, emissions, config)``; a
    ``mapping.csv`` file triggers aggregation onto the target partition.
    """
    d = Path(directory)
    use = read_use_table(d / "use_table.csv")
    networks = []
    for p in sorted(d.glob("investment_network_*.csv")):
        m = re.search(r"(\d{4})", p.stem)
        networks.append(InvestmentNetwork(read_square(p, use.codes), int(m.group(1)) if m else None))
    if not networks:
        raise ValidationError(f"no investment_network_YYYY.csv files in {d}")
    dep_df = pd.read_csv(d / "depreciation.csv")
    dep_df.columns = [str(c) for c in dep_df.columns]
    depreciation = dep_df[list(use.codes)].to_numpy(dtype=float)
    em_df = pd.read_csv(d / "emissions_shares.csv", dtype={"industry": str})
    levels = dict(zip(em_df["industry"].astype(str), em_df["level"].astype(float)))
    try:
        emissions = EmissionLevels(
            np.array([levels[c] for c in use.codes]), levels["HOUSEHOLD"], levels["GOVERNMENT"]
        )
    except KeyError as exc:
        raise ValidationError(f"emissions_shares.csv lacks entry {exc}") from exc
    cfg_path = d / "calibration.cfg"
    config = parse_config(read_key_values(cfg_path)) if cfg_path.exists() else CalibrationConfig()
    map_path = d / "mapping.csv"
    if map_path.exists():
        mp = pd.read_csv(map_path, dtype={"source_code": str})
        mapping = dict(zip(mp["source_code"], mp["target_index"].astype(int)))
        tl = None
        if "target_label" in mp.columns:
            tl = mp.drop_duplicates("target_index").sort_values("target_index")["target_label"].tolist()
        use, networks, depreciation, emissions = aggregate_industries(
            use, networks, depreciation, emissions, mapping, tl)
    return use, networks, depreciation, emissions, config


def load_calibration(directory) -> Calibration:
    """Load ``calibration.json`` if present, otherwise build from raw CSVs."""
    d = Path(directory)
    if d.is_file():
        return Calibration.from_json(d)
    if (d / "calibration.json").exists():
        return Calibration.from_json(d / "calibration.json")
    use, networks, dep, em, config = load_calibration_inputs(d)
    return build_calibration(use, networks, dep, em, config)


def write_calibration_inputs(directory, use: UseTable, networks: Sequence[InvestmentNetwork],
                             depreciation, dep_years: Sequence[int], emissions: EmissionLevels,
                             config_lines: Mapping[str, str] | None = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_use_table(use, d / "use_table.csv")
    for net in networks:
        pd.DataFrame(net.flows, index=list(use.codes), columns=list(use.codes)).to_csv(
            d / f"investment_network_{net.year}.csv", float_format="%.17g")
    dep = pd.DataFrame(np.atleast_2d(depreciation), columns=list(use.codes))
    dep.insert(0, "year", list(dep_years))
    dep.to_csv(d / "depreciation.csv", index=False, float_format="%.17g")
    em = pd.DataFrame({"industry": [*use.codes, "HOUSEHOLD", "GOVERNMENT"],
                       "level": [*emissions.industry, emissions.household, emissions.government]})
    em.to_csv(d / "emissions_shares.csv", index=False, float_format="%.17g")
    if config_lines:
        (d / "calibration.cfg").write_text(
            "".join(f"{k} = {v}\n" for k, v in config_lines.items()), encoding="utf-8")


_ = field  # re-exported for dataclass users
