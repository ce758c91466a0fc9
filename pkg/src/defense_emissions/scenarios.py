"""Military-buildup scenarios, emissions reports and climate-damage arithmetic."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .calibration import Calibration, read_key_values
from .exceptions import ConfigError, ValidationError
from .network import GovernmentPath

PRESETS = {
    "baseline": (0.3, 0.05),
    "personnel": (0.2, 0.02),
    "material": (0.4, 0.1),
}
KOREAN_WAR_PEAK_PP = 13.9
DEFAULT_RHO = 0.86


def korean_war_E(base_mil_share: float) -> float:
    """Increase in p.p. that lifts the military share to its Korean War peak."""
    return KOREAN_WAR_PEAK_PP - 100 * base_mil_share


def doubling_E(base_mil_share: float) -> float:
    return 100 * base_mil_share


def _multiplier(S: float, s: float, E: float, what: str) -> float:
    if not S > 0:
        raise ValidationError(f"base {what} share must be positive to scale it")
    return (S + s * E) / S


def procurement_multiplier(S_P: float, s_P: float, E: float) -> float:
    """``(S_P + s_P E) / S_P`` with ``E`` as a fraction of GDP."""
    return _multiplier(S_P, s_P, E, "procurement")


def energy_multiplier(S_E: float, s_E: float, E: float) -> float:
    """Energy/fuel analogue of :func:`procurement_multiplier`."""
    return _multiplier(S_E, s_E, E, "energy")


@dataclass(frozen=True)
class ScenarioSpec:
    """A military-spending shock.

    ``E_pp`` is in percentage points of GDP. ``S_P``/``S_E`` default to the
    calibration's base shares when left as ``None``.
    """

    E_pp: float = 1.0
    s_P: float = 0.3
    s_E: float = 0.05
    rho: float = 1.0
    t0: int = 0
    S_P: float | None = None
    S_E: float | None = None
    base_mil_share: float | None = None
    label: str = "baseline"

    def __post_init__(self):
        if self.label in PRESETS and (self.s_P, self.s_E) != PRESETS[self.label]:
            raise ValidationError(f"preset {self.label!r} pins (s_P, s_E) = {PRESETS[self.label]}")
        if self.label not in (*PRESETS, "custom"):
            raise ValidationError(f"unknown scenario label {self.label!r}")
        if self.s_P < 0 or self.s_E < 0 or self.s_P + self.s_E > 1 + 1e-12:
            raise ValidationError("need s_P, s_E >= 0 and s_P + s_E <= 1")
        if not 0 < self.rho <= 1:
            raise ValidationError("rho must lie in (0, 1]")
        if self.t0 < 0:
            raise ValidationError("t0 must be non-negative")
        if self.base_mil_share is not None and self.E_pp <= -100 * self.base_mil_share:
            raise ValidationError("shock would make the military share non-positive")

    @classmethod
    def preset(cls, label: str, E_pp: float = 1.0, **kwargs) -> "ScenarioSpec":
        if label not in PRESETS:
            raise ValidationError(f"unknown preset {label!r}")
        s_P, s_E = PRESETS[label]
        return cls(E_pp=E_pp, s_P=s_P, s_E=s_E, label=label, **kwargs)

    def resolved(self, calib: Calibration) -> "ScenarioSpec":
        """Fill base shares from ``calib`` and recheck the share bound."""
        out = replace(
            self,
            S_P=calib.S_P if self.S_P is None else self.S_P,
            S_E=calib.S_E if self.S_E is None else self.S_E,
            base_mil_share=calib.base_mil_share if self.base_mil_share is None else self.base_mil_share,
        )
        if out.E_pp <= -100 * out.base_mil_share:
            raise ValidationError("shock would make the military share non-positive")
        return out

    def multipliers(self, calib: Calibration) -> tuple[float, float]:
        r = self.resolved(calib)
        E = r.E_pp / 100
        # a zero base share is only fatal if that component is actually shocked
        PM = 1.0 if r.S_P <= 0 and r.s_P * E == 0 else procurement_multiplier(r.S_P, r.s_P, E)
        EM = 1.0 if r.S_E <= 0 and r.s_E * E == 0 else energy_multiplier(r.S_E, r.s_E, E)
        if (r.s_P > 0 and E != 0 and not calib.weapon_set) or (r.s_E > 0 and E != 0 and not calib.energy_set):
            raise ValidationError("scenario shocks an industry set that the calibration leaves empty")
        return PM, EM


@dataclass(frozen=True)
class DamageSpec:
    scc: float
    base_emissions: float
    base_gdp: float

    def __post_init__(self):
        if not (self.scc > 0 and self.base_emissions > 0 and self.base_gdp > 0):
            raise ValidationError("scc, base_emissions and base_gdp must be positive")


def steady_g_hat(scenario: ScenarioSpec, calib: Calibration, *, weapon: bool = True,
                 energy: bool = True) -> np.ndarray:
    PM, EM = scenario.multipliers(calib)
    G = np.ones(calib.n)
    if weapon:
        G[list(calib.weapon_set)] = PM
    if energy:
        G[list(calib.energy_set)] = EM
    if np.any(G <= 0):
        raise ValidationError("scenario drives government purchases non-positive")
    return G


def government_path(scenario: ScenarioSpec, calib: Calibration, T: int) -> GovernmentPath:
    """``G_it = 1 + rho**(t - t0) (M - 1)`` on shocked industries from ``t0`` on."""
    if T < 0:
        raise ValidationError("T must be non-negative")
    PM, EM = scenario.multipliers(calib)
    t = np.arange(T + 1)
    decay = np.where(t >= scenario.t0, scenario.rho ** np.maximum(t - scenario.t0, 0), 0.0)
    values = np.ones((T + 1, calib.n))
    values[:, list(calib.weapon_set)] = (1 + decay * (PM - 1))[:, None]
    values[:, list(calib.energy_set)] = (1 + decay * (EM - 1))[:, None]
    return GovernmentPath(values)


def scc_damages(delta_emissions_pct: float, spec: DamageSpec) -> tuple[float, float]:
    """Annual damages and their percent of base GDP for an emissions change."""
    damages = spec.base_emissions * delta_emissions_pct / 100 * spec.scc
    return damages, 100 * damages / spec.base_gdp


def emissions_report(solution, scenario: ScenarioSpec, calib: Calibration,
                     damages: DamageSpec | None = None) -> dict:
    """Headline responses, their log decomposition and optional damages.

    For a transition the headline numbers are the impact period.
    """
    from .solvers import SteadySolution, industry_report

    if isinstance(solution, SteadySolution):
        E, Y, I = solution.E_hat, solution.Y_hat, solution.intensity_hat
        kind = "steady_state"
    else:
        E, Y, I = (float(x[0]) for x in (solution.E_hat, solution.Y_hat, solution.intensity_hat))
        kind = "transition_impact"
    lnE, lnY, lnI = np.log(E), np.log(Y), np.log(I)
    PM, EM = scenario.multipliers(calib)
    report = {
        "kind": kind,
        "scenario": {"E_pp": scenario.E_pp, "s_P": scenario.s_P, "s_E": scenario.s_E,
                     "rho": scenario.rho, "label": scenario.label, "PM": PM, "EM": EM},
        "E_hat": E, "Y_hat": Y, "intensity_hat": I,
        "emissions_pct": 100 * (E - 1), "real_gdp_pct": 100 * (Y - 1), "intensity_pct": 100 * (I - 1),
        "decomposition": {"ln_E": lnE, "ln_Y": lnY, "ln_intensity": lnI, "gap": lnE - lnY - lnI,
                          "intensity_share": (lnI / lnE) if lnE != 0 else None},
        "industries": industry_report(solution, calib).to_dict(orient="records"),
    }
    if damages is not None:
        dollars, share = scc_damages(report["emissions_pct"], damages)
        report["damages"] = {
            "per_year": dollars, "percent_of_gdp": share, "scc": damages.scc,
            "note": "steady-state annual flow; transition path not integrated",
        }
    return report


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive of ``stop``) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            k = int(np.floor((stop - start) / step + 1e-9))
            return np.round(start + step * np.arange(k + 1), 12)
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:step") from exc


def sweep(calib: Calibration, grid: Iterable[float], presets: Iterable[str] = tuple(PRESETS),
          threads: int = 1) -> pd.DataFrame:
    """Permanent-shock steady states over a grid of shock sizes and presets."""
    from .solvers import solve_steady

    jobs = [(label, float(E)) for label in presets for E in grid]

    def run(job):
        label, E = job
        sol = solve_steady(calib, steady_g_hat(ScenarioSpec.preset(label, E), calib))
        return {"preset": label, "E_pp": E, "emissions_pct": 100 * (sol.E_hat - 1),
                "intensity_pct": 100 * (sol.intensity_hat - 1), "real_gdp_pct": 100 * (sol.Y_hat - 1)}

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    return pd.DataFrame(rows)


_SCENARIO_KEYS = {"E_pp", "preset", "s_P", "s_E", "rho", "t0", "S_P", "S_E", "base_mil_share",
                  "scc", "base_emissions_t", "base_gdp"}


def parse_scenario(values: Mapping[str, str], calib: Calibration | None = None):
    """Build ``(ScenarioSpec, DamageSpec | None)`` from key-value pairs.

    ``E_pp`` also accepts ``doubling`` and ``korean_war``.
    """
    unknown = set(values) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys {sorted(unknown)}")

    def num(key, default=None, conv=float):
        if key not in values:
            return default
        try:
            return conv(values[key])
        except ValueError as exc:
            raise ConfigError(f"scenario key {key}: bad value {values[key]!r}") from exc

    base = num("base_mil_share", calib.base_mil_share if calib is not None else 0.033)
    raw_E = values.get("E_pp", "1")
    if raw_E == "doubling":
        E = doubling_E(base)
    elif raw_E == "korean_war":
        E = korean_war_E(base)
    else:
        E = num("E_pp", 1.0)
    label = values.get("preset", "baseline")
    if label in PRESETS:
        s_P, s_E = PRESETS[label]
        if ("s_P" in values and num("s_P") != s_P) or ("s_E" in values and num("s_E") != s_E):
            raise ConfigError(f"preset {label!r} fixes s_P={s_P}, s_E={s_E}")
    elif label == "custom":
        s_P, s_E = num("s_P", 0.3), num("s_E", 0.05)
    else:
        raise ConfigError(f"unknown preset {label!r}")
    try:
        scenario = ScenarioSpec(E_pp=E, s_P=s_P, s_E=s_E, rho=num("rho", 1.0), t0=num("t0", 0, int),
                                S_P=num("S_P"), S_E=num("S_E"), base_mil_share=base, label=label)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    damage_keys = ("scc", "base_emissions_t", "base_gdp")
    present = [k for k in damage_keys if k in values]
    if present and len(present) < 3:
        raise ConfigError(f"damage spec needs all of {damage_keys}")
    damages = DamageSpec(num("scc"), num("base_emissions_t"), num("base_gdp")) if present else None
    return scenario, damages


def load_scenario(path, calib: Calibration | None = None):
    if not Path(path).exists():
        raise ConfigError(f"scenario file {path} not found")
    return parse_scenario(read_key_values(path), calib)
