"""Military spending shocks, their emissions footprint, and a production-network model of buildups."""
from .calibration import Calibration, CalibrationConfig, UseTable, build_calibration, load_calibration
from .exceptions import ConfigError, ConvergenceError, DefenseEmissionsError, DegenerateRegressorError, ValidationError
from .local_projections import LpSpec, PanelLocalProjection, SplitPanelLocalProjection, estimate_lp, split_lp
from .network import GovernmentPath, HatState, emissions_hat, real_gdp_hat, steady_residuals
from .panel_data import PanelDataset, SpendingTransformer, load_panel
from .scenarios import DamageSpec, ScenarioSpec, government_path, scc_damages
from .shocks import HamiltonFilter, extract_shocks, hamilton_shocks
from .solvers import solve_steady, solve_transition

__all__ = [
    "Calibration", "CalibrationConfig", "UseTable", "build_calibration", "load_calibration",
    "ConfigError", "ConvergenceError", "DefenseEmissionsError", "DegenerateRegressorError", "ValidationError",
    "LpSpec", "PanelLocalProjection", "SplitPanelLocalProjection", "estimate_lp", "split_lp",
    "GovernmentPath", "HatState", "emissions_hat", "real_gdp_hat", "steady_residuals",
    "PanelDataset", "SpendingTransformer", "load_panel",
    "DamageSpec", "ScenarioSpec", "government_path", "scc_damages",
    "HamiltonFilter", "extract_shocks", "hamilton_shocks",
    "solve_steady", "solve_transition",
]
__version__ = "0.1.0"
