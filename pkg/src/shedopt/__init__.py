"""Economically optimal adequacy assessment for renewable energy systems.

Builds a capacity-expansion/dispatch LP in which load shedding is priced
at the sectoral Value of Lost Load, solves it with a bundled revised
simplex, and derives reliability metrics, stabilization deltas and VoLL
sensitivity sweeps from the optimum.
"""

__version__ = "0.1.0"

from .model import (Scenario, ScenarioError, Violation, load_scenario,
                    save_scenario, validate)
from .voll import (AdequacyConfig, SECTOR_VOLL_BASIS_2020, VollRecord,
                   lole_opt, project_voll, sectoral_volls, voll_from_gva)
from .lp import BuildError, LinearProgram, VariableCatalog, build, cost_split
from .simplex import (CheckReport, Solution, SolveOptions, check_solution,
                      duality_gap, solve)
from .analytics import (AdequacyReport, DispatchResult, OutageEvent,
                        binding_limit_diagnosis, build_report, detect_events,
                        depth_exceedance, lole_hours, loss_share,
                        lull_export_table, residual_load)
from .experiments import (StabilizationReport, SweepRecord, classify_voll,
                          stabilize, voll_sweep)

__all__ = [
    "Scenario", "ScenarioError", "Violation", "load_scenario",
    "save_scenario", "validate",
    "AdequacyConfig", "SECTOR_VOLL_BASIS_2020", "VollRecord", "lole_opt",
    "project_voll", "sectoral_volls", "voll_from_gva",
    "BuildError", "LinearProgram", "VariableCatalog", "build", "cost_split",
    "CheckReport", "Solution", "SolveOptions", "check_solution",
    "duality_gap", "solve",
    "AdequacyReport", "DispatchResult", "OutageEvent",
    "binding_limit_diagnosis", "build_report", "detect_events",
    "depth_exceedance", "lole_hours", "loss_share", "lull_export_table",
    "residual_load",
    "StabilizationReport", "SweepRecord", "classify_voll", "stabilize",
    "voll_sweep",
    "__version__",
]
