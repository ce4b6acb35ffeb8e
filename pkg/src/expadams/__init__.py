"""Exponential Adams-Bashforth integrators with diagonal stabilizers."""

from .classical import NewtonConfig, ab_step, bdf_step, rk4_step
from .core import (BracketError, Family, HistoryWindow, Sample, SchemeSpec, SolverFailure,
                   SplitSystem, StepOverflow, consistency_check, make_sample)
from .eab import bootstrap, eab_step, g_values, gamma_coeffs
from .harness import (ErrorReport, RunRecord, convergence_study, critical_time_step, error_metric,
                      integrate, project_cubic, reference_solution)
from .ieab import ieab_step
from .phi import phi_array, phi_diag, phi_upto
from .stability import (GridSpec, StabilityQuery, compute_beta3, find_theta_thresholds,
                        positivity_check_eab2, positivity_check_eab3, rho, scan_a0,
                        stability_grid, stability_poly_coeffs)

__all__ = [
    "BracketError", "ErrorReport", "Family", "GridSpec", "HistoryWindow", "NewtonConfig", "RunRecord",
    "Sample", "SchemeSpec", "SolverFailure", "SplitSystem", "StabilityQuery", "StepOverflow",
    "ab_step", "bdf_step", "bootstrap", "compute_beta3", "consistency_check", "convergence_study",
    "critical_time_step", "eab_step", "error_metric", "find_theta_thresholds", "g_values",
    "gamma_coeffs", "ieab_step", "integrate", "make_sample", "phi_array", "phi_diag", "phi_upto",
    "positivity_check_eab2", "positivity_check_eab3", "project_cubic", "reference_solution", "rho",
    "rk4_step", "scan_a0", "stability_grid", "stability_poly_coeffs",
]
