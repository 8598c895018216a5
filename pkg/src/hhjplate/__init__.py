"""Lowest-order Hellan-Herrmann-Johnson plate bending with a posteriori error estimation.

Modules: ``mesh`` (triangulations, newest vertex bisection), ``spaces``
(discrete moment, deflection and bubble spaces), ``assembly`` (forms and
saddle-point solve), ``postprocess`` (u_h^*, R_h, K_h), ``estimators``
(eta, zeta, exact errors), ``manufactured`` (benchmark problems),
``adaptivity`` (Dorfler marking and the AFEM loop), ``io`` and ``cli``.
"""
from .assembly import MaterialParams, SolverError, solve_plate
from .adaptivity import AfemConfig, ConvergenceRecord, afem_loop, fit_order, mark_dorfler
from .estimators import ErrorReport, IndicatorField, eta_indicator, zeta_indicator
from .manufactured import ExactSolution, get_problem, problem1, problem2, problem3
from .mesh import BoundaryLabel, Mesh, MeshError, build_domain, refine_nvb, refine_uniform
from .postprocess import RecoveryError, build_uhstar, recover_Kh, recover_Rh

__version__ = "0.1.0"

__all__ = [
    "AfemConfig", "BoundaryLabel", "ConvergenceRecord", "ErrorReport", "ExactSolution",
    "IndicatorField", "MaterialParams", "Mesh", "MeshError", "RecoveryError", "SolverError",
    "afem_loop", "build_domain", "build_uhstar", "eta_indicator", "fit_order", "get_problem",
    "mark_dorfler", "problem1", "problem2", "problem3", "recover_Kh", "recover_Rh",
    "refine_nvb", "refine_uniform", "solve_plate", "zeta_indicator",
]
