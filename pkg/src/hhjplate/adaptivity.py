"""Solve, estimate, mark, refine."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .assembly import corner_mask, solve_plate
from .estimators import ErrorReport, IndicatorField, error_report, eta_indicator, zeta_indicator
from .manufactured import ProblemSpec
from .mesh import refine_nvb, refine_uniform
from .postprocess import build_uhstar, recover_Kh, recover_Rh

log = logging.getLogger(__name__)


class AfemAborted(RuntimeError):
    """A loop stage failed; ``records`` holds the loops completed before it."""

    def __init__(self, message, records, cause=None):
        super().__init__(message)
        self.records = records
        self.cause = cause


@dataclass
class AfemConfig:
    problem: ProblemSpec
    estimator: str = "eta"
    theta: float = 0.6
    refine: str = "adaptive"
    max_loops: int = 10
    max_elements: Optional[int] = None
    solver_tol: float = 1e-9
    cg_tol: float = 1e-12
    quad_degree: int = 6
    special_degree: int = 10

    def __post_init__(self):
        if self.estimator not in ("eta", "zeta"):
            raise ValueError(f"estimator must be 'eta' or 'zeta', got {self.estimator!r}")
        if self.refine not in ("adaptive", "uniform"):
            raise ValueError(f"refine must be 'adaptive' or 'uniform', got {self.refine!r}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if int(self.max_loops) < 1:
            raise ValueError("max_loops must be at least 1")
        if self.max_elements is not None and int(self.max_elements) < 1:
            raise ValueError("max_elements must be positive")


@dataclass
class ConvergenceRecord:
    loop: int
    N: int
    dof_sigma: int
    dof_u: int
    h_max: float
    report: ErrorReport
    marked: int = 0
    mesh: object = field(default=None, repr=False)


def mark_dorfler(indicators, theta=0.6):
    """Shortest prefix of the descending sort carrying ``theta`` of the squared total.

    Ties are broken by ascending triangle index.  Returns a sorted index
    array, empty when all indicators vanish.
    """
    v = np.asarray(indicators.values if isinstance(indicators, IndicatorField) else indicators,
                   dtype=float)
    if np.any(v < 0):
        raise ValueError("indicators must be nonnegative")
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    sq = v ** 2
    total = sq.sum()
    if total == 0.0:
        return np.zeros(0, dtype=np.int64)
    if theta >= 1.0:
        # the whole support; avoids comparing a rounded cumsum against the total
        return np.flatnonzero(sq > 0)
    order = np.lexsort((np.arange(len(v)), -sq))
    csum = np.cumsum(sq[order])
    k = int(np.searchsorted(csum, theta * total)) + 1
    return np.sort(order[:min(k, len(v))])


def _stage(records, what, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except Exception as exc:
        raise AfemAborted(f"{what} failed after {len(records)} loops: {exc}", records, exc) from exc


def afem_loop(config, keep_meshes=False, on_record=None):
    """Run the loop; returns one :class:`ConvergenceRecord` per solve.

    Both estimators are evaluated every loop; ``config.estimator`` selects
    which one drives the marking.
    """
    prob = config.problem
    mat = prob.material
    mesh = prob.initial_mesh()
    exact = prob.exact
    records: List[ConvergenceRecord] = []
    for loop in range(int(config.max_loops)):
        special = corner_mask(mesh, prob.singular_point)
        kw = dict(quad_degree=config.quad_degree, special=special, special_degree=config.special_degree)
        spaces, _, sigma, u = _stage(records, "solve", solve_plate, mesh, mat, exact.f,
                                     tol=config.solver_tol, **kw)
        ustar = _stage(records, "bubble postprocessing", build_uhstar, mesh, spaces, sigma, u, mat,
                       cg_tol=config.cg_tol)
        rh = _stage(records, "R_h recovery", recover_Rh, mesh, sigma)
        kh = recover_Kh(mesh, sigma)
        eta = eta_indicator(mesh, sigma, ustar, exact.f, mat, **kw)
        zeta = zeta_indicator(mesh, sigma, rh, u, ustar)
        rep = error_report(mesh, exact, mat, sigma, u, ustar, rh, kh, eta, zeta, **kw)
        rec = ConvergenceRecord(loop, mesh.n_triangles, spaces.dim_sigma, spaces.dim_u,
                                _h_max(mesh),
                                rep, mesh=mesh if keep_meshes else None)
        records.append(rec)
        log.info("loop %d: N=%d eta=%.4e zeta=%.4e", loop, mesh.n_triangles, eta.total, zeta.total)
        if on_record is not None:
            on_record(rec, mesh)
        if loop + 1 >= config.max_loops:
            break
        if config.refine == "uniform":
            nxt = refine_uniform
            rec.marked = mesh.n_triangles
        else:
            marked = mark_dorfler(eta if config.estimator == "eta" else zeta, config.theta)
            rec.marked = len(marked)
            if len(marked) == 0:
                log.info("estimator vanished; stopping")
                break
            nxt = lambda m, marked=marked: refine_nvb(m, marked)
        if config.max_elements is not None and mesh.n_triangles >= config.max_elements:
            break
        mesh = _stage(records, "refinement", nxt, mesh)
        if config.max_elements is not None and mesh.n_triangles > config.max_elements:
            break
    return records


def _h_max(mesh):
    """Longest edge length."""
    return float(mesh.h_e.max())


QUANTITIES = ("moment_L2", "u_2h", "u_H1", "ustar_H1", "pih_closeness", "rh_error", "kh_error",
              "E_h", "e_h", "eta_total", "zeta_total", "oscillation")


def fit_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        raise ValueError("need at least two points to fit a slope")
    lx = np.log(x)
    if np.ptp(lx) < 1e-12:
        raise ValueError("abscissae coincide; the slope is undefined")
    return float(np.polyfit(lx, np.log(y), 1)[0])


def fit_order(records, quantity="E_h", x_mode="vs_N", skip=0):
    """Slope of ``log(quantity)`` against ``log h_max`` (vs_h) or ``log N`` (vs_N).

    The first ``skip`` records are dropped, as are records where the
    quantity is unavailable or zero.
    """
    if x_mode not in ("vs_h", "vs_N"):
        raise ValueError("x_mode must be 'vs_h' or 'vs_N'")
    xs, ys = [], []
    for r in list(records)[int(skip):]:
        y = getattr(r.report, quantity)
        if y is None or not y > 0:
            continue
        xs.append(r.h_max if x_mode == "vs_h" else r.N)
        ys.append(y)
    if len(xs) < 2:
        raise ValueError(f"need at least two usable points to fit an order of {quantity}")
    return fit_slope(xs, ys)
