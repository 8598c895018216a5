"""Element indicators, exact error norms and effectiveness ratios."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .assembly import apply_M, apply_Minv, frob
from .manufactured import ExactSolution, ExactSolutionUnavailable
from .mesh import BoundaryLabel
from .quadrature import edge_rule, integrate_elements


@dataclass(frozen=True)
class IndicatorField:
    """Nonnegative per-triangle values; ``total`` is their l2 norm."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("indicators must be finite and nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def total(self):
        return float(math.sqrt(np.sum(self.values ** 2)))

    def __len__(self):
        return len(self.values)


def _sqrt_field(sq):
    return IndicatorField(np.sqrt(np.maximum(sq, 0.0)))


def bary_at(mesh, tris, x):
    """Barycentric coordinates of points ``x`` (n, nq, 2) in triangles ``tris``."""
    p = mesh.vertices[mesh.triangles[tris]]
    c = p.mean(axis=1)
    g = mesh.grad_lambda[tris]                                  # (n, 3, 2)
    return 1.0 / 3.0 + np.einsum("nkd,nqd->nqk", g, x - c[:, None])


# ------------------------------------------------------------------ jumps
def jump_edges(mesh):
    """Edges of the jump set: interior edges and clamped boundary edges."""
    lab = mesh.edge_labels
    return np.flatnonzero((lab == BoundaryLabel.INTERIOR) | (lab == BoundaryLabel.CLAMPED))


def normal_jump_sq(mesh, u_star, edges=None, npoints=3):
    """``h_e^{-1} ||[[d_n u]]||_e^2`` per edge for a continuous P2 field.

    Interior edges use the difference of the two one-sided normal
    derivatives; boundary edges use the trace itself.
    """
    if edges is None:
        edges = jump_edges(mesh)
    edges = np.asarray(edges, dtype=np.int64)
    out = np.zeros(len(edges))
    if edges.size == 0:
        return out
    s, w = edge_rule(npoints)
    a = mesh.vertices[mesh.edges[edges, 0]]
    b = mesh.vertices[mesh.edges[edges, 1]]
    x = a[:, None] + s[None, :, None] * (b - a)[:, None]       # (n, nq, 2)
    n = mesh.edge_normals[edges]
    et = mesh.edge_tris[edges]
    jump = np.zeros((len(edges), len(s)))
    for side, sign in ((0, 1.0), (1, -1.0)):
        has = et[:, side] >= 0
        if not np.any(has):
            continue
        tris = et[has, side]
        G = _gradients_at(u_star, tris, bary_at(mesh, tris, x[has]))
        jump[has] += sign * np.einsum("nqd,nd->nq", G, n[has])
    # h_e^{-1} * h_e * sum w q^2
    return (jump ** 2) @ w


def _gradients_at(field, tris, bary):
    """Gradients of a P1/P2 field at per-triangle barycentric points (n, nq, 3)."""
    g = field.mesh.grad_lambda[tris]                            # (n, 3, 2)
    coef = field.local_coefficients()[tris]
    L = bary
    if field.degree == 1:
        G = np.einsum("nkd,nk->nd", g, coef)
        return np.broadcast_to(G[:, None], L.shape[:2] + (2,)).copy()
    gv = (4.0 * L - 1.0)[..., None] * g[:, None]                # (n, nq, 3, 2)
    pairs = ((1, 2), (2, 0), (0, 1))
    ge = np.stack([4.0 * (L[..., i, None] * g[:, None, j] + L[..., j, None] * g[:, None, i])
                   for i, j in pairs], axis=2)
    G = np.concatenate([gv, ge], axis=2)                        # (n, nq, 6, 2)
    return np.einsum("nqld,nl->nqd", G, coef)


def _per_triangle_jumps(mesh, u_star, npoints=3):
    """Sum over the jump-set edges of each triangle, each edge counted in full."""
    edges = jump_edges(mesh)
    j = normal_jump_sq(mesh, u_star, edges, npoints)
    out = np.zeros(mesh.n_triangles)
    et = mesh.edge_tris[edges]
    for side in (0, 1):
        has = et[:, side] >= 0
        np.add.at(out, et[has, side], j[has])
    return out


# -------------------------------------------------------------- indicators
def eta_indicator(mesh, sigma_h, u_h_star, f, mat, quad_degree=6, special=None,
                  special_degree=10):
    """Residual-type indicator built on the postprocessed deflection."""
    if f is None:
        raise ExactSolutionUnavailable("eta needs the load f")
    if u_h_star.degree != 2:
        raise ValueError("eta expects the degree-2 postprocessed deflection")
    S = sigma_h.element_tensors()
    tris = np.arange(mesh.n_triangles)
    D = apply_Minv(S, mat) - u_h_star.hessians(tris)
    vol = mesh.area * frob(D, D)
    fsq = integrate_elements(mesh, lambda t, b, x: np.asarray(f(x), float) ** 2, quad_degree,
                             special, special_degree)
    return _sqrt_field(vol + mesh.h_T ** 4 * fsq + _per_triangle_jumps(mesh, u_h_star))


def zeta_indicator(mesh, sigma_h, sigma_h_star, u_h, u_h_star, quad_degree=4):
    """``||sigma_h - sigma_h^*||_T^2 + ||grad(u_h - u_h^*)||_T^2`` per triangle, square-rooted."""
    S = sigma_h.element_tensors()

    def moment(t, b, x):
        d = S[t][:, None] - sigma_h_star.values(t, b)
        return frob(d, d)

    def grad(t, b, x):
        d = u_h.gradients(t, b) - u_h_star.gradients(t, b)
        return np.sum(d * d, axis=-1)

    deg = max(int(quad_degree), 2)
    return _sqrt_field(integrate_elements(mesh, moment, deg) + integrate_elements(mesh, grad, deg))


# ------------------------------------------------------------ exact errors
def _exact_moment(exact, mat):
    if isinstance(exact, ExactSolution):
        hess = exact.require("hess_u")
        return lambda t, b, x: apply_M(hess(x), mat)
    if hasattr(exact, "values"):
        return lambda t, b, x: exact.values(t, b)
    raise TypeError("exact must be an ExactSolution or a field with .values")


def error_moment_L2_local(mesh, exact, field, mat, quad_degree=6, special=None, special_degree=10):
    ref = _exact_moment(exact, mat)

    def integrand(t, b, x):
        d = ref(t, b, x) - field.values(t, b)
        return frob(d, d)

    return integrate_elements(mesh, integrand, quad_degree, special, special_degree)


def error_moment_L2(mesh, exact, field, mat, quad_degree=6, special=None, special_degree=10):
    """``||M hess u - field||`` or, with a discrete field as ``exact``, their distance."""
    return float(math.sqrt(error_moment_L2_local(mesh, exact, field, mat, quad_degree,
                                                 special, special_degree).sum()))


def error_u_2h_local(mesh, exact, u_h_star, quad_degree=6, special=None, special_degree=10):
    """Volume part per triangle and jump part per edge of ``||u - u_h^*||_{2,h}^2``."""
    hess = exact.require("hess_u")
    H = u_h_star.hessians(np.arange(mesh.n_triangles))

    def integrand(t, b, x):
        d = hess(x) - H[t][:, None]
        return frob(d, d)

    vol = integrate_elements(mesh, integrand, quad_degree, special, special_degree)
    return vol, normal_jump_sq(mesh, u_h_star)


def error_u_2h(mesh, exact, u_h_star, quad_degree=6, special=None, special_degree=10):
    vol, jmp = error_u_2h_local(mesh, exact, u_h_star, quad_degree, special, special_degree)
    return float(math.sqrt(vol.sum() + jmp.sum()))


def error_u_H1_local(mesh, exact, field, quad_degree=6, special=None, special_degree=10):
    grad = exact.require("grad_u")

    def integrand(t, b, x):
        d = grad(x) - field.gradients(t, b)
        return np.sum(d * d, axis=-1)

    return integrate_elements(mesh, integrand, quad_degree, special, special_degree)


def error_u_H1(mesh, exact, field, quad_degree=6, special=None, special_degree=10):
    """``|u - field|_1`` over the broken gradient."""
    return float(math.sqrt(error_u_H1_local(mesh, exact, field, quad_degree,
                                            special, special_degree).sum()))


def data_oscillation(mesh, f, r=1, quad_degree=6, special=None, special_degree=10):
    """``||h_T^2 (f - Q f)||`` with Q the projection onto piecewise P_{r-3}."""
    if f is None:
        return 0.0
    if r <= 2:
        sq = integrate_elements(mesh, lambda t, b, x: np.asarray(f(x), float) ** 2, quad_degree,
                                special, special_degree)
        return float(math.sqrt(np.sum(mesh.h_T ** 4 * sq)))
    if r == 3:
        mean = integrate_elements(mesh, lambda t, b, x: np.asarray(f(x), float), quad_degree,
                                  special, special_degree) / mesh.area
        sq = integrate_elements(mesh, lambda t, b, x: (np.asarray(f(x), float) - mean[t][:, None]) ** 2,
                                quad_degree, special, special_degree)
        return float(math.sqrt(np.sum(mesh.h_T ** 4 * sq)))
    raise NotImplementedError("projections beyond piecewise constants are not provided")


# ---------------------------------------------------------------- reports
@dataclass
class ErrorReport:
    """Error norms, estimator totals and their ratios for one mesh.

    Entries that need the exact solution are None when it is unavailable.
    """

    moment_L2: Optional[float] = None
    u_2h: Optional[float] = None
    u_H1: Optional[float] = None
    ustar_H1: Optional[float] = None
    pih_closeness: Optional[float] = None
    rh_error: Optional[float] = None
    kh_error: Optional[float] = None
    E_h: Optional[float] = None
    e_h: Optional[float] = None
    eta_total: Optional[float] = None
    zeta_total: Optional[float] = None
    eff_eta: Optional[float] = None
    eff_zeta: Optional[float] = None
    oscillation: Optional[float] = None

    def as_dict(self):
        return asdict(self)


def _ratio(a, b):
    if a is None or b is None or b == 0:
        return None
    return a / b


def error_report(mesh, exact, mat, sigma_h, u_h, u_h_star, rh=None, kh=None, eta=None, zeta=None,
                 quad_degree=6, special=None, special_degree=10):
    """Collect every norm of the report that the inputs allow."""
    from .spaces import interpolate_Pih
    kw = dict(quad_degree=quad_degree, special=special, special_degree=special_degree)
    rep = ErrorReport(
        eta_total=None if eta is None else eta.total,
        zeta_total=None if zeta is None else zeta.total,
        oscillation=data_oscillation(mesh, exact.f, 1, **kw) if exact is not None else None,
    )
    if exact is None or not exact.has_solution:
        return rep
    rep.moment_L2 = error_moment_L2(mesh, exact, sigma_h, mat, **kw)
    rep.u_2h = error_u_2h(mesh, exact, u_h_star, **kw)
    rep.u_H1 = error_u_H1(mesh, exact, u_h, **kw)
    rep.ustar_H1 = error_u_H1(mesh, exact, u_h_star, **kw)
    hess = exact.hess_u
    pih = interpolate_Pih(mesh, lambda x: apply_M(hess(x), mat), quad_degree=max(quad_degree, 5))
    rep.pih_closeness = error_moment_L2(mesh, pih, sigma_h, mat, quad_degree=2)
    if rh is not None:
        rep.rh_error = error_moment_L2(mesh, exact, rh, mat, **kw)
    if kh is not None:
        rep.kh_error = error_moment_L2(mesh, exact, kh, mat, **kw)
    rep.E_h = math.hypot(rep.moment_L2, rep.u_2h)
    rep.e_h = math.hypot(rep.moment_L2, rep.u_H1)
    rep.eff_eta = _ratio(rep.E_h, rep.eta_total)
    rep.eff_zeta = _ratio(rep.e_h, rep.zeta_total)
    return rep
