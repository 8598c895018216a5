"""Material law, HHJ bilinear forms and the saddle-point solve."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .quadrature import integrate_elements, physical_points, triangle_rule, edge_rule

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """The discrete system could not be solved to the requested accuracy."""


@dataclass(frozen=True)
class MaterialParams:
    """``bending_factor`` is E d^3 / 12; ``nu`` the Poisson ratio."""

    bending_factor: float = 1.0
    nu: float = 0.3

    def __post_init__(self):
        if not self.bending_factor > 0:
            raise ValueError("bending_factor must be positive")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in [0, 0.5)")


def _trace_delta(tau):
    tr = tau[..., 0, 0] + tau[..., 1, 1]
    return tr[..., None, None] * np.eye(2)


def apply_M(tau, mat):
    tau = np.asarray(tau, dtype=float)
    c = mat.bending_factor / (1.0 - mat.nu ** 2)
    return c * ((1.0 - mat.nu) * tau + mat.nu * _trace_delta(tau))


def apply_Minv(tau, mat):
    tau = np.asarray(tau, dtype=float)
    return ((1.0 + mat.nu) * tau - mat.nu * _trace_delta(tau)) / mat.bending_factor


def frob(a, b):
    return np.sum(a * b, axis=(-2, -1))


# ------------------------------------------------------------------ assembly
def _element_basis(mesh):
    from .spaces import element_basis_tensors
    return element_basis_tensors(mesh)


def local_a(mesh, mat):
    S = _element_basis(mesh)                               # (nt, 3, 2, 2)
    MS = apply_Minv(S, mat)
    return mesh.area[:, None, None] * np.einsum("tiab,tjab->tij", MS, S)


def local_b(mesh):
    """``b_h`` of local moment DOF k against P1 hat i on each triangle, (nt, 3, 3).

    For P1 the volume term vanishes and the element boundary term reduces to
    ``h_k * grad(lambda_i) . n_k``.
    """
    hl = mesh.h_e[mesh.tri_edges]
    return np.einsum("tid,tkd->tik", mesh.grad_lambda, mesh.outward_normals) * hl[:, None, :]


def local_b_tangential(mesh):
    """Same entries through the alternative form ``-<tau_nt, d_t v>`` (div tau = 0)."""
    S = _element_basis(mesh)                               # basis tensors per local dof
    n = mesh.outward_normals
    t = np.stack([-n[..., 1], n[..., 0]], axis=-1)
    hl = mesh.h_e[mesh.tri_edges]
    # tau_nt of basis j on edge k: n_k^T S_j t_k
    tnt = np.einsum("tka,tjab,tkb->tjk", n, S, t)         # (nt, dof j, edge k)
    dtv = np.einsum("tid,tkd->tik", mesh.grad_lambda, t)  # (nt, hat i, edge k)
    return -np.einsum("tjk,tik,tk->tij", tnt, dtv, hl)


def _scatter(rows, cols, vals, shape):
    """COO assembly; duplicate summation order is fixed by the input order."""
    return sp.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=shape)


def assemble_a(mesh, spaces=None, mat=None):
    """``a(sigma, tau) = (M^{-1} sigma, tau)`` over all edges, (ne, ne)."""
    mat = mat or MaterialParams()
    te = mesh.tri_edges
    loc = local_a(mesh, mat)
    rows = np.repeat(te[:, :, None], 3, axis=2)
    cols = np.repeat(te[:, None, :], 3, axis=1)
    return _scatter(rows, cols, loc, (mesh.n_edges, mesh.n_edges))


def assemble_b(mesh, spaces=None, tangential=False):
    """``B[j, e] = b_h(tau_e, v_j)`` over all vertices and edges, (nv, ne)."""
    loc = local_b_tangential(mesh) if tangential else local_b(mesh)
    t, te = mesh.triangles, mesh.tri_edges
    rows = np.repeat(t[:, :, None], 3, axis=2)
    cols = np.repeat(te[:, None, :], 3, axis=1)
    return _scatter(rows, cols, loc, (mesh.n_vertices, mesh.n_edges))


def corner_mask(mesh, point):
    """Triangles having ``point`` as a vertex (None when no point is given)."""
    if point is None:
        return None
    hit = np.flatnonzero(np.all(np.abs(mesh.vertices - np.asarray(point)) < 1e-14, axis=1))
    if hit.size == 0:
        return None
    return np.any(np.isin(mesh.triangles, hit), axis=1)


def assemble_load(mesh, spaces, f, quad_degree=6, special=None, special_degree=10):
    """``(f, v_j)`` for every vertex hat function, length nv."""
    out = np.zeros(mesh.n_vertices)
    groups = [(np.arange(mesh.n_triangles), quad_degree)]
    if special is not None and np.any(special):
        groups = [(np.flatnonzero(~special), quad_degree), (np.flatnonzero(special), special_degree)]
    for tris, deg in groups:
        if tris.size == 0:
            continue
        rule = triangle_rule(deg)
        x, w = physical_points(mesh, rule, tris)
        fw = np.asarray(f(x), dtype=float) * w            # (nt, nq)
        loc = fw @ rule.points                             # (nt, 3)
        np.add.at(out, mesh.triangles[tris], loc)
    return out


def bh_smooth(mesh, edge_values, grad_v, hess_v, quad_degree=8, edge_points=6):
    """``b_h(tau_h, v)`` for a discrete moment and a smooth function ``v``.

    Volume term ``-(tau_h, hess v)`` plus element boundary terms
    ``<tau_nn, d_n v>`` with the outward normal of each triangle.
    """
    from .spaces import MomentField
    S = MomentField(mesh, edge_values).element_tensors()
    vol = integrate_elements(mesh, lambda tris, b, x: -frob(S[tris][:, None], hess_v(x)),
                             degree=quad_degree).sum()
    s, w = edge_rule(edge_points)
    p = mesh.vertices[mesh.triangles]
    total = vol
    vals = np.asarray(edge_values)[mesh.tri_edges]
    hl = mesh.h_e[mesh.tri_edges]
    for k in range(3):
        a, b = p[:, (k + 1) % 3], p[:, (k + 2) % 3]
        x = a[:, None] + s[None, :, None] * (b - a)[:, None]
        dn = np.einsum("tqd,td->tq", grad_v(x), mesh.outward_normals[:, k])
        total += np.sum(vals[:, k] * hl[:, k] * (dn @ w))
    return float(total)


# ------------------------------------------------------------------- solving
@dataclass
class SaddleSystem:
    """Free-DOF blocks of ``[[A, B^T], [B, 0]] [sigma; u] = [0; -load]``."""

    spaces: object
    A: sp.csr_matrix
    B: sp.csr_matrix
    load: np.ndarray

    @property
    def matrix(self):
        return sp.bmat([[self.A, self.B.T], [self.B, None]], format="csc")

    @property
    def rhs(self):
        return np.concatenate([np.zeros(self.A.shape[0]), -self.load])


def build_saddle_system(mesh, spaces, mat, f, quad_degree=6, special=None, special_degree=10):
    sd, ud = spaces.sigma_dofs, spaces.u_dofs
    A = assemble_a(mesh, spaces, mat)[sd][:, sd]
    B = assemble_b(mesh, spaces)[ud][:, sd]
    F = assemble_load(mesh, spaces, f, quad_degree, special, special_degree)[ud]
    return SaddleSystem(spaces, A.tocsr(), B.tocsr(), F)


def solve_saddle(system, tol=1e-9):
    """Direct sparse LU solve of the HHJ system.

    Returns ``(MomentField, DeflectionField)`` with constrained DOFs zero.
    Raises :class:`SolverError` on a singular factorization or when the
    residual max-norm exceeds ``tol * (1 + |load|_inf)``.
    """
    from .spaces import DeflectionField, MomentField
    sp_ = system.spaces
    mesh = sp_.mesh
    K = system.matrix
    rhs = system.rhs
    ns = system.A.shape[0]
    if not np.any(system.load):
        x = np.zeros(K.shape[0])
    else:
        try:
            lu = spla.splu(K, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SolverError(f"singular saddle system ({ns} moment DOFs, "
                              f"{K.shape[0] - ns} deflection DOFs): {exc}") from exc
        x = lu.solve(rhs)
        res = np.max(np.abs(K @ x - rhs))
        bound = tol * (1.0 + np.max(np.abs(system.load)))
        if not np.isfinite(res) or res > bound:
            raise SolverError(f"saddle residual {res:.3e} exceeds {bound:.3e}")
    sigma = np.zeros(mesh.n_edges)
    sigma[sp_.sigma_dofs] = x[:ns]
    u = np.zeros(mesh.n_vertices)
    u[sp_.u_dofs] = x[ns:]
    return MomentField(mesh, sigma), DeflectionField(mesh, 1, u)


def solve_plate(mesh, mat, f, quad_degree=6, special=None, special_degree=10, tol=1e-9):
    from .spaces import build_spaces
    spaces = build_spaces(mesh)
    system = build_saddle_system(mesh, spaces, mat, f, quad_degree, special, special_degree)
    sigma, u = solve_saddle(system, tol)
    return spaces, system, sigma, u
