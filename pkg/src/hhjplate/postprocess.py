"""Recovered deflection and moment fields.

``build_uhstar`` adds edge bubbles to the P1 deflection, ``recover_Rh`` fits
linear symmetric tensors to edge-midpoint normal-normal data on vertex
patches, ``recover_Kh`` averages element moments at edge midpoints.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SolverError, apply_M, frob
from .mesh import MeshError, patch_anchor, vertex_patch
from .spaces import DeflectionField, bubble_hessians, sym

log = logging.getLogger(__name__)


class RecoveryError(RuntimeError):
    """A vertex least-squares problem stayed rank deficient."""


# ------------------------------------------------------------------- u_h^*
def bubble_system(mesh, spaces, sigma_h, mat):
    """Stiffness ``(M hess b_i, hess b_j)`` and load ``(sigma_h, hess b_j)`` on W_h."""
    H = bubble_hessians(mesh)                                   # (nt, 3, 2, 2)
    MH = apply_M(H, mat)
    Kloc = mesh.area[:, None, None] * np.einsum("tiab,tjab->tij", MH, H)
    S = sigma_h.element_tensors()
    floc = mesh.area[:, None] * frob(S[:, None], H)
    te = mesh.tri_edges
    rows = np.repeat(te[:, :, None], 3, axis=2)
    cols = np.repeat(te[:, None, :], 3, axis=1)
    K = sp.csr_matrix((Kloc.ravel(), (rows.ravel(), cols.ravel())), shape=(mesh.n_edges,) * 2)
    f = np.zeros(mesh.n_edges)
    np.add.at(f, te, floc)
    free = spaces.bubble_dofs
    return K[free][:, free].tocsr(), f[free], free


def jacobi_pcg(K, b, rtol=1e-12, maxiter=None):
    """Jacobi-preconditioned CG via scipy; returns (x, iterations)."""
    d = K.diagonal()
    if np.any(d <= 0):
        raise SolverError("bubble stiffness has a nonpositive diagonal entry")
    M = spla.LinearOperator(K.shape, matvec=lambda r: r / d, dtype=float)
    if maxiter is None:
        maxiter = int(10 * math.sqrt(max(len(b), 1)) + 100)
    count = [0]

    def cb(xk):
        count[0] += 1

    if not np.any(b):
        return np.zeros_like(b), 0
    x, info = spla.cg(K, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
    if info != 0:
        raise SolverError(f"bubble CG did not converge in {maxiter} iterations")
    return x, count[0]


def build_uhstar(mesh, spaces, sigma_h, u_h, mat, cg_tol=1e-12):
    """P2 deflection ``u_h + w_h`` with bubble part from the global W_h problem.

    ``u_h`` is degree 1, so its broken Hessian vanishes and the load reduces
    to ``(sigma_h, hess v)``.  Vertex values of the result equal those of
    ``u_h`` exactly.
    """
    K, f, free = bubble_system(mesh, spaces, sigma_h, mat)
    w = np.zeros(mesh.n_edges)
    if len(free):
        x, its = jacobi_pcg(K, f, rtol=cg_tol)
        log.debug("bubble CG: %d unknowns, %d iterations", len(free), its)
        w[free] = x
    uv = np.asarray(u_h.coefficients, dtype=float)
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    mid = 0.5 * (uv[a] + uv[b]) + w
    return DeflectionField(mesh, 2, np.concatenate([uv, mid]))


def bubble_part(u_star):
    """Edge-bubble coefficients of a P2 field: midpoint value minus P1 average."""
    mesh = u_star.mesh
    c = np.asarray(u_star.coefficients)
    v = c[:mesh.n_vertices]
    return c[mesh.n_vertices:] - 0.5 * (v[mesh.edges[:, 0]] + v[mesh.edges[:, 1]])


# ---------------------------------------------------------------------- R_h
@dataclass
class NodalTensorField:
    """Continuous piecewise-linear symmetric tensor given by vertex values."""

    mesh: object
    vertex_values: np.ndarray   # (nv, 2, 2)

    def values(self, tris, bary):
        V = self.vertex_values[self.mesh.triangles[tris]]       # (nt, 3, 2, 2)
        return np.einsum("qi,tiab->tqab", bary, V)


@dataclass
class PatchLS:
    vertex: int
    triangles: list
    A: np.ndarray
    d: np.ndarray
    c: np.ndarray
    sigma_min: float
    sigma_max: float
    layers: int

    @property
    def rank_ratio(self):
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0


def patch_rows(normals, midpoints, center, scale):
    """Least-squares rows for the linear tensor in scaled local coordinates.

    Columns follow ``(n1^2, n1^2 m1, n1^2 m2, 2n1n2, 2n1n2 m1, 2n1n2 m2,
    n2^2, n2^2 m1, n2^2 m2)`` with ``m`` measured from ``center`` in units
    of ``scale``; the fitted polynomial is the same as in global
    coordinates, only its parametrisation changes.
    """
    n1, n2 = normals[:, 0], normals[:, 1]
    m = (midpoints - center) / scale
    one = np.ones(len(m))
    blocks = []
    for w in (n1 * n1, 2.0 * n1 * n2, n2 * n2):
        blocks += [w * one, w * m[:, 0], w * m[:, 1]]
    return np.stack(blocks, axis=1)


def patch_least_squares(mesh, z, tris, edge_values, layers=0):
    """Fit on the edges of ``tris``; the constant coefficient block is the value at ``z``."""
    tris = sorted(int(t) for t in tris)
    edges = np.unique(mesh.tri_edges[tris].ravel())
    center = mesh.vertices[z]
    scale = float(np.mean(mesh.h_e[edges]))
    A = patch_rows(mesh.edge_normals[edges], mesh.midpoints[edges], center, scale)
    d = np.asarray(edge_values)[edges]
    s = np.linalg.svd(A, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    smin = float(s[-1]) if len(s) == 9 else 0.0
    if len(edges) >= 9 and smin > 0:
        c = np.linalg.lstsq(A, d, rcond=None)[0]
    else:
        c = np.full(9, np.nan)
    return PatchLS(int(z), tris, A, d, c, smin, smax, layers)


def recover_Rh(mesh, sigma_h, rank_tol=1e-8, max_layers=3, return_patches=False):
    """Vertex-patch least-squares moment recovery.

    Interior vertices whose patch fails the rank test (smallest/largest
    singular value at most ``rank_tol``) get one more ring at a time up to
    ``max_layers``; boundary vertices reuse the layered patch of their
    anchor interior vertex.
    """
    values = np.asarray(sigma_h.edge_values, dtype=float)
    nv = mesh.n_vertices
    out = np.zeros((nv, 2, 2))
    patches = {}
    layers_of = {}

    def fit(z, base_layers):
        for layers in range(base_layers, max_layers + 1):
            tris = vertex_patch(mesh, z, layers)
            ls = patch_least_squares(mesh, z, tris, values, layers)
            if ls.rank_ratio > rank_tol:
                return ls
        coords = mesh.vertices[np.unique(mesh.triangles[sorted(tris)])]
        raise RecoveryError(f"rank-deficient patch at vertex {z} {tuple(mesh.vertices[z])} after "
                            f"{max_layers} extra layers; patch vertices {coords.tolist()}")

    interior = np.flatnonzero(~mesh.boundary_vertex_mask)
    if interior.size == 0:
        raise MeshError("mesh has no interior vertices; R_h is undefined")
    for z in interior:
        ls = fit(int(z), 0)
        layers_of[int(z)] = ls.layers
        patches[int(z)] = ls
    for z in np.flatnonzero(mesh.boundary_vertex_mask):
        zp, _ = patch_anchor(mesh, int(z))
        patches[int(z)] = fit(int(z), layers_of[zp])
    for z, ls in patches.items():
        c = ls.c
        out[z] = sym(c[0], c[3], c[6])
    field = NodalTensorField(mesh, out)
    if return_patches:
        return field, patches
    return field


# ---------------------------------------------------------------------- K_h
@dataclass
class PiecewiseLinearTensorField:
    """Per-triangle linear tensor through three edge-midpoint tensors."""

    mesh: object
    midpoint_values: np.ndarray   # (nt, 3, 2, 2), local edge k

    def values(self, tris, bary):
        w = 1.0 - 2.0 * np.asarray(bary)                        # (nq, 3)
        return np.einsum("qk,tkab->tqab", w, self.midpoint_values[tris])


def recover_Kh(mesh, sigma_h):
    """Edge-midpoint averages of the adjacent element tensors, interpolated linearly."""
    S = sigma_h.element_tensors()
    et = mesh.edge_tris
    two = et[:, 1] >= 0
    avg = S[et[:, 0]].copy()
    avg[two] = 0.5 * (S[et[two, 0]] + S[et[two, 1]])
    return PiecewiseLinearTensorField(mesh, avg[mesh.tri_edges])
