"""Finite element spaces of the lowest-order HHJ pair and its postprocessing.

* moments: one normal-normal value per edge, piecewise-constant symmetric
  tensors reconstructed per triangle;
* deflections: continuous P1 (vertex values) and P2 (vertex and edge-midpoint
  values, Lagrange nodal basis);
* bubbles: the edge functions ``4 lambda_i lambda_j`` spanning ``(I - I_h) P2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import BoundaryLabel
from .quadrature import edge_rule, edge_points_for_degree


@dataclass(frozen=True)
class SpaceSet:
    """Index maps of the discrete spaces on one mesh.

    Masks are over all edges (moments, bubbles) or vertices (deflection);
    free DOFs are numbered in index order.
    """

    mesh: object
    sigma_free: np.ndarray
    u_free: np.ndarray
    bubble_free: np.ndarray

    @property
    def sigma_dofs(self):
        return np.flatnonzero(self.sigma_free)

    @property
    def u_dofs(self):
        return np.flatnonzero(self.u_free)

    @property
    def bubble_dofs(self):
        return np.flatnonzero(self.bubble_free)

    @property
    def dim_sigma(self):
        return int(self.sigma_free.sum())

    @property
    def dim_u(self):
        return int(self.u_free.sum())

    @property
    def dim_bubble(self):
        return int(self.bubble_free.sum())

    @property
    def node_coordinates(self):
        """P2 Lagrange nodes: vertices followed by edge midpoints."""
        return np.concatenate([self.mesh.vertices, self.mesh.midpoints])


def build_spaces(mesh):
    lab = mesh.edge_labels
    sigma_free = ~np.isin(lab, [BoundaryLabel.SIMPLY_SUPPORTED, BoundaryLabel.FREE])
    supported = np.isin(lab, [BoundaryLabel.CLAMPED, BoundaryLabel.SIMPLY_SUPPORTED])
    u_free = np.ones(mesh.n_vertices, dtype=bool)
    u_free[mesh.edges[supported].ravel()] = False
    bubble_free = ~supported
    for a in (sigma_free, u_free, bubble_free):
        a.setflags(write=False)
    return SpaceSet(mesh, sigma_free, u_free, bubble_free)


# --------------------------------------------------------------------- tensors
def nn_matrix(normals):
    """Rows ``(n1^2, 2 n1 n2, n2^2)`` mapping ``(s11, s12, s22)`` to ``n^T S n``."""
    n = np.asarray(normals, dtype=float)
    return np.stack([n[..., 0] ** 2, 2.0 * n[..., 0] * n[..., 1], n[..., 1] ** 2], axis=-1)


def sym(s11, s12, s22):
    s11, s12, s22 = np.broadcast_arrays(np.asarray(s11, float), np.asarray(s12, float),
                                        np.asarray(s22, float))
    return np.stack([np.stack([s11, s12], -1), np.stack([s12, s22], -1)], -2)


def reconstruct_tensor(normals, nn_values):
    """The symmetric S with ``n_k^T S n_k = nn_values[k]`` for three normals."""
    N = nn_matrix(normals)
    if abs(np.linalg.det(N)) < 1e-14:
        raise np.linalg.LinAlgError("edge normals are parallel: degenerate triangle")
    s = np.linalg.solve(N, np.asarray(nn_values, dtype=float))
    return sym(*s)


def element_nn_inverse(mesh):
    """Per-triangle inverse of :func:`nn_matrix`, (nt, 3, 3): columns are the
    (s11, s12, s22) components of the unit local-edge tensors."""
    cache = mesh.__dict__.setdefault("_nn_inverse", None)
    if cache is None:
        cache = np.linalg.inv(nn_matrix(mesh.outward_normals))
        cache.setflags(write=False)
        mesh.__dict__["_nn_inverse"] = cache
    return cache


def element_basis_tensors(mesh):
    """Tensor of the unit moment DOF on each local edge, (nt, 3, 2, 2)."""
    inv = element_nn_inverse(mesh)
    return sym(inv[:, 0, :], inv[:, 1, :], inv[:, 2, :])


@dataclass(frozen=True)
class MomentField:
    """Lowest-order HHJ moment: constant ``sigma_nn`` per edge."""

    mesh: object
    edge_values: np.ndarray

    def element_tensors(self):
        """Constant tensor on each triangle, (nt, 2, 2)."""
        v = np.asarray(self.edge_values)[self.mesh.tri_edges]
        s = np.einsum("tij,tj->ti", element_nn_inverse(self.mesh), v)
        return sym(s[:, 0], s[:, 1], s[:, 2])

    def values(self, tris, bary):
        S = self.element_tensors()[tris]
        return np.broadcast_to(S[:, None], (len(tris), len(bary), 2, 2))

    def __add__(self, other):
        return MomentField(self.mesh, np.asarray(self.edge_values) + np.asarray(other.edge_values))

    def __rmul__(self, c):
        return MomentField(self.mesh, c * np.asarray(self.edge_values))


# -------------------------------------------------------------- deflections
@dataclass(frozen=True)
class DeflectionField:
    """Continuous P1 or P2 field in the Lagrange nodal basis.

    ``coefficients`` holds vertex values, followed for degree 2 by values at
    edge midpoints.
    """

    mesh: object
    degree: int
    coefficients: np.ndarray

    def local_coefficients(self):
        c = np.asarray(self.coefficients)
        loc = c[self.mesh.triangles]
        if self.degree == 2:
            loc = np.concatenate([loc, c[self.mesh.n_vertices + self.mesh.tri_edges]], axis=1)
        return loc

    def values(self, tris, bary):
        phi = shape_values(self.degree, bary)                      # (nq, nloc)
        return self.local_coefficients()[tris] @ phi.T

    def gradients(self, tris, bary):
        G = shape_gradients(self.mesh, self.degree, bary, tris)    # (nt, nq, nloc, 2)
        return np.einsum("tqld,tl->tqd", G, self.local_coefficients()[tris])

    def hessians(self, tris, bary=None):
        """Constant-per-element Hessian (nt, 2, 2); zeros for degree 1."""
        if self.degree == 1:
            return np.zeros((len(tris), 2, 2))
        H = p2_hessians(self.mesh)[tris]
        return np.einsum("tlij,tl->tij", H, self.local_coefficients()[tris])

    def vertex_values(self):
        return np.asarray(self.coefficients)[:self.mesh.n_vertices]


@dataclass(frozen=True)
class BubbleField:
    """Edge-bubble coefficients (zero on edges excluded from W_h)."""

    mesh: object
    coefficients: np.ndarray

    def as_deflection(self):
        c = np.concatenate([np.zeros(self.mesh.n_vertices), self.coefficients])
        return DeflectionField(self.mesh, 2, c)


# ------------------------------------------------------------- shape functions
def shape_values(degree, bary):
    """P1: lambda_i.  P2: vertex functions then edge functions (edge k opposite vertex k)."""
    L = np.asarray(bary, dtype=float)
    if degree == 1:
        return L.copy()
    v = L * (2.0 * L - 1.0)
    e = 4.0 * np.stack([L[:, 1] * L[:, 2], L[:, 2] * L[:, 0], L[:, 0] * L[:, 1]], axis=1)
    return np.concatenate([v, e], axis=1)


def shape_gradients(mesh, degree, bary, tris=None):
    """Physical gradients (nt, nq, nloc, 2)."""
    if tris is None:
        tris = np.arange(mesh.n_triangles)
    g = mesh.grad_lambda[tris]                       # (nt, 3, 2)
    L = np.asarray(bary, dtype=float)
    nq = len(L)
    if degree == 1:
        return np.broadcast_to(g[:, None], (len(tris), nq, 3, 2))
    gv = (4.0 * L - 1.0)[None, :, :, None] * g[:, None]
    pairs = ((1, 2), (2, 0), (0, 1))
    ge = np.stack([4.0 * (L[None, :, i, None] * g[:, None, j] + L[None, :, j, None] * g[:, None, i])
                   for i, j in pairs], axis=2)
    return np.concatenate([gv, ge], axis=2)


def p2_hessians(mesh):
    """Constant Hessians of the six P2 shape functions, (nt, 6, 2, 2)."""
    g = mesh.grad_lambda
    hv = 4.0 * np.einsum("tki,tkj->tkij", g, g)
    pairs = ((1, 2), (2, 0), (0, 1))
    he = np.stack([4.0 * (np.einsum("ti,tj->tij", g[:, i], g[:, j]) + np.einsum("ti,tj->tij", g[:, j], g[:, i]))
                   for i, j in pairs], axis=1)
    return np.concatenate([hv, he], axis=1)


def bubble_hessians(mesh):
    """Hessian of the edge bubble of local edge k on each triangle, (nt, 3, 2, 2)."""
    return p2_hessians(mesh)[:, 3:]


def barycentric(mesh, T, x):
    p = mesh.vertices[mesh.triangles[T]]
    A = np.array([[p[0, 0], p[1, 0], p[2, 0]], [p[0, 1], p[1, 1], p[2, 1]], [1.0, 1.0, 1.0]])
    return np.linalg.solve(A, np.array([x[0], x[1], 1.0]))


def eval_basis(space, T, x, tol=1e-10):
    """Values, gradients and Hessians of the P1 and P2 shape functions of ``T`` at ``x``."""
    mesh = space.mesh
    L = barycentric(mesh, T, x)
    if np.any(L < -tol):
        raise ValueError(f"point {tuple(x)} lies outside triangle {T}")
    b = L[None]
    tri = np.array([T])
    return {
        "p1": {"value": shape_values(1, b)[0], "gradient": shape_gradients(mesh, 1, b, tri)[0, 0],
               "hessian": np.zeros((3, 2, 2))},
        "p2": {"value": shape_values(2, b)[0], "gradient": shape_gradients(mesh, 2, b, tri)[0, 0],
               "hessian": p2_hessians(mesh)[T]},
    }


# -------------------------------------------------------------- interpolation
def _edge_samples(mesh, npts):
    s, w = edge_rule(npts)
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    x = a[:, None] + s[None, :, None] * (b - a)[:, None]
    return x, w


def interpolate_Ih(mesh, v, degree=1, edge_points=3):
    """Vertex values plus, for degree 2, matched edge means.

    For P2 the edge mean is ``(v_a + 4 v_m + v_b) / 6`` so the midpoint
    coefficient follows from the exact edge integral of ``v``.
    """
    vv = np.asarray(v(mesh.vertices), dtype=float)
    if degree == 1:
        return DeflectionField(mesh, 1, vv)
    if degree != 2:
        raise ValueError("degree must be 1 or 2")
    x, w = _edge_samples(mesh, edge_points)
    mean = np.asarray(v(x), dtype=float) @ w
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    mid = (6.0 * mean - vv[a] - vv[b]) / 4.0
    return DeflectionField(mesh, 2, np.concatenate([vv, mid]))


def interpolate_Pih(mesh, tau, quad_degree=5, constrain=True):
    """Edge means of ``tau_nn``; ``tau(x)`` maps (..., 2) points to (..., 2, 2)."""
    x, w = _edge_samples(mesh, edge_points_for_degree(quad_degree))
    T = np.asarray(tau(x), dtype=float)                   # (ne, nq, 2, 2)
    n = mesh.edge_normals
    nn = np.einsum("ei,eqij,ej->eq", n, T, n)
    vals = nn @ w
    if constrain:
        vals = np.where(build_spaces(mesh).sigma_free, vals, 0.0)
    return MomentField(mesh, vals)
