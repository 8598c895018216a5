"""Gauss rules on the reference triangle and on edges."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class QuadratureRule:
    """Triangle rule in barycentric coordinates; weights sum to 1."""

    points: np.ndarray   # (nq, 3)
    weights: np.ndarray  # (nq,)
    degree: int


# 12-point degree-6 rule (Dunavant 1985).
_D6 = (
    (0.116786275726379, (0.501426509658179, 0.249286745170910, 0.249286745170910)),
    (0.050844906370207, (0.873821971016996, 0.063089014491502, 0.063089014491502)),
    (0.082851075618374, (0.053145049844817, 0.310352451033784, 0.636502499121399)),
)


def _dunavant6():
    pts, wts = [], []
    for w, (a, b, c) in _D6:
        orbit = {(a, b, c), (b, c, a), (c, a, b), (a, c, b), (c, b, a), (b, a, c)}
        for p in sorted(orbit):
            pts.append(p)
            wts.append(w)
    pts = np.array(pts)
    pts /= pts.sum(axis=1, keepdims=True)
    wts = np.array(wts)
    return pts, wts / wts.sum()


def _conical(degree):
    n = max(1, (degree + 2) // 2)
    s, ws = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    t, wt = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (t + 1.0)
    wu = wt / 4.0
    U, S = np.meshgrid(u, s, indexing="ij")
    W = np.outer(wu, ws)
    x = U.ravel()
    y = (S * (1.0 - U)).ravel()
    w = 2.0 * W.ravel()
    pts = np.stack([1.0 - x - y, x, y], axis=1)
    return pts, w / w.sum()


@lru_cache(maxsize=None)
def triangle_rule(degree=6):
    """Rule exact for polynomials of total degree ``degree``.

    Degree 6 uses the 12-point Dunavant rule, degree 1 the centroid, and all
    other degrees a collapsed Gauss-Legendre x Gauss-Jacobi product.
    """
    degree = int(degree)
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree <= 1:
        pts, w = np.full((1, 3), 1.0 / 3.0), np.ones(1)
    elif degree == 6:
        pts, w = _dunavant6()
    else:
        pts, w = _conical(degree)
    pts.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(pts, w, degree)


@lru_cache(maxsize=None)
def edge_rule(npoints=3):
    """Gauss-Legendre rule on [0, 1]; returns (points, weights summing to 1)."""
    x, w = np.polynomial.legendre.leggauss(int(npoints))
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def edge_points_for_degree(degree):
    return max(1, (int(degree) + 2) // 2)


def physical_points(mesh, rule, tris=None):
    """Quadrature points (nt, nq, 2) and physical weights (nt, nq)."""
    if tris is None:
        tris = np.arange(mesh.n_triangles)
    p = mesh.vertices[mesh.triangles[tris]]           # (nt, 3, 2)
    x = np.einsum("qi,tid->tqd", rule.points, p)
    w = mesh.area[tris][:, None] * rule.weights[None, :]
    return x, w


def integrate_elements(mesh, integrand, degree=6, special=None, special_degree=10):
    """Per-element integrals of ``integrand(tris, bary, x) -> (len(tris), nq)``.

    Triangles flagged in the boolean mask ``special`` use the rule of
    ``special_degree`` instead of ``degree``.
    """
    out = np.zeros(mesh.n_triangles)
    groups = [(np.arange(mesh.n_triangles), degree)]
    if special is not None and np.any(special):
        groups = [(np.flatnonzero(~special), degree), (np.flatnonzero(special), special_degree)]
    for tris, deg in groups:
        if tris.size == 0:
            continue
        rule = triangle_rule(deg)
        x, w = physical_points(mesh, rule, tris)
        out[tris] = np.sum(integrand(tris, rule.points, x) * w, axis=1)
    return out
