"""Conforming triangulations with boundary labels and newest vertex bisection.

Triangles are stored counterclockwise with the *newest vertex first*: for a
triangle ``(p0, p1, p2)`` the refinement edge is ``(p1, p2)``, i.e. local
edge 0.  Local edge ``k`` is always the edge opposite local vertex ``k``.
"""
from __future__ import annotations

import enum
from collections import deque
from functools import cached_property
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Invalid mesh input or a query the mesh cannot answer."""


class BoundaryLabel(enum.IntEnum):
    INTERIOR = 0
    CLAMPED = 1
    SIMPLY_SUPPORTED = 2
    FREE = 3


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Mesh:
    """Immutable conforming triangulation.

    Parameters
    ----------
    vertices : array_like, shape (nv, 2)
    triangles : array_like, shape (nt, 3)
        Vertex indices.  Positively oriented; the refinement edge is the edge
        opposite the first vertex.
    boundary_edges : array_like, shape (nb, 2)
        Vertex pairs of the boundary edges (any orientation).
    boundary_labels : array_like, shape (nb,)
        One :class:`BoundaryLabel` per boundary edge.
    generation : array_like, shape (nt,), optional
        Bisection depth of each triangle.
    """

    def __init__(self, vertices, triangles, boundary_edges, boundary_labels,
                 generation=None):
        self.vertices = _readonly(np.asarray(vertices, dtype=float).reshape(-1, 2))
        self.triangles = _readonly(np.asarray(triangles, dtype=np.int64).reshape(-1, 3))
        if generation is None:
            generation = np.zeros(len(self.triangles), dtype=np.int64)
        self.generation = _readonly(np.asarray(generation, dtype=np.int64))
        if not np.all(np.isfinite(self.vertices)):
            raise MeshError("vertex coordinates must be finite")
        nv = len(self.vertices)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= nv):
            raise MeshError("triangle references a nonexistent vertex")
        if np.any(self.signed_area <= 0.0):
            bad = np.flatnonzero(self.signed_area <= 0.0)
            raise MeshError(f"triangles {bad[:10].tolist()} are degenerate or clockwise")
        self._build_edges(np.asarray(boundary_edges, dtype=np.int64).reshape(-1, 2),
                          np.asarray(boundary_labels, dtype=np.int64).ravel())

    # ------------------------------------------------------------------ topology
    def _edge_keys(self, pairs):
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        return lo * len(self.vertices) + hi

    def _build_edges(self, bnd_edges, bnd_labels):
        t = self.triangles
        nt = len(t)
        local = np.stack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]], axis=1)  # (nt,3,2)
        keys = self._edge_keys(local.reshape(-1, 2))
        ukeys, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            raise MeshError("an edge is shared by more than two triangles")
        nv = len(self.vertices)
        edges = np.stack([ukeys // nv, ukeys % nv], axis=1)
        tri_edges = inverse.reshape(nt, 3)

        edge_tris = -np.ones((len(edges), 2), dtype=np.int64)
        edge_local = -np.ones((len(edges), 2), dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        sorted_e = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_e[1:] != sorted_e[:-1]
        slot = np.where(first, 0, 1)
        edge_tris[sorted_e, slot] = order // 3
        edge_local[sorted_e, slot] = order % 3

        is_boundary = counts == 1
        labels = np.zeros(len(edges), dtype=np.int64)
        if len(bnd_edges) != len(bnd_labels):
            raise MeshError("boundary_edges and boundary_labels differ in length")
        if len(bnd_edges):
            pos = np.searchsorted(ukeys, self._edge_keys(bnd_edges))
            pos = np.minimum(pos, len(ukeys) - 1)
            if np.any(ukeys[pos] != self._edge_keys(bnd_edges)):
                raise MeshError("a labeled boundary edge is not an edge of the mesh")
            if np.any(~is_boundary[pos]):
                raise MeshError("an interior edge carries a boundary label")
            labels[pos] = bnd_labels
        if np.any(labels[is_boundary] == BoundaryLabel.INTERIOR):
            raise MeshError("every boundary edge needs a Clamped/SimplySupported/Free label")

        self.edges = _readonly(edges)
        self.tri_edges = _readonly(tri_edges)
        self.edge_tris = _readonly(edge_tris)
        self.edge_local = _readonly(edge_local)
        self.edge_labels = _readonly(labels)
        self.is_boundary_edge = _readonly(is_boundary)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def refinement_edge(self):
        """Local index of the refinement edge of each triangle (always 0)."""
        return np.zeros(self.n_triangles, dtype=np.int64)

    # ------------------------------------------------------------------ geometry
    @cached_property
    def signed_area(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return _readonly(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))

    @property
    def area(self):
        return self.signed_area

    @cached_property
    def h_T(self):
        """Element size ``sqrt(area)`` (not the diameter)."""
        return _readonly(np.sqrt(self.area))

    @cached_property
    def h_e(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return _readonly(np.hypot(d[:, 0], d[:, 1]))

    @cached_property
    def midpoints(self):
        return _readonly(0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]]))

    @cached_property
    def outward_normals(self):
        """Unit outward normal of each triangle on each local edge, (nt, 3, 2)."""
        p = self.vertices[self.triangles]
        a = p[:, [1, 2, 0]]
        b = p[:, [2, 0, 1]]
        d = b - a
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return _readonly(n / np.linalg.norm(n, axis=-1, keepdims=True))

    @cached_property
    def edge_normals(self):
        """Fixed unit normal per edge; outward on the boundary."""
        t0 = self.edge_tris[:, 0]
        return _readonly(self.outward_normals[t0, self.edge_local[:, 0]])

    @cached_property
    def edge_tangents(self):
        """``n_e`` rotated by +pi/2 (counterclockwise along the boundary)."""
        n = self.edge_normals
        return _readonly(np.stack([-n[:, 1], n[:, 0]], axis=-1))

    @cached_property
    def tri_edge_sign(self):
        """+1 where the outward normal of T agrees with ``n_e``, else -1."""
        s = np.where(self.edge_tris[self.tri_edges, 0] == np.arange(self.n_triangles)[:, None], 1.0, -1.0)
        return _readonly(s)

    @cached_property
    def grad_lambda(self):
        """Gradients of the barycentric coordinates, (nt, 3, 2)."""
        hl = self.h_e[self.tri_edges]
        g = -self.outward_normals * (hl / (2.0 * self.area[:, None]))[..., None]
        return _readonly(g)

    def geometry(self):
        """Per-entity geometric tables as a dict of arrays."""
        if np.any(self.area <= 0):
            raise MeshError("degenerate triangle")
        return {
            "area": self.area,
            "h_T": self.h_T,
            "h_e": self.h_e,
            "n_e": self.edge_normals,
            "t_e": self.edge_tangents,
            "outward_normals": self.outward_normals,
            "tri_edge_sign": self.tri_edge_sign,
        }

    def min_angle(self):
        p = self.vertices[self.triangles]
        ang = []
        for k in range(3):
            u = p[:, (k + 1) % 3] - p[:, k]
            v = p[:, (k + 2) % 3] - p[:, k]
            c = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            ang.append(np.arccos(np.clip(c, -1.0, 1.0)))
        return float(np.min(ang))

    # --------------------------------------------------------------- adjacency
    @cached_property
    def boundary_vertex_mask(self):
        m = np.zeros(self.n_vertices, dtype=bool)
        m[self.edges[self.is_boundary_edge].ravel()] = True
        return _readonly(m)

    @cached_property
    def _vertex_tris(self):
        flat = self.triangles.ravel()
        order = np.argsort(flat, kind="stable")
        ptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.add.at(ptr, flat + 1, 1)
        return np.cumsum(ptr), order // 3

    def vertex_triangles(self, z):
        ptr, idx = self._vertex_tris
        return idx[ptr[z]:ptr[z + 1]]

    @cached_property
    def _vertex_nbrs(self):
        e = np.concatenate([self.edges, self.edges[:, ::-1]])
        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        ptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.add.at(ptr, e[:, 0] + 1, 1)
        return np.cumsum(ptr), e[:, 1]

    def vertex_neighbors(self, z):
        ptr, idx = self._vertex_nbrs
        return idx[ptr[z]:ptr[z + 1]]

    def boundary_edges_labeled(self):
        """Boundary edges as (pairs, labels), pairs oriented counterclockwise."""
        b = np.flatnonzero(self.is_boundary_edge)
        t = self.edge_tris[b, 0]
        k = self.edge_local[b, 0]
        tri = self.triangles[t]
        a = tri[np.arange(len(b)), (k + 1) % 3]
        c = tri[np.arange(len(b)), (k + 2) % 3]
        return np.stack([a, c], axis=1), self.edge_labels[b]

    # ------------------------------------------------------------- utilities
    def copy(self):
        pairs, labels = self.boundary_edges_labeled()
        return Mesh(self.vertices.copy(), self.triangles.copy(), pairs, labels,
                    self.generation.copy())

    def is_conforming(self):
        """No edge has more than two triangles and there are no hanging vertices.

        Single-triangle edges must close into boundary loops of nonzero area;
        a hanging vertex shows up as a collinear loop enclosing nothing.
        """
        counts = (self.edge_tris >= 0).sum(axis=1)
        if np.any(counts < 1) or np.any(counts > 2):
            return False
        pairs, _ = self.boundary_edges_labeled()
        succ = {}
        for a, b in pairs.tolist():
            if a in succ:
                return False
            succ[a] = b
        seen = set()
        for start in list(succ):
            if start in seen:
                continue
            loop, v = [], start
            while v not in seen:
                seen.add(v)
                loop.append(v)
                if v not in succ:
                    return False
                v = succ[v]
            p = self.vertices[loop]
            q = np.roll(p, -1, axis=0)
            enclosed = 0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])
            scale = np.ptp(p, axis=0).max() ** 2
            if abs(enclosed) <= 1e-12 * max(scale, 1e-300):
                return False
        return True

    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def bounding_box(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.triangles, other.triangles)
                and np.array_equal(self.edge_labels, other.edge_labels)
                and np.array_equal(self.generation, other.generation))

    __hash__ = None

    def __repr__(self):
        return f"Mesh(nv={self.n_vertices}, nt={self.n_triangles}, ne={self.n_edges})"

    # -------------------------------------------------------------- text dump
    def write_text(self, path):
        path = Path(path)
        lines = [f"{self.n_vertices} {self.n_triangles} {self.n_edges}"]
        lines += [f"{x!r} {y!r}" for x, y in self.vertices.tolist()]
        lines += [f"{a} {b} {c} 0" for a, b, c in self.triangles.tolist()]
        lines += [f"{a} {b} {int(l)}" for (a, b), l in zip(self.edges.tolist(), self.edge_labels)]
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def read_text(cls, path):
        rows = Path(path).read_text().split("\n")
        nv, nt, ne = (int(s) for s in rows[0].split())
        verts = np.array([[float(s) for s in r.split()] for r in rows[1:1 + nv]])
        tris = []
        for r in rows[1 + nv:1 + nv + nt]:
            a, b, c, k = (int(s) for s in r.split())
            tri = [a, b, c]
            tris.append(tri[k:] + tri[:k])
        edges = np.array([[int(s) for s in r.split()] for r in rows[1 + nv + nt:1 + nv + nt + ne]])
        bnd = edges[edges[:, 2] != BoundaryLabel.INTERIOR]
        return cls(verts, tris, bnd[:, :2], bnd[:, 2])


# ---------------------------------------------------------------- construction
def _initial_labeling(vertices, triangles):
    """Rotate each triangle so its longest edge is the refinement edge.

    Ties go to the edge whose opposite vertex has the smallest index.
    """
    out = []
    for tri in np.asarray(triangles).tolist():
        best = None
        for k in range(3):
            a, b = vertices[tri[(k + 1) % 3]], vertices[tri[(k + 2) % 3]]
            L = float(np.hypot(*(b - a)))
            key = (-round(L, 12), tri[k])
            if best is None or key < best[0]:
                best = (key, k)
        k = best[1]
        out.append(tri[k:] + tri[:k])
    return np.array(out, dtype=np.int64)


def from_triangles(vertices, triangles, label_fn):
    """Build a mesh, labeling boundary edges by ``label_fn(midpoint) -> BoundaryLabel``.

    Triangles are reoriented counterclockwise and given longest-edge
    refinement labels.
    """
    vertices = np.asarray(vertices, dtype=float)
    tris = np.asarray(triangles, dtype=np.int64).copy()
    p = vertices[tris]
    sa = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    flip = sa < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    tris = _initial_labeling(vertices, tris)
    local = np.concatenate([tris[:, [1, 2]], tris[:, [2, 0]], tris[:, [0, 1]]])
    key = np.sort(local, axis=1)
    uniq, counts = np.unique(key, axis=0, return_counts=True)
    bnd = uniq[counts == 1]
    mids = 0.5 * (vertices[bnd[:, 0]] + vertices[bnd[:, 1]])
    labels = np.array([int(label_fn(m)) for m in mids], dtype=np.int64)
    return Mesh(vertices, tris, bnd, labels)


def _grid(xs, ys, diag):
    """Structured grid over the cells selected by ``diag(cx, cy)``.

    ``diag`` returns None to skip a cell, +1 for a diagonal through the
    lower-left corner and -1 for the other diagonal.
    """
    index = {}
    verts = []

    def vid(x, y):
        key = (round(x, 12), round(y, 12))
        if key not in index:
            index[key] = len(verts)
            verts.append((x, y))
        return index[key]

    tris = []
    for j in range(len(ys) - 1):
        for i in range(len(xs) - 1):
            x0, x1, y0, y1 = xs[i], xs[i + 1], ys[j], ys[j + 1]
            d = diag(0.5 * (x0 + x1), 0.5 * (y0 + y1))
            if d is None:
                continue
            a, b, c, e = vid(x0, y0), vid(x1, y0), vid(x1, y1), vid(x0, y1)
            if d > 0:
                tris += [(a, b, c), (a, c, e)]
            else:
                tris += [(a, b, e), (b, c, e)]
    return np.array(verts), np.array(tris)


def build_domain(name, n0=1, bc_scheme="all_clamped"):
    """Initial triangulation of one of the built-in domains.

    ``unit_square``: ``n0 x n0`` squares on [0,1]^2, each cut along its
    (0,0)-(1,1)-parallel diagonal.  ``lshape``: [-1,1]^2 minus [0,1]x[-1,0],
    squares of side 1/n0 cut along the diagonal pointing at the origin.
    ``bc_scheme`` is ``all_clamped`` or ``lshape_mixed`` (the two reentrant
    segments Free, the rest SimplySupported).
    """
    if n0 < 1:
        raise MeshError("n0 must be >= 1")
    if name == "unit_square":
        g = np.linspace(0.0, 1.0, n0 + 1)
        verts, tris = _grid(g, g, lambda x, y: 1)
    elif name == "lshape":
        g = np.linspace(-1.0, 1.0, 2 * n0 + 1)

        def diag(x, y):
            if x > 0 and y < 0:
                return None
            return 1 if x * y > 0 else -1

        verts, tris = _grid(g, g, diag)
    else:
        raise MeshError(f"unknown domain {name!r}")

    if bc_scheme == "all_clamped":
        def label(m):
            return BoundaryLabel.CLAMPED
    elif bc_scheme == "lshape_mixed" and name == "lshape":
        def label(m):
            on_reentrant = (abs(m[0]) < 1e-12 and m[1] < 0) or (abs(m[1]) < 1e-12 and m[0] > 0)
            return BoundaryLabel.FREE if on_reentrant else BoundaryLabel.SIMPLY_SUPPORTED
    else:
        raise MeshError(f"unknown domain/bc combination {name!r}/{bc_scheme!r}")
    return from_triangles(verts, tris, label)


# ------------------------------------------------------------------ refinement
def refine_nvb(mesh, marked):
    """Newest vertex bisection of the marked triangles plus conforming closure.

    Returns a new :class:`Mesh`; new vertices are appended in edge-index order
    and children replace their parent in place, so the result is a
    deterministic function of the input.
    """
    marked = np.unique(np.asarray(list(marked) if isinstance(marked, (set, frozenset)) else marked,
                                  dtype=np.int64).ravel())
    if marked.size == 0:
        return mesh.copy()
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise MeshError("marked triangle id out of range")

    te = mesh.tri_edges
    emark = np.zeros(mesh.n_edges, dtype=bool)
    emark[te[marked, 0]] = True
    while True:
        need = emark[te].any(axis=1)
        ref = te[need, 0]
        if emark[ref].all():
            break
        emark[ref] = True

    marked_edges = np.flatnonzero(emark)
    mid = -np.ones(mesh.n_edges, dtype=np.int64)
    mid[marked_edges] = mesh.n_vertices + np.arange(len(marked_edges))
    new_vertices = np.concatenate([mesh.vertices, mesh.midpoints[marked_edges]])

    t = mesh.triangles
    nt = len(t)
    parent = np.arange(nt)
    # (tri, refinement-edge global id or -1, sort key, generation)
    split = emark[te[:, 0]]
    keep = ~split
    tri_out = [t[keep]]
    ref_out = [-np.ones(keep.sum(), dtype=np.int64)]
    key_out = [parent[keep] * 4]
    gen_out = [mesh.generation[keep]]

    s = np.flatnonzero(split)
    p0, p1, p2 = t[s, 0], t[s, 1], t[s, 2]
    m = mid[te[s, 0]]
    c1 = np.stack([m, p0, p1], axis=1)   # refinement edge (p0, p1) = parent edge 2
    c2 = np.stack([m, p2, p0], axis=1)   # refinement edge (p2, p0) = parent edge 1
    kids = np.concatenate([c1, c2])
    kref = np.concatenate([te[s, 2], te[s, 1]])
    kkey = np.concatenate([s * 4, s * 4 + 2])
    kgen = np.concatenate([mesh.generation[s], mesh.generation[s]]) + 1

    again = emark[kref]
    tri_out.append(kids[~again])
    key_out.append(kkey[~again])
    gen_out.append(kgen[~again])
    g = np.flatnonzero(again)
    q0, q1, q2 = kids[g, 0], kids[g, 1], kids[g, 2]
    mm = mid[kref[g]]
    tri_out += [np.stack([mm, q0, q1], axis=1), np.stack([mm, q2, q0], axis=1)]
    key_out += [kkey[g], kkey[g] + 1]
    gen_out += [kgen[g] + 1, kgen[g] + 1]

    tris = np.concatenate(tri_out)
    keys = np.concatenate(key_out)
    gens = np.concatenate(gen_out)
    order = np.argsort(keys, kind="stable")
    tris, gens = tris[order], gens[order]

    pairs, labels = mesh.boundary_edges_labeled()
    bidx = np.flatnonzero(mesh.is_boundary_edge)
    bm = mid[bidx]
    # boundary_edges_labeled lists edges in the same order as bidx
    splitb = bm >= 0
    new_pairs = np.concatenate([
        pairs[~splitb],
        np.stack([pairs[splitb, 0], bm[splitb]], axis=1),
        np.stack([bm[splitb], pairs[splitb, 1]], axis=1),
    ])
    new_labels = np.concatenate([labels[~splitb], labels[splitb], labels[splitb]])
    return Mesh(new_vertices, tris, new_pairs, new_labels, gens)


def refine_uniform(mesh):
    """Two full newest-vertex-bisection sweeps (element count x4)."""
    once = refine_nvb(mesh, np.arange(mesh.n_triangles))
    return refine_nvb(once, np.arange(once.n_triangles))


# --------------------------------------------------------------------- patches
def _ring(mesh, tris):
    verts = np.unique(mesh.triangles[list(tris)].ravel())
    out = set(tris)
    for v in verts:
        out.update(mesh.vertex_triangles(v).tolist())
    return out


def _nearest(mesh, z, candidates):
    d = np.linalg.norm(mesh.vertices[candidates] - mesh.vertices[z], axis=1)
    order = np.lexsort((candidates, np.round(d, 12)))
    return int(candidates[order[0]])


def patch_anchor(mesh, z):
    """Interior vertex whose patch serves ``z`` and the BFS path to it.

    Returns ``(z_prime, path)`` with ``path`` the vertex sequence from ``z``
    to ``z_prime``.  For interior ``z`` this is ``(z, [z])``.
    """
    interior = ~mesh.boundary_vertex_mask
    if not interior.any():
        raise MeshError("mesh has no interior vertices; vertex patches are undefined")
    if interior[z]:
        return int(z), [int(z)]
    prev = {int(z): None}
    frontier = [int(z)]
    while frontier:
        nxt = []
        for v in frontier:
            for w in mesh.vertex_neighbors(v).tolist():
                if w not in prev:
                    prev[w] = v
                    nxt.append(w)
        hits = np.array([w for w in nxt if interior[w]], dtype=np.int64)
        if hits.size:
            zp = _nearest(mesh, z, hits)
            path = [zp]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return zp, path[::-1]
        frontier = sorted(set(nxt))
    raise MeshError(f"vertex {z} is not connected to any interior vertex")


def vertex_patch(mesh, z, extra_layers=0):
    """Triangle ids of the least-squares patch of vertex ``z``.

    Interior vertex: its ring, grown by ``extra_layers`` rings.  Boundary
    vertex next to an interior vertex ``z'``: the patch of ``z'``.  Otherwise
    the patch of the nearest interior vertex reached through edges, extended
    by one triangle containing ``z`` that shares an edge with it (or by the
    rings along the connecting path when no such triangle exists).
    """
    zp, path = patch_anchor(mesh, z)
    patch = set(mesh.vertex_triangles(zp).tolist())
    for _ in range(extra_layers):
        patch = _ring(mesh, patch)
    if len(path) <= 2:
        return patch
    pverts = set(np.unique(mesh.triangles[list(patch)]).tolist())
    for t in sorted(mesh.vertex_triangles(z).tolist()):
        if len(pverts.intersection(mesh.triangles[t].tolist())) >= 2:
            return patch | {t}
    for v in path[:-1]:
        patch.update(mesh.vertex_triangles(v).tolist())
    return patch


def element_neighborhood(mesh, T):
    """All triangles sharing at least a vertex with triangle ``T`` (``T`` included)."""
    out = set()
    for v in mesh.triangles[T]:
        out.update(mesh.vertex_triangles(v).tolist())
    return out


def is_edge_connected(mesh, tris):
    """True when the triangle set is connected through shared edges."""
    tris = set(int(t) for t in tris)
    if not tris:
        return False
    start = next(iter(tris))
    seen = {start}
    queue = deque([start])
    while queue:
        t = queue.popleft()
        for e in mesh.tri_edges[t]:
            for s in mesh.edge_tris[e]:
                if s >= 0 and s in tris and s not in seen:
                    seen.add(int(s))
                    queue.append(int(s))
    return seen == tris
