import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import square_grid, two_triangle_square, unit_right_triangle
from hhjplate.assembly import (MaterialParams, SaddleSystem, SolverError, apply_M, apply_Minv,
                               assemble_a, assemble_b, assemble_load, build_saddle_system,
                               local_a, local_b, local_b_tangential, solve_plate, solve_saddle)
from hhjplate.estimators import error_u_2h, error_moment_L2
from hhjplate.manufactured import problem1
from hhjplate.mesh import build_domain, refine_nvb, refine_uniform
from hhjplate.quadrature import edge_rule, triangle_rule
from hhjplate.spaces import MomentField, build_spaces, reconstruct_tensor, sym

MAT = MaterialParams()
sym3 = arrays(float, 3, elements=st.floats(-100, 100, allow_nan=False))


# ------------------------------------------------------------------ material
def test_material_examples():
    I = np.eye(2)
    assert np.allclose(apply_M(I, MAT), I / 0.7)
    assert np.allclose(apply_Minv(I, MAT), 0.7 * I)
    off = sym(0.0, 1.0, 0.0)
    assert np.allclose(apply_Minv(off, MAT), 1.3 * off)
    dev = sym(2.0, -1.0, -2.0)
    assert np.allclose(apply_M(dev, MAT), dev / 1.3)


@given(sym3, st.floats(0.0, 0.49), st.floats(0.1, 10.0))
def test_material_inverse_pair(s, nu, D):
    mat = MaterialParams(D, nu)
    T = sym(*s)
    assert np.allclose(apply_Minv(apply_M(T, mat), mat), T, atol=1e-9)
    assert np.allclose(apply_M(apply_Minv(T, mat), mat), T, atol=1e-9)


def test_material_validation():
    with pytest.raises(ValueError):
        MaterialParams(0.0)
    with pytest.raises(ValueError):
        MaterialParams(1.0, 0.5)


# ------------------------------------------------------------------- a-form
def test_local_a_spd():
    A = local_a(unit_right_triangle(), MAT)[0]
    assert np.allclose(A, A.T)
    assert np.all(np.linalg.eigvalsh(A) > 0)


def test_a_quadratic_form_all_ones():
    m = unit_right_triangle()
    A = assemble_a(m, mat=MAT).toarray()
    one = np.ones(3)
    S = reconstruct_tensor(m.outward_normals[0], one)
    assert one @ A @ one == pytest.approx(0.5 * np.sum(apply_Minv(S, MAT) * S))
    assert one @ A @ one == pytest.approx(0.7)


def test_a_matches_quadrature_oracle():
    m = two_triangle_square()
    A = assemble_a(m, mat=MAT).toarray()
    rule = triangle_rule(2)
    oracle = np.zeros_like(A)
    for T in range(m.n_triangles):
        n = m.outward_normals[T]
        for i in range(3):
            for j in range(3):
                Si = reconstruct_tensor(n, np.eye(3)[i])
                Sj = reconstruct_tensor(n, np.eye(3)[j])
                val = sum(w * m.area[T] * np.sum(apply_Minv(Si, MAT) * Sj) for w in rule.weights)
                oracle[m.tri_edges[T, i], m.tri_edges[T, j]] += val
    assert np.max(np.abs(A - oracle)) <= 1e-12


def test_A_positive_definite_on_free_dofs(lshape_mixed):
    m = refine_nvb(lshape_mixed, [2, 3])
    s = build_spaces(m)
    A = assemble_a(m, s, MAT)[s.sigma_dofs][:, s.sigma_dofs].toarray()
    assert np.allclose(A, A.T)
    assert np.linalg.eigvalsh(A).min() > 0


# ------------------------------------------------------------------- b-form
def test_b_constant_identity_moment_vanishes(square8):
    # tau = I has tau_nn = 1 on every edge; the closed boundary integral of a constant
    # normal derivative is zero on each triangle
    B = assemble_b(square8)
    assert np.max(np.abs(B @ np.ones(square8.n_edges))) <= 1e-13


def test_b_against_edge_quadrature_oracle(lshape_mixed):
    m = lshape_mixed
    S = sym(1.0, 0.3, -0.5)
    tau = np.einsum("ei,ij,ej->e", m.edge_normals, S, m.edge_normals)
    B = assemble_b(m).toarray()
    s, w = edge_rule(3)
    oracle = np.zeros(m.n_vertices)
    for T, tri in enumerate(m.triangles):
        for k in range(3):
            a, b = m.vertices[tri[(k + 1) % 3]], m.vertices[tri[(k + 2) % 3]]
            n = m.outward_normals[T, k]
            tnn = n @ S @ n
            for i in range(3):
                dn = m.grad_lambda[T, i] @ n
                oracle[tri[i]] += np.linalg.norm(b - a) * np.sum(w * tnn * dn)
    assert np.allclose(B @ tau, oracle, atol=1e-13)


def test_b_constant_deflection(rng, lshape_mixed):
    B = assemble_b(lshape_mixed)
    for _ in range(5):
        tau = rng.normal(size=lshape_mixed.n_edges)
        assert abs(np.ones(lshape_mixed.n_vertices) @ (B @ tau)) <= 1e-12


def test_b_dual_formula(rng):
    m = refine_nvb(build_domain("lshape", 2), [0, 1, 5, 8])
    P = local_b(m)
    D = local_b_tangential(m)
    assert np.max(np.abs(P - D)) <= 1e-12
    Bp, Bt = assemble_b(m), assemble_b(m, tangential=True)
    for _ in range(50):
        tau = rng.normal(size=m.n_edges)
        assert np.max(np.abs(Bp @ tau - Bt @ tau)) <= 1e-12


# --------------------------------------------------------------------- load
def test_load_hat_integrals(square8):
    s = build_spaces(square8)
    F1 = assemble_load(square8, s, lambda x: np.ones(x.shape[:-1]))
    z = int(np.flatnonzero(np.all(np.isclose(square8.vertices, [0.5, 0.5]), axis=1))[0])
    assert F1[z] == pytest.approx(square8.area[square8.vertex_triangles(z)].sum() / 3)
    F10 = assemble_load(square8, s, lambda x: np.full(x.shape[:-1], 10.0))
    assert np.allclose(F10, 10 * F1)


# -------------------------------------------------------------------- solving
def test_zero_load_zero_solution(square8):
    _, _, sigma, u = solve_plate(square8, MAT, lambda x: np.zeros(x.shape[:-1]))
    assert not np.any(sigma.edge_values) and not np.any(u.coefficients)


def test_sparse_equals_dense_on_small_mesh():
    m = build_domain("lshape", 1, "lshape_mixed")
    s = build_spaces(m)
    sysm = build_saddle_system(m, s, MAT, lambda x: 1.0 + x[..., 0] ** 2)
    sigma, u = solve_saddle(sysm)
    x = np.linalg.solve(sysm.matrix.toarray(), sysm.rhs)
    ns = sysm.A.shape[0]
    assert np.allclose(sigma.edge_values[s.sigma_dofs], x[:ns], atol=1e-12, rtol=0)
    assert np.allclose(u.coefficients[s.u_dofs], x[ns:], atol=1e-12, rtol=0)
    assert np.all(sigma.edge_values[~s.sigma_free] == 0)
    assert np.all(u.coefficients[~s.u_free] == 0)


def test_galerkin_consistency_and_residual(lshape_mixed):
    m = refine_uniform(lshape_mixed)
    f = lambda x: 10.0 + np.sin(x[..., 0])
    s, sysm, sigma, u = solve_plate(m, MAT, f)
    A, B = sysm.A, sysm.B
    sv, uv = sigma.edge_values[s.sigma_dofs], u.coefficients[s.u_dofs]
    assert np.max(np.abs(A @ sv + B.T @ uv)) <= 1e-9
    assert np.max(np.abs(B @ sv + sysm.load)) <= 1e-9 * (1 + np.abs(sysm.load).max())


def test_bending_factor_scaling(lshape_mixed):
    f = lambda x: np.full(x.shape[:-1], 10.0)
    _, _, s1, u1 = solve_plate(lshape_mixed, MaterialParams(1.0), f)
    _, _, s2, u2 = solve_plate(lshape_mixed, MaterialParams(2.0), f)
    assert np.allclose(s1.edge_values, s2.edge_values, rtol=1e-12, atol=1e-13)
    assert np.allclose(u2.coefficients, u1.coefficients / 2.0, rtol=1e-12, atol=1e-14)


def test_singular_system_reported():
    m = two_triangle_square()
    s = build_spaces(m)
    A = sp.csr_matrix((s.dim_sigma, s.dim_sigma))
    B = sp.csr_matrix((1, s.dim_sigma))
    with pytest.raises(SolverError):
        solve_saddle(SaddleSystem(s, A, B, np.ones(1)))


@pytest.mark.slow
def test_quadrature_degree_sweep_problem1():
    """E_h barely moves when the quadrature degree goes from 4 to 10 on a graded mesh."""
    from runs import problem1_run
    from hhjplate.assembly import corner_mask
    from hhjplate.postprocess import build_uhstar
    p = problem1()
    rec = next(r for r in problem1_run("eta") if r.N >= 8000)
    m = rec.mesh
    special = corner_mask(m, (0.0, 0.0))
    vals = []
    for deg in (4, 10):
        s, _, sigma, u = solve_plate(m, MAT, p.exact.f, quad_degree=deg, special=special)
        us = build_uhstar(m, s, sigma, u, MAT)
        E = np.hypot(error_moment_L2(m, p.exact, sigma, MAT, quad_degree=deg, special=special),
                     error_u_2h(m, p.exact, us, quad_degree=deg, special=special))
        vals.append(E)
    assert abs(vals[0] - vals[1]) / vals[1] < 1e-3
