import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import square_grid, two_triangle_square, unit_right_triangle
from hhjplate.assembly import MaterialParams, apply_M, solve_plate
from hhjplate.estimators import (IndicatorField, data_oscillation, error_moment_L2,
                                 error_moment_L2_local, error_u_2h, error_u_2h_local, error_u_H1,
                                 eta_indicator, jump_edges, zeta_indicator)
from hhjplate.manufactured import (Expression, ExactSolution, ExactSolutionUnavailable, problem2,
                                   problem3, solution_from_expression)
from hhjplate.mesh import BoundaryLabel
from hhjplate.postprocess import build_uhstar, recover_Rh
from hhjplate.spaces import DeflectionField, MomentField, interpolate_Ih, sym

MAT = MaterialParams()
FREE = BoundaryLabel.FREE
zero_f = lambda x: np.zeros(np.asarray(x).shape[:-1])


def constant_moment(mesh, S):
    n = mesh.edge_normals
    return MomentField(mesh, np.einsum("ei,ij,ej->e", n, S, n))


def p2_from_vertices(mesh, vv):
    vv = np.asarray(vv, float)
    mid = 0.5 * (vv[mesh.edges[:, 0]] + vv[mesh.edges[:, 1]])
    return DeflectionField(mesh, 2, np.concatenate([vv, mid]))


def zero_solution():
    z = lambda x: np.zeros(np.asarray(x).shape[:-1])
    return ExactSolution(f=z, u=z, grad_u=lambda x: np.zeros(np.asarray(x).shape),
                         hess_u=lambda x: np.zeros(np.asarray(x).shape[:-1] + (2, 2)))


# ----------------------------------------------------------------------- eta
def test_eta_zero_fields(square8):
    m = square8
    eta = eta_indicator(m, MomentField(m, np.zeros(m.n_edges)),
                        DeflectionField(m, 2, np.zeros(m.n_vertices + m.n_edges)), zero_f, MAT)
    assert eta.total == 0.0 and len(eta) == m.n_triangles


def test_eta_vanishes_for_c1_quadratic():
    m = square_grid(4, FREE)
    u = lambda x: x[..., 0] ** 2 - 0.5 * x[..., 0] * x[..., 1] + 2.0 * x[..., 1] ** 2
    us = interpolate_Ih(m, u, degree=2)
    sigma = constant_moment(m, apply_M(sym(2.0, -0.5, 4.0), MAT))
    eta = eta_indicator(m, sigma, us, zero_f, MAT)
    assert np.max(eta.values) <= 1e-10


def test_eta_single_kink_edge():
    # piecewise linear hat on vertex (1,0): gradient (1,-1) on one side, 0 on the other
    m = two_triangle_square(FREE)
    vv = np.zeros(4)
    vv[1] = 1.0
    us = p2_from_vertices(m, vv)
    eta = eta_indicator(m, MomentField(m, np.zeros(m.n_edges)), us, zero_f, MAT)
    assert eta.values ** 2 == pytest.approx([2.0, 2.0], rel=1e-12)


def test_eta_clamped_boundary_trace():
    # the same hat on a clamped square also picks up the traces on the two boundary edges at (1,0)
    m = two_triangle_square()
    vv = np.zeros(4)
    vv[1] = 1.0
    eta = eta_indicator(m, MomentField(m, np.zeros(m.n_edges)), p2_from_vertices(m, vv), zero_f, MAT)
    # T0 holds the hat: (d_n = -1 on y=0) + (d_n = 1 on x=1) + diagonal 2
    assert eta.values ** 2 == pytest.approx([4.0, 2.0], rel=1e-12)


def test_eta_load_term():
    m = unit_right_triangle(FREE)
    f = lambda x: np.full(np.asarray(x).shape[:-1], 10.0)
    eta = eta_indicator(m, MomentField(m, np.zeros(3)), DeflectionField(m, 2, np.zeros(6)), f, MAT)
    assert eta.total == pytest.approx(0.5 * 10.0 * math.sqrt(0.5), rel=1e-12)


def test_eta_errors(square8):
    m = square8
    s0 = MomentField(m, np.zeros(m.n_edges))
    with pytest.raises(ExactSolutionUnavailable):
        eta_indicator(m, s0, DeflectionField(m, 2, np.zeros(m.n_vertices + m.n_edges)), None, MAT)
    with pytest.raises(ValueError):
        eta_indicator(m, s0, DeflectionField(m, 1, np.zeros(m.n_vertices)), zero_f, MAT)


def test_jump_set_excludes_ss_and_free(lshape_mixed):
    e = jump_edges(lshape_mixed)
    assert np.all(lshape_mixed.edge_labels[e] == BoundaryLabel.INTERIOR)


# ---------------------------------------------------------------------- zeta
def test_zeta_zero_fields(square8):
    m = square8
    u = DeflectionField(m, 1, np.zeros(m.n_vertices))
    s0 = MomentField(m, np.zeros(m.n_edges))
    z = zeta_indicator(m, s0, recover_Rh(m, s0), u, DeflectionField(m, 2, np.zeros(m.n_vertices + m.n_edges)))
    assert z.total == 0.0


def test_zeta_linear_moment_oracle():
    m = square_grid(3)
    tau = lambda x: sym(1.0 + 2.0 * x[..., 0], -x[..., 1], 0.5 + x[..., 0] - 3.0 * x[..., 1])
    n = m.edge_normals
    sigma = MomentField(m, np.einsum("ei,eij,ej->e", n, tau(m.midpoints), n))
    rh = recover_Rh(m, sigma)
    u = DeflectionField(m, 1, np.zeros(m.n_vertices))
    z = zeta_indicator(m, sigma, rh, u, DeflectionField(m, 2, np.zeros(m.n_vertices + m.n_edges)))
    # the edge-midpoint rule is exact for the quadratic |tau - S_T|^2
    S = sigma.element_tensors()
    mids = m.midpoints[m.tri_edges]                             # (nt, 3, 2)
    d = tau(mids) - S[:, None]
    oracle = m.area * np.sum(d ** 2, axis=(2, 3)).mean(axis=1)
    assert z.values ** 2 == pytest.approx(oracle, rel=1e-10, abs=1e-14)
    assert z.total > 0


def test_zeta_gradient_part():
    m = two_triangle_square(FREE)
    vv = np.zeros(4)
    vv[1] = 1.0
    u = DeflectionField(m, 1, vv)
    s0 = MomentField(m, np.zeros(m.n_edges))
    ebub = np.zeros(m.n_vertices + m.n_edges)
    ebub[:4] = vv
    ebub[4:] = 0.5 * (vv[m.edges[:, 0]] + vv[m.edges[:, 1]])
    # u_h^* equals u_h as a function, so only the (zero) moment part would remain
    z = zeta_indicator(m, s0, _zero_nodal(m), u, DeflectionField(m, 2, ebub))
    assert z.total <= 1e-14


def _zero_nodal(m):
    class Zero:
        def values(self, tris, bary):
            return np.zeros((len(tris), len(bary), 2, 2))
    return Zero()


@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=30))
def test_indicator_total_invariant(vals):
    f = IndicatorField(np.array(vals))
    assert f.total ** 2 == pytest.approx(np.sum(np.square(vals)), rel=1e-12, abs=1e-300)


def test_indicator_rejects_negative():
    with pytest.raises(ValueError):
        IndicatorField(np.array([1.0, -0.1]))


# ---------------------------------------------------------------- exact errors
def test_zero_error_for_exact_fields():
    m = square_grid(4, FREE)
    expr = Expression.polynomial({(2, 0): 1.0, (1, 1): -0.5, (0, 2): 2.0, (1, 0): 0.3})
    sol = solution_from_expression(expr, MAT)
    us = interpolate_Ih(m, sol.u, degree=2)
    assert error_u_2h(m, sol, us) <= 1e-12
    assert error_moment_L2(m, sol, constant_moment(m, apply_M(sym(2.0, -0.5, 4.0), MAT)), MAT) <= 1e-12
    lin = solution_from_expression(Expression.polynomial({(1, 0): 2.0, (0, 1): -1.0, (0, 0): 3.0}), MAT)
    assert error_u_H1(m, lin, interpolate_Ih(m, lin.u, degree=1)) <= 1e-13


def test_pure_jump_u_2h_oracle():
    # 4(1-x)y on the lower triangle, 4x(1-y) on the upper one: the diagonal bubble
    m = two_triangle_square()
    diag = int(np.flatnonzero(np.all(np.isclose(m.midpoints, 0.5), axis=1))[0])
    c = np.zeros(m.n_vertices + m.n_edges)
    c[m.n_vertices + diag] = 1.0
    us = DeflectionField(m, 2, c)
    vol, jmp = error_u_2h_local(m, zero_solution(), us)
    assert vol == pytest.approx([16.0, 16.0], rel=1e-12)
    # diagonal: jump (-4, 4).n squared = 32; each boundary edge: int_0^1 16 s^2 = 16/3
    assert np.sort(jmp) == pytest.approx(sorted([32.0] + [16.0 / 3.0] * 4), rel=1e-12)
    assert error_u_2h(m, zero_solution(), us) == pytest.approx(16.0 / math.sqrt(3.0), rel=1e-12)


def test_unavailable_errors_for_load_only_problem():
    p = problem2()
    m = p.initial_mesh()
    u1 = DeflectionField(m, 1, np.zeros(m.n_vertices))
    u2 = DeflectionField(m, 2, np.zeros(m.n_vertices + m.n_edges))
    with pytest.raises(ExactSolutionUnavailable):
        error_u_2h(m, p.exact, u2)
    with pytest.raises(ExactSolutionUnavailable):
        error_u_H1(m, p.exact, u1)
    with pytest.raises(ExactSolutionUnavailable):
        error_moment_L2(m, p.exact, MomentField(m, np.zeros(m.n_edges)), MAT)


# --------------------------------------------------------------- oscillation
def test_oscillation_constant_on_triangle():
    m = unit_right_triangle()
    f = lambda x: np.full(np.asarray(x).shape[:-1], 10.0)
    assert data_oscillation(m, f) == pytest.approx(3.5355339, rel=1e-7)
    assert data_oscillation(m, None) == 0.0 and data_oscillation(m, zero_f) == 0.0


def test_oscillation_h2_scaling():
    f = problem3().exact.f
    r = data_oscillation(square_grid(4), f) / data_oscillation(square_grid(8), f)
    assert r == pytest.approx(4.0, rel=0.05)


def test_oscillation_mean_projection():
    m = square_grid(2)
    assert data_oscillation(m, lambda x: np.full(np.asarray(x).shape[:-1], 3.0), r=3) <= 1e-14
    with pytest.raises(NotImplementedError):
        data_oscillation(m, zero_f, r=4)


# -------------------------------------------------------- estimator behaviour
@pytest.fixture(scope="module")
def p3_sequence():
    p = problem3()
    out = []
    m = p.initial_mesh()
    from hhjplate.mesh import refine_uniform
    for _ in range(3):
        s, _, sigma, u = solve_plate(m, MAT, p.exact.f)
        us = build_uhstar(m, s, sigma, u, MAT)
        out.append((m, sigma, u, us))
        m = refine_uniform(m)
    return p, out


def test_local_efficiency(p3_sequence):
    p, seq = p3_sequence
    for m, sigma, _, us in seq:
        eta = eta_indicator(m, sigma, us, p.exact.f, MAT)
        mom = np.sqrt(error_moment_L2_local(m, p.exact, sigma, MAT))
        vol, jmp = error_u_2h_local(m, p.exact, us)
        # the edge terms of the triangle's own boundary
        je = np.zeros(m.n_edges)
        je[jump_edges(m)] = jmp
        local = mom + np.sqrt(vol + je[m.tri_edges].sum(axis=1))
        # omitting the oscillation term only shrinks the denominator
        assert np.max(eta.values / local) < 50


@pytest.mark.slow
def test_zeta_asymptotically_exact_on_square():
    from runs import table1_run
    effs = [r.report.eff_zeta for r in table1_run() if r.N >= 2048]
    assert len(effs) == 3
    assert all(0.9 <= e <= 1.1 for e in effs)


@pytest.mark.slow
@pytest.mark.parametrize("which", ["problem1", "problem3"])
def test_eta_reliability_band(which):
    from runs import problem1_run, table1_run
    recs = problem1_run("eta") if which == "problem1" else table1_run()
    effs = np.array([r.report.eff_eta for r in recs])
    assert np.all((effs >= 0.05) & (effs <= 5))
    last = effs[-4:]
    assert last.max() / last.min() - 1 < 0.25


@pytest.mark.slow
def test_zeta_exactness_problem1():
    from runs import problem1_run
    assert 0.9 <= problem1_run("zeta")[-1].report.eff_zeta <= 1.1


@pytest.mark.slow
def test_report_invariants():
    from runs import problem1_run
    for r in problem1_run("eta"):
        rep = r.report
        assert rep.E_h ** 2 == pytest.approx(rep.moment_L2 ** 2 + rep.u_2h ** 2, rel=1e-12)
        assert rep.e_h ** 2 == pytest.approx(rep.moment_L2 ** 2 + rep.u_H1 ** 2, rel=1e-12)
        assert rep.eff_eta == pytest.approx(rep.E_h / rep.eta_total, rel=1e-14)
        assert rep.eff_zeta == pytest.approx(rep.e_h / rep.zeta_total, rel=1e-14)
