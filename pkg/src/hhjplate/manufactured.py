"""Exact solutions and loads for the three plate problems.

Closed forms are built from terms ``p(x1, x2) * r**mu * trig(kappa * theta)``
which stay in the same family under differentiation, so Hessians and the
bilaplacian are exact rather than finite-differenced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .assembly import MaterialParams


class ExactSolutionUnavailable(RuntimeError):
    """Raised when exact errors are requested for a problem without a closed form."""


_KEY_DIGITS = 12


@dataclass(frozen=True)
class ExprTerm:
    """``sum_ij c_ij x1^i x2^j * r**mu * trig(kappa*theta)``.

    ``trig`` is ``"cos"`` or ``"sin"``; a pure polynomial is
    ``mu = 0, trig = "cos", kappa = 0``.  ``poly`` maps exponent pairs to
    coefficients (the scalar weight is folded into it).
    """

    poly: tuple  # ((i, j, coef), ...)
    mu: float = 0.0
    trig: str = "cos"
    kappa: float = 0.0

    @property
    def key(self):
        return (round(self.mu, _KEY_DIGITS), self.trig, round(self.kappa, _KEY_DIGITS))

    @property
    def is_polynomial(self):
        return self.mu == 0.0 and self.kappa == 0.0 and self.trig == "cos"


def _poly_dict(poly):
    return {(i, j): c for i, j, c in poly}


def _poly_tuple(d, tol=0.0):
    return tuple(sorted((i, j, c) for (i, j), c in d.items() if abs(c) > tol))


def _normalize(poly, mu, trig, kappa):
    """Canonical form with kappa >= 0; returns None for identically zero terms."""
    if kappa < 0:
        kappa = -kappa
        if trig == "sin":
            poly = {k: -c for k, c in poly.items()}
    if abs(kappa) < 10.0 ** -_KEY_DIGITS:
        kappa = 0.0
        if trig == "sin":
            return None
    if abs(mu) < 10.0 ** -_KEY_DIGITS:
        mu = 0.0
    if not poly:
        return None
    return ExprTerm(_poly_tuple(poly), mu, trig, kappa)


def differentiate(term, axis):
    """Exact partial derivative of one term along ``axis`` (0 -> x1, 1 -> x2).

    Uses dr/dx = x/r, dtheta/dx1 = -sin(theta)/r, dtheta/dx2 = cos(theta)/r
    and the product-to-sum identities, so every output term has the same
    shape as the input.
    """
    out = []
    p = _poly_dict(term.poly)
    dp = {}
    for (i, j), c in p.items():
        if axis == 0 and i > 0:
            dp[(i - 1, j)] = dp.get((i - 1, j), 0.0) + c * i
        elif axis == 1 and j > 0:
            dp[(i, j - 1)] = dp.get((i, j - 1), 0.0) + c * j
    t = _normalize(dp, term.mu, term.trig, term.kappa)
    if t is not None:
        out.append(t)
    if term.is_polynomial:
        return out

    mu, k = term.mu, term.kappa
    a, b = 0.5 * (mu + k), 0.5 * (mu - k)
    # (coefficient, trig, kappa) pairs for d/dx_axis of r^mu trig(k theta), times r^(mu-1)
    if term.trig == "cos":
        if axis == 0:
            pieces = [(a, "cos", k - 1), (b, "cos", k + 1)]
        else:
            pieces = [(b, "sin", k + 1), (-a, "sin", k - 1)]
    else:
        if axis == 0:
            pieces = [(b, "sin", k + 1), (a, "sin", k - 1)]
        else:
            pieces = [(a, "cos", k - 1), (-b, "cos", k + 1)]
    for coef, trig, kap in pieces:
        if coef == 0.0:
            continue
        t = _normalize({ij: c * coef for ij, c in p.items()}, mu - 1.0, trig, kap)
        if t is not None:
            out.append(t)
    return out


class Expression:
    """Sum of :class:`ExprTerm` with like terms merged."""

    def __init__(self, terms=()):
        merged = {}
        for t in terms:
            acc = merged.setdefault(t.key, ({}, t))
            d = acc[0]
            for i, j, c in t.poly:
                d[(i, j)] = d.get((i, j), 0.0) + c
        self.terms = []
        for d, proto in merged.values():
            scale = max((abs(c) for c in d.values()), default=0.0)
            poly = _poly_tuple(d, tol=1e-15 * scale)
            if poly:
                self.terms.append(ExprTerm(poly, proto.mu, proto.trig, proto.kappa))
        self._compile()

    @classmethod
    def polynomial(cls, coeffs):
        """From ``{(i, j): c}``."""
        return cls([ExprTerm(_poly_tuple(dict(coeffs)))])

    def diff(self, axis):
        return Expression([s for t in self.terms for s in differentiate(t, axis)])

    def __add__(self, other):
        return Expression(self.terms + other.terms)

    def scale(self, c):
        return Expression([ExprTerm(tuple((i, j, v * c) for i, j, v in t.poly), t.mu, t.trig, t.kappa)
                           for t in self.terms])

    def times_polynomial(self, coeffs):
        out = []
        for t in self.terms:
            d = {}
            for i, j, c in t.poly:
                for (a, b), v in coeffs.items():
                    d[(i + a, j + b)] = d.get((i + a, j + b), 0.0) + c * v
            out.append(ExprTerm(_poly_tuple(d), t.mu, t.trig, t.kappa))
        return Expression(out)

    def _compile(self):
        monos = sorted({(i, j) for t in self.terms for i, j, _ in t.poly})
        self._monos = np.array(monos, dtype=np.int64).reshape(-1, 2)
        index = {m: n for n, m in enumerate(monos)}
        C = np.zeros((len(monos), len(self.terms)))
        for n, t in enumerate(self.terms):
            for i, j, c in t.poly:
                C[index[(i, j)], n] = c
        self._coef = C
        self._mu = np.array([t.mu for t in self.terms])
        self._kappa = np.array([t.kappa for t in self.terms])
        self._is_sin = np.array([t.trig == "sin" for t in self.terms])
        self._is_poly = np.array([t.is_polynomial for t in self.terms], dtype=bool)

    def __call__(self, x):
        """Evaluate at points ``x`` of shape (..., 2)."""
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        x1 = x[..., 0].ravel()
        x2 = x[..., 1].ravel()
        if not self.terms:
            return np.zeros(shape)
        deg = int(self._monos.max()) if self._monos.size else 0
        p1 = np.vander(x1, deg + 1, increasing=True)
        p2 = np.vander(x2, deg + 1, increasing=True)
        M = p1[:, self._monos[:, 0]] * p2[:, self._monos[:, 1]]
        P = M @ self._coef                                # (npts, nterms)
        if np.all(self._is_poly):
            return P.sum(axis=1).reshape(shape)
        r = np.hypot(x1, x2)
        theta = np.mod(np.arctan2(x2, x1), 2.0 * np.pi)
        at_origin = r == 0.0
        if np.any(at_origin) and np.any(~self._is_poly & (self._mu <= 0.0)):
            raise ValueError("singular term evaluated at r = 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(self._is_poly, 1.0, r[:, None] ** self._mu)
        ang = theta[:, None] * self._kappa
        T = np.where(self._is_sin, np.sin(ang), np.cos(ang))
        F = R * T
        F[at_origin] = np.where(self._is_poly, 1.0, 0.0)
        return np.sum(P * F, axis=1).reshape(shape)


@dataclass
class ExactSolution:
    """Evaluators of u, grad u, Hessian of u and the load f.

    Missing evaluators raise :class:`ExactSolutionUnavailable`.
    """

    f: Callable
    u: Optional[Callable] = None
    grad_u: Optional[Callable] = None
    hess_u: Optional[Callable] = None

    @property
    def has_solution(self):
        return self.u is not None and self.grad_u is not None and self.hess_u is not None

    def require(self, what):
        fn = getattr(self, what)
        if fn is None:
            raise ExactSolutionUnavailable(f"exact {what} is unavailable for this problem")
        return fn


def solution_from_expression(u, mat):
    """Bundle u with its exact derivatives and f = D/(1-nu^2) * bilaplacian(u)."""
    ux, uy = u.diff(0), u.diff(1)
    uxx, uxy, uyy = ux.diff(0), ux.diff(1), uy.diff(1)
    lap = uxx + uyy
    bilap = lap.diff(0).diff(0) + lap.diff(1).diff(1)
    fexpr = bilap.scale(mat.bending_factor / (1.0 - mat.nu ** 2))

    def grad(x):
        return np.stack([ux(x), uy(x)], axis=-1)

    def hess(x):
        a, b, c = uxx(x), uxy(x), uyy(x)
        return np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)

    sol = ExactSolution(f=fexpr, u=u, grad_u=grad, hess_u=hess)
    sol.expressions = {"u": u, "ux": ux, "uy": uy, "uxx": uxx, "uxy": uxy, "uyy": uyy,
                       "lap": lap, "bilap": bilap, "f": fexpr}
    return sol


@dataclass
class ProblemSpec:
    name: str
    domain: str
    bc_scheme: str
    n0: int
    exact: ExactSolution
    material: MaterialParams = field(default_factory=MaterialParams)
    singular_point: Optional[tuple] = None

    def initial_mesh(self):
        from .mesh import build_domain
        return build_domain(self.domain, self.n0, self.bc_scheme)


GAMMA = 0.544483736782464
OMEGA = 3.0 * math.pi / 2.0


def corner_singularity(gamma=GAMMA, omega=OMEGA):
    """``r^(1+gamma) g(theta)`` for the reentrant-corner biharmonic singularity."""
    gm, gp = gamma - 1.0, gamma + 1.0
    A = math.sin(gm * omega) / gm - math.sin(gp * omega) / gp
    B = math.cos(gm * omega) - math.cos(gp * omega)
    mu = 1.0 + gamma
    one = ((0, 0, 1.0),)
    terms = [
        ExprTerm(tuple((i, j, A * c) for i, j, c in one), mu, "cos", gm),
        ExprTerm(tuple((i, j, -A * c) for i, j, c in one), mu, "cos", gp),
        ExprTerm(tuple((i, j, -B / gm * c) for i, j, c in one), mu, "sin", gm),
        ExprTerm(tuple((i, j, B / gp * c) for i, j, c in one), mu, "sin", gp),
    ]
    return Expression([t for t in (_normalize(_poly_dict(t.poly), t.mu, t.trig, t.kappa) for t in terms)
                       if t is not None])


def _expand(factors):
    """Product of polynomials given as dicts."""
    out = {(0, 0): 1.0}
    for f in factors:
        new = {}
        for (a, b), c in out.items():
            for (i, j), v in f.items():
                new[(a + i, b + j)] = new.get((a + i, b + j), 0.0) + c * v
        out = new
    return out


def problem1(mat=None, n0=2):
    """Clamped L-shape with the corner-singular exact solution."""
    mat = mat or MaterialParams()
    bump = _expand([{(2, 0): 1.0, (0, 0): -1.0}] * 2 + [{(0, 2): 1.0, (0, 0): -1.0}] * 2)
    u = corner_singularity().times_polynomial(bump)
    return ProblemSpec("lshape-clamped", "lshape", "all_clamped", n0,
                       solution_from_expression(u, mat), mat, singular_point=(0.0, 0.0))


def problem2(mat=None, n0=2, load=10.0):
    """L-shape, free reentrant edges, simply supported elsewhere, f = 10."""
    mat = mat or MaterialParams()

    def f(x):
        return np.full(np.asarray(x).shape[:-1], float(load))

    return ProblemSpec("lshape-mixed", "lshape", "lshape_mixed", n0, ExactSolution(f=f), mat,
                       singular_point=(0.0, 0.0))


def problem3(mat=None, n0=8):
    """Clamped unit square with u = x1^2 (x1-1)^2 x2^2 (x2-1)^2."""
    mat = mat or MaterialParams()
    sq = {(2, 0): 1.0, (1, 0): -2.0, (0, 0): 1.0}       # (x-1)^2
    u = _expand([{(2, 0): 1.0}, sq, {(0, 2): 1.0}, {(0, i): c for (i, _), c in sq.items()}])
    expr = Expression.polynomial(u)
    return ProblemSpec("square-smooth", "unit_square", "all_clamped", n0,
                       solution_from_expression(expr, mat), mat)


PROBLEMS = {"lshape-clamped": problem1, "lshape-mixed": problem2, "square-smooth": problem3}


def get_problem(name, **kw):
    try:
        return PROBLEMS[name](**kw)
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
