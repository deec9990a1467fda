"""Closed-form reference solutions.

Two families make the solver and simulator checkable end to end:

* quadratic cases u(x) = <Q x, x>, which solve the maximal Pucci equation
  exactly with the constant right-hand side returned by ``pucci_plus`` of
  the Hessian 2Q, and

* the radial annulus function solving

      lam u_rr + (N - 1) Lam u_r / r = -N,   u(delta) = 0, u'(R+delta) = 0,

  concave, increasing and positive on (delta, R+delta]; it dominates the
  scaled expected exit time of the annulus game at the discrete level for
  small eps (the barrier inequality checked by ``radial_barrier_margins``).
"""

import math
from dataclasses import dataclass

import numpy as np

from .dpp import SearchConfig
from .errors import DegenerateBranchMismatch, OutOfRange
from .fields import constant_field, quadratic_form_field
from .pucci import pucci_plus, symmetrize

_LOG_BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class RadialSolution:
    """Coefficients of the annulus solution, valid on 0 < r <= R + delta.

    ``branch`` is "power" when lam != Lam (N-1) and "log" at the resonance
    lam = Lam (N-1), where the power formula degenerates.
    """

    params: object
    delta: float
    R: float
    a: float
    b: float
    branch: str


def radial_coefficients(params, delta, R, branch=None):
    """Solve the two boundary conditions for (a, b) in closed form.

    The branch is selected automatically by |lam - Lam (N-1)| < 1e-12;
    forcing "power" inside that window raises DegenerateBranchMismatch.
    """
    if not (0 < delta < R):
        raise ValueError("require 0 < delta < R")
    if not params.lam > 0:
        raise ValueError("radial solution requires lam > 0")
    n = params.dim
    sigma = params.Lam * (n - 1) + params.lam
    resonant = abs(params.lam - params.Lam * (n - 1)) < _LOG_BRANCH_TOL
    if branch is None:
        branch = "log" if resonant else "power"
    elif branch == "power" and resonant:
        raise DegenerateBranchMismatch("lam = Lam (N-1): power branch coefficients blow up")
    outer = R + delta
    if branch == "log":
        a = n * outer * outer / sigma
        b = n * delta * delta / (2.0 * sigma) - a * math.log(delta)
    else:
        kappa = params.Lam * (n - 1) / params.lam
        a = n * outer ** (1.0 + kappa) / sigma
        b = n * delta * delta / (2.0 * sigma) - a * delta ** (1.0 - kappa) / (1.0 - kappa)
    return RadialSolution(params=params, delta=delta, R=R, a=a, b=b, branch=branch)


def _check_range(sol, r):
    r = np.asarray(r, dtype=float)
    hi = sol.R + sol.delta
    if np.any(r <= 0) or np.any(r > hi * (1.0 + 1e-12)):
        raise OutOfRange(f"radius outside (0, {hi}]")
    return r


def radial_eval(sol, r):
    """u, u_r, u_rr at radius r (scalar or array).

    The same closed form solves the equation below delta as well, which is
    how stencil points slightly inside the hole are handled.
    """
    r = _check_range(sol, r)
    n = sol.params.dim
    sigma = sol.params.Lam * (n - 1) + sol.params.lam
    if sol.branch == "log":
        u = -n * r * r / (2.0 * sigma) + sol.a * np.log(r) + sol.b
        u_r = -n * r / sigma + sol.a / r
        u_rr = -n / sigma - sol.a / (r * r)
    else:
        kappa = sol.params.Lam * (n - 1) / sol.params.lam
        u = -n * r * r / (2.0 * sigma) + sol.a * r ** (1.0 - kappa) / (1.0 - kappa) + sol.b
        u_r = -n * r / sigma + sol.a * r ** (-kappa)
        u_rr = -n / sigma - sol.a * kappa * r ** (-kappa - 1.0)
    return u, u_r, u_rr


def radial_ode_residual(sol, r):
    """lam u_rr + (N-1) Lam u_r / r + N; zero for a valid solution."""
    r = _check_range(sol, r)
    _, u_r, u_rr = radial_eval(sol, r)
    n = sol.params.dim
    return sol.params.lam * u_rr + (n - 1) * sol.params.Lam * u_r / r + n


def radial_pucci_consistency(sol, params, r):
    """|pucci_plus(radial Hessian) + N| at radius r.

    The radial Hessian has eigenvalue u_rr once and u_r / r with
    multiplicity N-1; with u_rr < 0 < u_r the operator picks lam on the
    radial direction and Lam tangentially, reproducing the defining
    equation.
    """
    r = float(_check_range(sol, np.asarray(r, dtype=float)))
    _, u_r, u_rr = radial_eval(sol, r)
    eigs = [float(u_rr)] + [float(u_r / r)] * (params.dim - 1)
    return abs(pucci_plus(params, np.diag(eigs)) + params.dim)


@dataclass(frozen=True)
class QuadraticCase:
    """Manufactured solution u(x) = <Q x, x> with constant right-hand side."""

    params: object
    Q: np.ndarray
    f_const: float

    def u(self, pts):
        return quadratic_form_field(self.Q)(pts)

    @property
    def f(self):
        return constant_field(self.f_const)

    @property
    def g(self):
        return quadratic_form_field(self.Q)

    def hessian(self, x=None):
        return 2.0 * self.Q


def make_quadratic_case(params, Q):
    """Exact solution of the operator equation with f = pucci_plus(2Q)."""
    Q = symmetrize(Q)
    return QuadraticCase(params=params, Q=Q, f_const=pucci_plus(params, 2.0 * Q))


def radial_field(sol):
    """u(|x|) as a vectorised field on points."""

    def f(pts):
        r = np.linalg.norm(np.asarray(pts, dtype=float), axis=1)
        u, _, _ = radial_eval(sol, r)
        return u

    return f


def radial_barrier_margins(sol, params, eps, radii, search=None):
    """Slack of the discrete supersolution inequality

        u(x) >= eps^2 / 2 + (1/2N) sup_basis sum_i [u(x + eps mu_i v_i)
                + u(x - eps mu_i v_i)]

    at points x = (r, 0, ..., 0) with the function sampled exactly.  All
    margins nonnegative means the inequality holds at every tested radius;
    it is expected for eps small enough.

    The supremum is taken over the axis basis, the rotation grid of the
    search config and the analytic radial eigenframe, all evaluated in one
    vectorised pass per radius (golden refinement is not applied here).
    """
    from .dpp import _candidate_pairs, _dirs_from_angles_2d, _dirs_from_triple, _rotation_grid

    if search is None:
        search = SearchConfig(mode="grid", step=math.pi / 200 if params.dim == 2 else math.pi / 20)
    if not eps * math.sqrt(params.Lam) < sol.delta:
        raise ValueError("need eps * sqrt(Lam) < delta so stencils stay in range")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= sol.delta) or np.any(radii >= sol.R):
        raise ValueError("test radii must lie strictly inside (delta, R)")
    phi = radial_field(sol)

    frames = [np.eye(params.dim)]
    if search.uses_grid:
        for angles in _rotation_grid(params.dim, search.step):
            if params.dim == 2:
                frames.append(_dirs_from_angles_2d(angles[0])[0])
            else:
                frames.append(_dirs_from_triple(angles))
    # the analytic radial eigenframe at (r, 0, ..., 0) is the axis frame,
    # which frames[0] already covers
    dirs = np.stack(frames)
    margins = np.empty(radii.size)
    for k, r in enumerate(radii):
        x = np.zeros(params.dim)
        x[0] = r
        u, _, _ = radial_eval(sol, r)
        pts = np.tile(x, (dirs.shape[0], 1))
        S_all, _ = _candidate_pairs(phi, pts, eps, params.lam, params.Lam, dirs)
        margins[k] = float(u) - (eps * eps / 2.0 + float(S_all.max()) / (2.0 * params.dim))
    return margins
