import numpy as np
import pytest

from puccimax import (
    DegenerateBranchMismatch,
    OutOfRange,
    PucciParams,
    make_quadratic_case,
    pucci_plus,
    radial_barrier_margins,
    radial_coefficients,
    radial_eval,
    radial_ode_residual,
    radial_pucci_consistency,
)
from puccimax.oracles import RadialSolution, radial_field

CASES = [
    PucciParams(1.0, 1.0, 2),  # log branch: lam = Lam (N-1)
    PucciParams(1.0, 2.0, 2),
    PucciParams(1.0, 4.0, 2),
    PucciParams(1.0, 2.0, 3),
    PucciParams(1.0, 4.0, 3),
]


def test_branch_selection():
    # lam = Lam (N-1) within lam <= Lam forces N = 2 and lam = Lam
    assert radial_coefficients(PucciParams(1.0, 1.0, 2), 0.5, 2.0).branch == "log"
    assert radial_coefficients(PucciParams(2.5, 2.5, 2), 0.5, 2.0).branch == "log"
    assert radial_coefficients(PucciParams(1.0, 2.0, 2), 0.5, 2.0).branch == "power"
    assert radial_coefficients(PucciParams(1.0, 1.0, 3), 0.5, 2.0).branch == "power"
    with pytest.raises(DegenerateBranchMismatch):
        radial_coefficients(PucciParams(1.0, 1.0, 2), 0.5, 2.0, branch="power")


def test_power_branch_exponent():
    # kappa = Lam (N-1) / lam; exponent of the power term is 1 - kappa
    params = PucciParams(1.0, 2.0, 3)
    kappa = params.Lam * (params.dim - 1) / params.lam
    assert 1.0 - kappa == -3.0


def test_boundary_conditions():
    for params in CASES:
        sol = radial_coefficients(params, 0.5, 2.0)
        u_d, _, _ = radial_eval(sol, 0.5)
        _, up_out, _ = radial_eval(sol, 2.5)
        assert abs(u_d) <= 1e-10
        assert abs(up_out) <= 1e-10


def test_monotone_concave_positive():
    for params in CASES:
        sol = radial_coefficients(params, 0.5, 2.0)
        r = np.linspace(0.5 + 1e-6, 2.5 - 1e-9, 200)
        u, u_r, u_rr = radial_eval(sol, r)
        assert np.all(u_r > 0)
        assert np.all(u_rr < 0)
        assert np.all(u[r > 0.5 + 1e-5] > 0)


def test_ode_residual_100_radii():
    for params in CASES:
        sol = radial_coefficients(params, 0.5, 2.0)
        r = np.linspace(0.5, 2.5, 100)
        res = radial_ode_residual(sol, r)
        _, _, u_rr = radial_eval(sol, r)
        assert np.max(np.abs(res)) <= 1e-9 * (1.0 + np.max(np.abs(u_rr)))


def test_ode_residual_scale_covariance():
    for params in CASES[:3]:
        sol = radial_coefficients(params, 1.0, 4.0)  # (delta, R) doubled
        r = np.linspace(1.0, 5.0, 100)
        assert np.max(np.abs(radial_ode_residual(sol, r))) <= 1e-9


def test_derivatives_against_finite_differences():
    # independent oracle: centered differences of the closed-form u; the
    # second difference loses digits for steep branches (kappa = 12 pushes
    # the homogeneous term to ~1e9), so its tolerance is only a sanity
    # level, while the exact-precision check is the symbolic ODE residual
    for params in CASES:
        sol = radial_coefficients(params, 0.5, 2.0)
        dr = 1e-5
        for r in np.linspace(0.7, 2.3, 7):
            um, _, _ = radial_eval(sol, r - dr)
            u0, u_r, u_rr = radial_eval(sol, r)
            up, _, _ = radial_eval(sol, r + dr)
            fd_first = (up - um) / (2 * dr)
            fd_second = (up + um - 2 * u0) / dr**2
            assert fd_first == pytest.approx(u_r, rel=1e-6, abs=1e-8)
            assert fd_second == pytest.approx(u_rr, rel=1e-2)


def test_extension_below_delta():
    sol = radial_coefficients(PucciParams(1.0, 2.0, 2), 0.5, 2.0)
    r = 0.45  # inside the hole, still solves the same equation
    assert abs(radial_ode_residual(sol, r)) <= 1e-9


def test_out_of_range():
    sol = radial_coefficients(PucciParams(1.0, 2.0, 2), 0.5, 2.0)
    with pytest.raises(OutOfRange):
        radial_eval(sol, 0.0)
    with pytest.raises(OutOfRange):
        radial_eval(sol, 2.6)


def test_pucci_consistency_along_radii():
    for params in CASES:
        sol = radial_coefficients(params, 0.5, 2.0)
        for r in np.linspace(0.55, 2.0, 10):
            assert radial_pucci_consistency(sol, params, r) <= 1e-9


def test_pucci_consistency_negative_control():
    # scaling ``a`` keeps the linear equation satisfied (it multiplies the
    # homogeneous part), but flipping its sign breaks the u_rr < 0 < u_r
    # sign pattern the operator evaluation relies on
    params = PucciParams(1.0, 2.0, 2)
    sol = radial_coefficients(params, 0.5, 2.0)
    corrupted = RadialSolution(
        params=params, delta=sol.delta, R=sol.R, a=-sol.a, b=sol.b, branch=sol.branch
    )
    assert radial_pucci_consistency(corrupted, params, 1.2) > 1e-3


def test_lam_equals_Lam_reduces_to_laplacian():
    params = PucciParams(1.5, 1.5, 2)
    sol = radial_coefficients(params, 0.5, 2.0)
    for r in np.linspace(0.6, 2.2, 5):
        _, u_r, u_rr = radial_eval(sol, r)
        # P+ = lam * (u_rr + u_r / r) when lam = Lam
        assert params.lam * (u_rr + u_r / r) == pytest.approx(-2.0, abs=1e-9)


# --- quadratic cases ---


def test_quadratic_case_constants():
    p = PucciParams(1.0, 2.0, 2)
    assert make_quadratic_case(p, np.eye(2)).f_const == pytest.approx(8.0, abs=1e-12)
    assert make_quadratic_case(p, np.diag([1.0, -1.0])).f_const == pytest.approx(2.0, abs=1e-12)
    zero = make_quadratic_case(p, np.zeros((2, 2)))
    assert zero.f_const == 0.0
    assert np.all(zero.u(np.array([[0.3, 0.4]])) == 0.0)


def test_quadratic_case_recompute_invariant():
    rng = np.random.default_rng(12)
    p = PucciParams(1.0, 2.0, 2)
    for _ in range(10):
        q = rng.uniform(-1, 1, (2, 2))
        q = 0.5 * (q + q.T)
        case = make_quadratic_case(p, q)
        assert abs(case.f_const - pucci_plus(p, 2 * q)) <= 1e-12


def test_quadratic_case_degenerate_params():
    p0 = PucciParams(0.0, 2.0, 2)
    case = make_quadratic_case(p0, np.eye(2))
    assert case.f_const == pytest.approx(8.0, abs=1e-12)  # only positive part contributes


# --- barrier ---


def test_barrier_holds_for_small_eps():
    params = PucciParams(1.0, 2.0, 2)
    sol = radial_coefficients(params, 0.5, 2.0)
    radii = np.linspace(0.55, 1.95, 9)
    for eps in (0.02, 0.01):
        margins = radial_barrier_margins(sol, params, eps, radii)
        assert np.all(margins >= 0.0)


def test_barrier_margins_3d():
    params = PucciParams(1.0, 2.0, 3)
    sol = radial_coefficients(params, 0.5, 2.0)
    radii = np.linspace(0.6, 1.9, 5)
    margins = radial_barrier_margins(sol, params, 0.02, radii)
    assert np.all(margins >= 0.0)


def test_barrier_requires_small_eps():
    params = PucciParams(1.0, 2.0, 2)
    sol = radial_coefficients(params, 0.5, 2.0)
    with pytest.raises(ValueError):
        radial_barrier_margins(sol, params, 0.5, [1.0])  # eps*sqrt(Lam) >= delta


def test_radial_field_matches_eval():
    params = PucciParams(1.0, 2.0, 2)
    sol = radial_coefficients(params, 0.5, 2.0)
    fld = radial_field(sol)
    pts = np.array([[1.0, 0.0], [0.0, 1.5], [0.6, 0.8]])
    expect = radial_eval(sol, np.linalg.norm(pts, axis=1))[0]
    assert np.allclose(fld(pts), expect, atol=0)
