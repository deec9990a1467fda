import math

import numpy as np
import pytest

from puccimax import (
    Ball,
    BasisChoice,
    Box,
    GameConfig,
    GridTooCoarse,
    OutOfLattice,
    PucciParams,
    Region,
    SearchConfig,
    best_response,
    build_value_function,
    consistency_check,
    dpp_apply,
    interpolate,
    pucci_plus,
    residual,
)
from puccimax.fields import constant_field, quadratic_form_field

P = PucciParams(lam=1.0, Lam=2.0, dim=2)
P_EQ = PucciParams(lam=1.0, Lam=1.0, dim=2)
BALL = Ball(center=(0.0, 0.0), radius=1.0)
GRID = SearchConfig(mode="grid", step=math.pi / 4)


def quad_cfg(params=P, eps=0.2, f_const=8.0, q=None):
    q = np.eye(2) if q is None else q
    return GameConfig(
        params=params,
        eps=eps,
        f=constant_field(f_const),
        g=quadratic_form_field(q),
        domain=BALL,
    )


def fill_interior(vf, cfg, fn):
    pts = vf.interior_points()
    vf.values[vf.interior_mask] = fn(pts)
    return vf


# --- build_value_function ---


def test_build_covers_inflated_box():
    cfg = quad_cfg(eps=0.1)
    vf = build_value_function(cfg, h=0.02)
    alpha = 0.1 * math.sqrt(2.0)
    for i in range(2):
        assert vf.lo[i] <= -1.0 - alpha + 1e-12
        assert vf.axis_coords(i)[-1] >= 1.0 + alpha - 1e-12
    # exterior nodes hold g exactly
    ext = vf.labels.reshape(-1) != Region.INTERIOR
    pts = vf.node_points()[ext]
    assert np.allclose(vf.values.reshape(-1)[ext], np.einsum("mi,mi->m", pts, pts), atol=0)


def test_build_grid_too_coarse():
    cfg = quad_cfg(eps=0.1)
    with pytest.raises(GridTooCoarse):
        build_value_function(cfg, h=0.2)


def test_build_box_constant_exterior():
    cfg = GameConfig(
        params=P,
        eps=0.2,
        f=constant_field(0.0),
        g=constant_field(5.0),
        domain=Box(lo=(0.0, 0.0), hi=(1.0, 1.0)),
    )
    vf = build_value_function(cfg, h=0.05)
    ext = vf.labels != Region.INTERIOR
    assert np.all(vf.values[ext] == 5.0)
    assert np.all(vf.values[~ext] == 0.0)


# --- interpolate ---


def test_interpolate_reproduces_nodes():
    cfg = quad_cfg()
    vf = build_value_function(cfg, h=0.05)
    idx = tuple(s // 2 for s in vf.shape)
    vf.values[idx] = 3.5
    x = np.array([vf.lo[0] + vf.h * idx[0], vf.lo[1] + vf.h * idx[1]])
    if vf.labels[idx] == Region.INTERIOR:
        assert interpolate(vf, cfg, x) == 3.5


def test_interpolate_edge_midpoint():
    cfg = quad_cfg()
    vf = build_value_function(cfg, h=0.05)
    i = vf.shape[0] // 2
    j = vf.shape[1] // 2
    assert vf.labels[i, j] == Region.INTERIOR and vf.labels[i + 1, j] == Region.INTERIOR
    vf.values[i, j] = 0.0
    vf.values[i + 1, j] = 2.0
    x = np.array([vf.lo[0] + vf.h * (i + 0.5), vf.lo[1] + vf.h * j])
    assert interpolate(vf, cfg, x) == pytest.approx(1.0, abs=1e-14)


def test_interpolate_strip_bypasses_grid():
    cfg = GameConfig(
        params=P, eps=0.2, f=constant_field(0.0), g=lambda pts: pts[:, 0], domain=BALL
    )
    vf = build_value_function(cfg, h=0.05)
    x = np.array([1.05, 0.0])  # in the strip
    assert interpolate(vf, cfg, x) == pytest.approx(1.05, abs=0)


def test_interpolate_out_of_lattice():
    cfg = quad_cfg()
    vf = build_value_function(cfg, h=0.05)
    with pytest.raises(OutOfLattice):
        interpolate(vf, cfg, np.array([5.0, 0.0]))


def test_interpolation_weights_monotone():
    # raising any node value can only raise interpolated values
    cfg = quad_cfg()
    vf = build_value_function(cfg, h=0.05)
    rng = np.random.default_rng(0)
    vf.values[vf.interior_mask] = rng.normal(size=int(vf.interior_mask.sum()))
    pts = rng.uniform(-0.7, 0.7, size=(50, 2))
    base = interpolate(vf, cfg, pts)
    vf2 = vf.copy()
    vf2.values[vf.interior_mask] += np.abs(rng.normal(size=int(vf.interior_mask.sum())))
    assert np.all(interpolate(vf2, cfg, pts) >= base - 1e-12)


# --- best_response ---


def test_best_response_constant_field():
    cfg = quad_cfg(f_const=0.0)
    vf = build_value_function(cfg, h=0.05)
    vf.values[:] = 3.0
    choice, S = best_response(vf, cfg, np.array([0.1, 0.2]), GRID)
    assert S == pytest.approx(2 * 2 * 3.0, abs=1e-12)
    assert np.all(choice.mu2 == P.lam)  # ties resolve to the smaller scale


def test_best_response_quadratic_on_node_exact():
    # lam = Lam = 1 with eps = 4h puts every axis stencil point on a node,
    # so with the axis-only candidate set (grid step pi/2 leaves no
    # rotations in 2-d) the pair sums are exact and S = 2N u + eps^2 tr(2Q)
    cfg = quad_cfg(params=P_EQ, eps=0.2, f_const=4.0)
    vf = build_value_function(cfg, h=0.05)
    fill_interior(vf, cfg, quadratic_form_field(np.eye(2)))
    x = np.array([0.2, 0.2])
    axis_only = SearchConfig(mode="grid", step=math.pi / 2)
    choice, S = best_response(vf, cfg, x, axis_only)
    expected = 4.0 * float(x @ x) + 0.2**2 * pucci_plus(P_EQ, 2.0 * np.eye(2))
    assert S == pytest.approx(expected, abs=1e-12)
    # rotated candidates sample off-node and can only add interpolation
    # bias on a convex function, never lose value
    _, S_grid = best_response(vf, cfg, x, GRID)
    assert expected - 1e-12 <= S_grid <= expected + 2.1 * vf.h**2


def test_best_response_picks_large_scale_for_convex():
    cfg = quad_cfg(eps=0.2)
    vf = build_value_function(cfg, h=0.05)
    fill_interior(vf, cfg, quadratic_form_field(np.eye(2)))
    x = np.array([0.2, 0.2])
    choice, S = best_response(vf, cfg, x, GRID)
    assert np.all(choice.mu2 == P.Lam)
    expected = 4.0 * float(x @ x) + 0.2**2 * 8.0  # S = 2N u + eps^2 P+
    # interpolation of a convex quadratic only biases the sup upward, by
    # at most h^2/2 per stencil point
    assert expected - 1e-12 <= S <= expected + 2.1 * vf.h**2


def test_best_response_saddle_mixes_scales():
    q = np.diag([1.0, -1.0])
    cfg = quad_cfg(eps=0.2, f_const=2.0, q=q)
    vf = build_value_function(cfg, h=0.05)
    fill_interior(vf, cfg, quadratic_form_field(q))
    x = np.array([0.2, 0.1])
    choice, S = best_response(vf, cfg, x, GRID)
    order = np.argsort(np.abs(choice.directions[:, 0]))[::-1]
    # direction along e1 (positive curvature) takes Lam, e2 takes lam
    assert choice.mu2[order[0]] == P.Lam
    assert choice.mu2[order[1]] == P.lam
    expected = 4.0 * float(x @ q @ x) + 0.2**2 * (2 * P.Lam - 2 * P.lam)
    assert S == pytest.approx(expected, abs=2.1 * vf.h**2)


def test_best_response_matches_angle_scan():
    # brute-force scan over bases of the same interpolated objective
    cfg = quad_cfg(eps=0.2, f_const=2.0, q=np.diag([1.0, -1.0]))
    vf = build_value_function(cfg, h=0.05)
    fill_interior(vf, cfg, quadratic_form_field(np.diag([1.0, -1.0])))
    x = np.array([0.15, -0.2])

    def pair_sum(theta):
        best = 0.0
        for i, v in enumerate(
            (np.array([math.cos(theta), math.sin(theta)]), np.array([-math.sin(theta), math.cos(theta)]))
        ):
            opts = []
            for mu2 in (P.lam, P.Lam):
                stepv = 0.2 * math.sqrt(mu2) * v
                opts.append(
                    interpolate(vf, cfg, x + stepv) + interpolate(vf, cfg, x - stepv)
                )
            best += max(opts)
        return best

    scan = max(pair_sum(t) for t in np.arange(0.0, math.pi / 2, 1e-3))
    _, S = best_response(vf, cfg, x, SearchConfig(mode="hybrid", step=math.pi / 40))
    assert S >= scan - 1e-9
    assert S <= scan + 1e-4  # refinement may only beat the scan slightly


# --- dpp_apply / residual ---


def test_apply_zero_fixed_point():
    cfg = GameConfig(params=P, eps=0.2, f=constant_field(0.0), g=constant_field(0.0), domain=BALL)
    vf = build_value_function(cfg, h=0.05)
    out = dpp_apply(vf, cfg, GRID)
    assert np.all(out.values == 0.0)


def test_apply_constant_f():
    cfg = GameConfig(params=P, eps=0.2, f=constant_field(4.0), g=constant_field(0.0), domain=BALL)
    vf = build_value_function(cfg, h=0.05)
    out = dpp_apply(vf, cfg, GRID)
    assert np.allclose(out.values[out.interior_mask], -(0.2**2), atol=1e-15)


def test_apply_reproduces_quadratic():
    cfg = quad_cfg(eps=0.2, f_const=8.0)
    vf = build_value_function(cfg, h=0.05)
    fill_interior(vf, cfg, quadratic_form_field(np.eye(2)))
    out = dpp_apply(vf, cfg, GRID)
    pts = vf.interior_points()
    exact = np.einsum("mi,mi->m", pts, pts)
    err = np.max(np.abs(out.values[out.interior_mask] - exact))
    assert err <= 0.6 * vf.h**2


def test_apply_monotone():
    cfg = quad_cfg(eps=0.2, f_const=0.0)
    vf1 = build_value_function(cfg, h=0.05)
    rng = np.random.default_rng(3)
    m = int(vf1.interior_mask.sum())
    vf1.values[vf1.interior_mask] = rng.normal(size=m)
    vf2 = vf1.copy()
    vf2.values[vf2.interior_mask] += np.abs(rng.normal(size=m))
    out1 = dpp_apply(vf1, cfg, GRID)
    out2 = dpp_apply(vf2, cfg, GRID)
    assert np.all(out1.values <= out2.values + 1e-12)


def test_apply_constant_shift():
    cfg = quad_cfg(eps=0.2, f_const=3.0)
    vf = build_value_function(cfg, h=0.05)
    rng = np.random.default_rng(4)
    vf.values[vf.interior_mask] = rng.normal(size=int(vf.interior_mask.sum()))
    shifted = vf.copy()
    shifted.values += 1.0

    cfg_shift = GameConfig(
        params=P, eps=0.2, f=cfg.f, g=lambda pts: cfg.g(pts) + 1.0, domain=BALL
    )
    out = dpp_apply(vf, cfg, GRID)
    out_shift = dpp_apply(shifted, cfg_shift, GRID)
    gap = out_shift.values[out.interior_mask] - out.values[out.interior_mask]
    assert np.allclose(gap, 1.0, atol=1e-12)


def test_residual_of_zero_field():
    cfg = GameConfig(params=P, eps=0.2, f=constant_field(4.0), g=constant_field(0.0), domain=BALL)
    vf = build_value_function(cfg, h=0.05)
    assert residual(vf, cfg, GRID) == pytest.approx(0.2**2, abs=1e-15)


def test_residual_detects_perturbation():
    from puccimax import solve_dpp

    cfg = quad_cfg(eps=0.2)
    vf, _ = solve_dpp(cfg, h=0.05, search=GRID, tol=1e-10)
    assert residual(vf, cfg, GRID) <= 2e-10
    vfp = vf.copy()
    target = np.argwhere(vfp.labels == Region.INTERIOR)[50]
    vfp.values[tuple(target)] += 0.1
    direct = np.max(
        np.abs(dpp_apply(vfp, cfg, GRID).values[vfp.interior_mask] - vfp.values[vfp.interior_mask])
    )
    got = residual(vfp, cfg, GRID)
    assert got == pytest.approx(direct, abs=1e-14)
    assert got >= 0.05  # the perturbed node itself moves back by almost 0.1


# --- consistency check ---


def test_consistency_quadratic_exact():
    cfg = quad_cfg(eps=0.1)
    phi = quadratic_form_field(np.eye(2))
    d2 = lambda x: 2.0 * np.eye(2)
    discrete, exact = consistency_check(phi, d2, np.array([0.2, 0.1]), cfg)
    assert exact == pytest.approx(8.0, abs=1e-12)
    assert abs(discrete - exact) <= 1e-9


def test_consistency_saddle_exact():
    cfg = quad_cfg(eps=0.1, f_const=2.0, q=np.diag([1.0, -1.0]))
    phi = quadratic_form_field(np.diag([1.0, -1.0]))
    d2 = lambda x: 2.0 * np.diag([1.0, -1.0])
    discrete, exact = consistency_check(phi, d2, np.array([0.2, 0.1]), cfg)
    assert exact == pytest.approx(2.0, abs=1e-12)
    assert abs(discrete - exact) <= 1e-6


def test_consistency_quartic_second_order():
    cfg = quad_cfg(eps=0.1)

    def phi(pts):
        return pts[:, 0] ** 4

    def d2(x):
        return np.diag([12.0 * x[0] ** 2, 0.0])

    x = np.array([0.5, 0.0])
    d1, e1 = consistency_check(phi, d2, x, cfg)
    cfg2 = quad_cfg(eps=0.05)
    d2v, e2 = consistency_check(phi, d2, x, cfg2)
    assert e1 == e2 == pytest.approx(6.0, abs=1e-12)
    ratio = abs(d1 - e1) / abs(d2v - e2)
    assert 3.0 <= ratio <= 5.0


def test_consistency_rejects_boundary_points():
    cfg = quad_cfg(eps=0.2)
    phi = quadratic_form_field(np.eye(2))
    d2 = lambda x: 2.0 * np.eye(2)
    with pytest.raises(ValueError):
        consistency_check(phi, d2, np.array([0.95, 0.0]), cfg)


def test_basis_choice_validation():
    with pytest.raises(ValueError):
        BasisChoice(directions=np.array([[1.0, 0.0], [1.0, 0.0]]), mu2=np.array([1.0, 1.0]))
    ch = BasisChoice(directions=np.eye(2), mu2=np.array([1.0, 2.0]))
    ch.validate_scales(P)
    with pytest.raises(ValueError):
        BasisChoice(directions=np.eye(2), mu2=np.array([1.5, 1.0])).validate_scales(P)
