"""Game value on a lattice as the fixed point of the one-step update

    u(x) = -(1/2N) eps^2 f(x) + (1/2N) sup_{v_i, mu_i} sum_i
           [ u(x + eps mu_i v_i) + u(x - eps mu_i v_i) ],        x in domain,
    u(x) = g(x)                                                  outside,

where the supremum runs over orthonormal bases v_1..v_N with per-direction
scales mu_i in {sqrt(lam), sqrt(Lam)}.  Off-grid samples are multilinear
interpolations (nonnegative weights summing to one), so every sweep is a
monotone map and plain Jacobi iteration converges from any bounded start.

The supremum over the full orthogonal group is discretised: the candidate
set always contains the axis-aligned basis, optionally the eigenbasis of a
centered finite-difference Hessian of the current iterate, and a rotation
grid, with golden-section refinement of the best angle in hybrid mode.
"""

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, NonPositiveRunningPayoff, NotConverged, OutOfLattice
from .geometry import Region, classify_points, contains, strip_width, _as_points
from .pucci import PucciParams, pucci_plus, symmetrize

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GameConfig:
    """Game data: ellipticity constants, step size and payoffs.

    ``f`` (running payoff, charged inside) and ``g`` (final payoff,
    collected in the boundary strip) are vectorised callables mapping an
    (m, N) array of points to an (m,) array of values.
    """

    params: PucciParams
    eps: float
    f: object
    g: object
    domain: object

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.domain.dim != self.params.dim:
            raise ValueError("domain dimension does not match params.dim")


@dataclass(frozen=True)
class SearchConfig:
    """Discretisation of the supremum over orthonormal bases.

    mode:
      - "eigen":  axis basis plus the Hessian eigenbasis of the iterate
      - "grid":   axis basis plus a rotation grid of spacing ``step``
      - "hybrid": both, plus golden-section refinement of the best angle

    "grid" candidates do not depend on the iterate, so fixed-point sweeps
    with it converge to any tolerance.  "eigen" and "hybrid" adapt the
    candidate set to the current iterate; on problems whose Hessian is
    nearly isotropic the adapted angle is noise-driven and the sweep
    residual floors near the interpolation-bias scale (about h^2 for
    "eigen", two orders lower for "hybrid").  Use those modes with
    tolerances above that floor, or for one-shot evaluations
    (best_response, consistency checks, greedy play), where no iteration
    is involved.
    """

    mode: str = "hybrid"
    step: float = math.pi / 40
    refine_iters: int = 12

    def __post_init__(self):
        if self.mode not in ("eigen", "grid", "hybrid"):
            raise ValueError("mode must be one of 'eigen', 'grid', 'hybrid'")
        if self.mode != "eigen" and not self.step > 0:
            raise ValueError("step must be positive")

    @property
    def uses_eigen(self):
        return self.mode in ("eigen", "hybrid")

    @property
    def uses_grid(self):
        return self.mode in ("grid", "hybrid")


@dataclass(frozen=True)
class BasisChoice:
    """Orthonormal directions (rows) with per-direction squared scales.

    ``mu2`` holds the squared scales so membership in {lam, Lam} is exact;
    the step length along direction i is eps * sqrt(mu2[i]).
    """

    directions: np.ndarray
    mu2: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        m = np.asarray(self.mu2, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("directions must be a square matrix of row vectors")
        gram = d @ d.T
        if np.max(np.abs(gram - np.eye(d.shape[0]))) > 1e-10:
            raise ValueError("directions are not orthonormal to 1e-10")
        if m.shape != (d.shape[0],):
            raise ValueError("mu2 must have one entry per direction")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "mu2", m)

    def validate_scales(self, params):
        ok = np.isin(self.mu2, (params.lam, params.Lam))
        if not ok.all():
            raise ValueError("every mu2 entry must equal lam or Lam exactly")


@dataclass
class DPPReport:
    iterations: int
    residual_history: list
    final_residual: float
    wall_time: float
    converged: bool


@dataclass
class ValueFunction:
    """Node values on a uniform lattice covering the domain and its strip.

    Nodes outside the domain hold the final payoff exactly; interpolation
    queries below the strip never see far-exterior nodes because cells
    containing interior points stay within one spacing of the domain.
    """

    lo: np.ndarray
    h: float
    values: np.ndarray
    labels: np.ndarray
    eps: float
    lam: float
    Lam: float

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axis_coords(self, i):
        return self.lo[i] + self.h * np.arange(self.values.shape[i])

    def node_points(self):
        mesh = np.meshgrid(*(self.axis_coords(i) for i in range(self.dim)), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    @property
    def interior_mask(self):
        return self.labels == Region.INTERIOR

    def interior_points(self):
        return self.node_points()[self.interior_mask.reshape(-1)]

    def interior_values(self):
        return self.values[self.interior_mask]

    def copy(self):
        return ValueFunction(
            lo=self.lo.copy(),
            h=self.h,
            values=self.values.copy(),
            labels=self.labels,
            eps=self.eps,
            lam=self.lam,
            Lam=self.Lam,
        )


def build_value_function(cfg, h):
    """Lattice over the domain's bounding box inflated by the strip width.

    Interior nodes start at zero, all other nodes hold g exactly.  Raises
    GridTooCoarse when h exceeds half the shortest step eps * mu_min, which
    would put stencil points less than two cells away.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    cap = cfg.eps * cfg.params.min_step_scale / 2.0
    if h > cap * (1.0 + 1e-12):
        raise GridTooCoarse(f"h={h:.6g} exceeds eps*mu_min/2={cap:.6g}")
    alpha = strip_width(cfg.params, cfg.eps)
    lo_d, hi_d = cfg.domain.bbox()
    lo = np.asarray(lo_d, dtype=float) - alpha
    hi_need = np.asarray(hi_d, dtype=float) + alpha
    counts = tuple(int(math.ceil((hi_need[i] - lo[i]) / h - 1e-9)) + 1 for i in range(len(lo)))
    vf = ValueFunction(
        lo=lo,
        h=float(h),
        values=np.zeros(counts),
        labels=np.zeros(counts, dtype=np.uint8),
        eps=cfg.eps,
        lam=cfg.params.lam,
        Lam=cfg.params.Lam,
    )
    pts = vf.node_points()
    labels = classify_points(cfg.domain, cfg.params, cfg.eps, pts)
    vf.labels = labels.reshape(counts)
    ext = labels != Region.INTERIOR
    vals = np.zeros(len(pts))
    if ext.any():
        vals[ext] = cfg.g(pts[ext])
    vf.values = vals.reshape(counts)
    return vf


def _interp_points(vf, cfg, pts):
    n = np.asarray(vf.values.shape)
    hi = vf.lo + (n - 1) * vf.h
    tol = 1e-9 * vf.h
    if np.any(pts < vf.lo - tol) or np.any(pts > hi + tol):
        raise OutOfLattice("query point outside the covered box")
    out = np.empty(len(pts))
    labels = classify_points(cfg.domain, cfg.params, vf.eps, pts)
    ext = labels != Region.INTERIOR
    if ext.any():
        out[ext] = cfg.g(pts[ext])
    ins = ~ext
    if ins.any():
        p = (pts[ins] - vf.lo) / vf.h
        cell = np.clip(np.floor(p).astype(np.int64), 0, n - 2)
        frac = np.clip(p - cell, 0.0, 1.0)
        flat = vf.values.reshape(-1)
        stride = np.array([int(np.prod(vf.values.shape[i + 1 :])) for i in range(vf.dim)])
        base = cell @ stride
        acc = np.zeros(ins.sum())
        for corner in itertools.product((0, 1), repeat=vf.dim):
            w = np.ones(ins.sum())
            off = 0
            for i, bit in enumerate(corner):
                w = w * (frac[:, i] if bit else 1.0 - frac[:, i])
                off += bit * stride[i]
            acc += w * flat[base + off]
        out[ins] = acc
    return out


def interpolate(vf, cfg, x):
    """Value at x: g(x) exactly when x is not interior, otherwise the
    multilinear interpolation of node values on the containing cell."""
    pts, scalar = _as_points(x)
    vals = _interp_points(vf, cfg, pts)
    return float(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# basis search


def _dirs_from_angles_2d(theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    c = np.cos(theta)
    s = np.sin(theta)
    d = np.empty((theta.size, 2, 2))
    d[:, 0, 0] = c
    d[:, 0, 1] = s
    d[:, 1, 0] = -s
    d[:, 1, 1] = c
    return d


def _givens(n, p, q, theta):
    g = np.eye(n)
    c, s = math.cos(theta), math.sin(theta)
    g[p, p] = c
    g[q, q] = c
    g[p, q] = -s
    g[q, p] = s
    return g


def _rotation_grid(dim, step):
    if dim == 2:
        return [(float(t),) for t in np.arange(step, math.pi / 2, step)]
    if dim == 3:
        grid = np.arange(0.0, math.pi, step)
        return [t for t in itertools.product(grid, grid, grid) if any(t)]
    from .errors import UnsupportedDimension

    raise UnsupportedDimension("rotation grid supports dim 2 and 3 only")


def _dirs_from_triple(theta):
    a, b, c = theta
    rot = _givens(3, 0, 1, a) @ _givens(3, 0, 2, b) @ _givens(3, 0, 1, c)
    return rot.T  # rows are the basis vectors


def _eigen_dirs(hessians):
    """Per-node eigenbasis (rows) of symmetric matrices; near-isotropic
    2x2 blocks snap to the axis basis so ties stay deterministic."""
    H = hessians
    n = H.shape[-1]
    if n == 2:
        a = H[:, 0, 0]
        b = H[:, 0, 1]
        d = H[:, 1, 1]
        theta = 0.5 * np.arctan2(2.0 * b, a - d)
        theta = np.mod(theta, math.pi / 2)
        gap2 = (a - d) ** 2 + 4.0 * b * b
        snap = gap2 <= (1e-12 * (np.abs(a) + np.abs(d) + 1.0)) ** 2
        theta[snap] = 0.0
        return _dirs_from_angles_2d(theta), theta
    vals, vecs = np.linalg.eigh(H)
    return np.swapaxes(vecs, -1, -2), None


def _candidate_pairs(eval_fn, pts, eps, lam, Lam, dirs, want_mu=False):
    """Best pair-sum per direction with the per-direction scale chosen by
    direct comparison (ties keep the smaller scale).  Returns (S, mu2)."""
    m, ndim = pts.shape
    S = np.zeros(m)
    mu2 = np.empty((m, ndim)) if want_mu else None
    per_node = dirs.ndim == 3
    for i in range(ndim):
        v = dirs[:, i, :] if per_node else dirs[i][None, :]
        step = eps * math.sqrt(lam)
        pair_lo = eval_fn(pts + step * v) + eval_fn(pts - step * v)
        if lam == Lam:
            S += pair_lo
            if want_mu:
                mu2[:, i] = lam
            continue
        step = eps * math.sqrt(Lam)
        pair_hi = eval_fn(pts + step * v) + eval_fn(pts - step * v)
        hi_wins = pair_hi > pair_lo
        S += np.where(hi_wins, pair_hi, pair_lo)
        if want_mu:
            mu2[:, i] = np.where(hi_wins, Lam, lam)
    return S, mu2


def _candidate_pairs_degenerate(eval_fn, pts, u_prev, eps, Lam, dirs):
    """Degenerate variant: every move uses sqrt(Lam) and each direction may
    be dropped, contributing 2 u(x) instead (resolved against the previous
    iterate so the sweep stays explicit)."""
    m, ndim = pts.shape
    S = np.zeros(m)
    stay = 2.0 * u_prev
    per_node = dirs.ndim == 3
    step = eps * math.sqrt(Lam)
    for i in range(ndim):
        v = dirs[:, i, :] if per_node else dirs[i][None, :]
        pair = eval_fn(pts + step * v) + eval_fn(pts - step * v)
        S += np.maximum(pair, stay)
    return S, None


def _search_best(eval_fn, pts, params, eps, search, hessians=None, want_choice=False, u_prev=None):
    """Maximise the pair-sum over the candidate basis set.

    Candidates are evaluated in a fixed order (axis, eigenbasis, rotation
    grid by ascending angle, refined angles) and only a strictly larger sum
    replaces the incumbent, which makes the argmax deterministic.
    """
    m, ndim = pts.shape
    degenerate = u_prev is not None

    def evaluate(dirs, want_mu):
        if degenerate:
            return _candidate_pairs_degenerate(eval_fn, pts, u_prev, eps, params.Lam, dirs)
        return _candidate_pairs(eval_fn, pts, eps, params.lam, params.Lam, dirs, want_mu)

    best_S = None
    best_dirs = None
    best_mu2 = None
    best_theta = None  # 2-d only: angle of the incumbent, for refinement

    def consider(dirs, theta=None):
        nonlocal best_S, best_dirs, best_mu2, best_theta
        S, mu2 = evaluate(dirs, want_choice)
        if best_S is None:
            best_S = S
            if want_choice:
                best_dirs = np.broadcast_to(dirs, (m, ndim, ndim)).copy() if dirs.ndim == 2 else dirs.copy()
                best_mu2 = mu2
            if ndim == 2:
                if theta is None:
                    best_theta = np.zeros(m)
                else:
                    best_theta = np.broadcast_to(np.atleast_1d(theta), (m,)).astype(float).copy()
            return
        better = S > best_S
        if not better.any():
            return
        best_S = np.where(better, S, best_S)
        if want_choice:
            db = dirs if dirs.ndim == 3 else np.broadcast_to(dirs, (m, ndim, ndim))
            best_dirs[better] = db[better]
            best_mu2[better] = mu2[better]
        if ndim == 2 and best_theta is not None and theta is not None:
            th = np.broadcast_to(np.atleast_1d(theta), (m,))
            best_theta = np.where(better, th, best_theta)

    consider(np.eye(ndim), theta=0.0)

    if search.uses_eigen and hessians is not None:
        dirs, theta = _eigen_dirs(hessians)
        consider(dirs, theta=theta)

    if search.uses_grid:
        for t in _rotation_grid(ndim, search.step):
            if ndim == 2:
                consider(_dirs_from_angles_2d(t[0])[0], theta=t[0])
            else:
                consider(_dirs_from_triple(t))

    if search.mode == "hybrid" and ndim == 2 and search.refine_iters >= 2:
        theta_star = _golden_refine(
            lambda th: evaluate(_dirs_from_angles_2d(th), False)[0],
            best_theta,
            search.step,
            search.refine_iters,
        )
        consider(_dirs_from_angles_2d(theta_star), theta=theta_star)

    if want_choice:
        return best_S, best_dirs, best_mu2
    return best_S


def _golden_refine(S_of_theta, theta0, halfwidth, iters):
    """Vectorised golden-section maximisation on [theta0 +- halfwidth]."""
    a = theta0 - halfwidth
    b = theta0 + halfwidth
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = S_of_theta(x1)
    f2 = S_of_theta(x2)
    for _ in range(iters - 2):
        left = f1 >= f2
        new_a = np.where(left, a, x1)
        new_b = np.where(left, x2, b)
        span = new_b - new_a
        cand1 = new_b - _INVPHI * span
        cand2 = new_a + _INVPHI * span
        theta_new = np.where(left, cand1, cand2)
        f_new = S_of_theta(theta_new)
        x1, f1, x2, f2 = (
            np.where(left, cand1, x2),
            np.where(left, f_new, f2),
            np.where(left, x1, cand2),
            np.where(left, f1, f_new),
        )
        a, b = new_a, new_b
    return np.where(f1 >= f2, x1, x2)


def _grid_hessians(vf):
    """Centered finite-difference Hessians (step h) at every node."""
    u = vf.values
    h2 = vf.h * vf.h
    ndim = u.ndim
    H = np.empty(u.shape + (ndim, ndim))
    for i in range(ndim):
        up = np.roll(u, -1, axis=i)
        um = np.roll(u, 1, axis=i)
        H[..., i, i] = (up + um - 2.0 * u) / h2
        for j in range(i + 1, ndim):
            upp = np.roll(up, -1, axis=j)
            upm = np.roll(up, 1, axis=j)
            ump = np.roll(um, -1, axis=j)
            umm = np.roll(um, 1, axis=j)
            H[..., i, j] = H[..., j, i] = (upp - upm - ump + umm) / (4.0 * h2)
    return H


def _fd_hessians_from_eval(eval_fn, pts, h):
    """Centered finite-difference Hessians of an evaluable field."""
    m, ndim = pts.shape
    H = np.empty((m, ndim, ndim))
    center = eval_fn(pts)
    for i in range(ndim):
        ei = np.zeros(ndim)
        ei[i] = h
        up = eval_fn(pts + ei)
        um = eval_fn(pts - ei)
        H[:, i, i] = (up + um - 2.0 * center) / (h * h)
        for j in range(i + 1, ndim):
            ej = np.zeros(ndim)
            ej[j] = h
            upp = eval_fn(pts + ei + ej)
            upm = eval_fn(pts + ei - ej)
            ump = eval_fn(pts - ei + ej)
            umm = eval_fn(pts - ei - ej)
            H[:, i, j] = H[:, j, i] = (upp - upm - ump + umm) / (4.0 * h * h)
    return H


def best_response(vf, cfg, x, search=None):
    """Maximising basis and pair-sum value S(x) for a single interior point.

    The Hessian feeding the eigenbasis candidate is a centered difference
    of the interpolated field with step h, which at a node coincides with
    the grid stencil used by ``dpp_apply``.
    """
    search = search or SearchConfig()
    x = np.asarray(x, dtype=float)
    if not contains(cfg.domain, x):
        raise ValueError("best_response requires an interior point")
    pts = x[None, :]

    def eval_fn(q):
        return _interp_points(vf, cfg, q)

    hess = _fd_hessians_from_eval(eval_fn, pts, vf.h) if search.uses_eigen else None
    S, dirs, mu2 = _search_best(eval_fn, pts, cfg.params, cfg.eps, search, hessians=hess, want_choice=True)
    return BasisChoice(directions=dirs[0], mu2=mu2[0]), float(S[0])


def _sweep(vf, cfg, search, pts, f_int, degenerate=False):
    """One Jacobi sweep: new interior values from the input iterate."""

    def eval_fn(q):
        return _interp_points(vf, cfg, q)

    hess = None
    if search.uses_eigen:
        hess = _grid_hessians(vf)[vf.interior_mask]
    u_prev = vf.values[vf.interior_mask] if degenerate else None
    S = _search_best(eval_fn, pts, cfg.params, cfg.eps, search, hessians=hess, u_prev=u_prev)
    two_n = 2.0 * cfg.params.dim
    return -(cfg.eps**2 / two_n) * f_int + S / two_n


def dpp_apply(vf, cfg, search=None):
    """One application of the value update (Jacobi: reads only the input)."""
    search = search or SearchConfig()
    pts = vf.interior_points()
    f_int = cfg.f(pts)
    new = vf.copy()
    new.values[vf.interior_mask] = _sweep(vf, cfg, search, pts, f_int)
    return new


def residual(vf, cfg, search=None):
    """Sup over interior nodes of |vf - dpp_apply(vf)|."""
    search = search or SearchConfig()
    pts = vf.interior_points()
    f_int = cfg.f(pts)
    new_vals = _sweep(vf, cfg, search, pts, f_int)
    return float(np.max(np.abs(new_vals - vf.values[vf.interior_mask])))


def default_max_iter(cfg):
    """50 times the exit-time scale 4 R^2 / (lam eps^2) (Lam-based when
    lam = 0, where every move uses the large scale)."""
    R = cfg.domain.bounding_radius
    lam_eff = cfg.params.lam if cfg.params.lam > 0 else cfg.params.Lam / cfg.params.dim
    return 50 * int(math.ceil(4.0 * R * R / (lam_eff * cfg.eps**2)))


def _iterate(cfg, h, search, tol, max_iter, degenerate):
    if not tol > 0:
        raise ValueError("tol must be positive")
    vf = build_value_function(cfg, h)
    # start at the mean strip payoff: bounded, reproducible, and exact for
    # constant data, where the fixed point must be reached in <= 2 sweeps
    strip_vals = vf.values[vf.labels == Region.STRIP]
    if strip_vals.size:
        vf.values[vf.interior_mask] = float(strip_vals.mean())
    pts = vf.interior_points()
    f_int = cfg.f(pts)
    if degenerate:
        if cfg.params.lam != 0:
            raise ValueError("degenerate solver requires params.lam == 0")
        if len(f_int) and f_int.min() <= 0:
            raise NonPositiveRunningPayoff("degenerate game needs f > 0 at every interior node")
    elif cfg.params.lam <= 0:
        raise ValueError("main solver requires params.lam > 0; use solve_dpp_degenerate")
    if max_iter is None:
        max_iter = default_max_iter(cfg)
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")

    t0 = time.perf_counter()
    history = []
    mask = vf.interior_mask
    diff = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_vals = _sweep(vf, cfg, search, pts, f_int, degenerate=degenerate)
        diff = float(np.max(np.abs(new_vals - vf.values[mask]))) if len(new_vals) else 0.0
        vf.values[mask] = new_vals
        history.append(diff)
        if diff <= tol:
            break
    report = DPPReport(
        iterations=iterations,
        residual_history=history,
        final_residual=diff,
        wall_time=time.perf_counter() - t0,
        converged=diff <= tol,
    )
    if not report.converged:
        raise NotConverged(
            f"residual {diff:.3e} > tol {tol:.3e} after {iterations} sweeps",
            value_function=vf,
            report=report,
        )
    return vf, report


def solve_dpp(cfg, h, search=None, tol=1e-9, max_iter=None):
    """Fixed point of the value update from the zero initialisation.

    Returns (ValueFunction, DPPReport); raises NotConverged (carrying both)
    when max_iter sweeps leave the sup-norm change above tol.
    """
    return _iterate(cfg, h, search or SearchConfig(), tol, max_iter, degenerate=False)


def solve_dpp_degenerate(cfg, h, search=None, tol=1e-9, max_iter=None):
    """Degenerate variant (lam = 0): moves use sqrt(Lam) only and any subset
    of directions may stay put.  Requires f > 0 on the sampled grid."""
    return _iterate(cfg, h, search or SearchConfig(), tol, max_iter, degenerate=True)


def consistency_check(phi, D2phi, x, cfg, search=None):
    """Discrete operator versus the exact one on an analytic test function.

    discrete = (1/eps^2) sup_basis sum_i [phi(x + eps mu_i v_i)
               + phi(x - eps mu_i v_i) - 2 phi(x)], sampling phi exactly,
    exact    = pucci_plus(params, D2phi(x)).

    For quadratics the two agree up to angle-search error; in general the
    gap is O(eps^2) for smooth phi.
    """
    search = search or SearchConfig()
    x = np.asarray(x, dtype=float)
    if not contains(cfg.domain, x):
        raise ValueError("consistency_check requires an interior point")
    margin = strip_width(cfg.params, cfg.eps)
    if float(cfg.domain.boundary_distance(x[None, :])[0]) <= margin:
        raise ValueError("point too close to the boundary for the full stencil")
    pts = x[None, :]

    def eval_fn(q):
        return np.asarray(phi(q), dtype=float)

    H = symmetrize(D2phi(x))
    S = _search_best(eval_fn, pts, cfg.params, cfg.eps, search, hessians=H[None, :, :])
    two_n = 2.0 * cfg.params.dim
    discrete = float((S[0] - two_n * eval_fn(pts)[0]) / cfg.eps**2)
    exact = pucci_plus(cfg.params, H)
    return discrete, exact


def value_envelope(cfg, vf):
    """A-priori interval for converged interior values:
    [min g - 2 R^2 max|f| / (N lam), max g + 2 R^2 max|f| / (N lam)],
    with g sampled at strip nodes and f at interior nodes."""
    if cfg.params.lam <= 0:
        raise ValueError("envelope requires lam > 0")
    strip = vf.labels == Region.STRIP
    g_vals = vf.values[strip]
    pts = vf.interior_points()
    max_f = float(np.max(np.abs(cfg.f(pts)))) if len(pts) else 0.0
    R = cfg.domain.bounding_radius
    pad = 2.0 * R * R * max_f / (cfg.params.dim * cfg.params.lam)
    return float(g_vals.min() - pad), float(g_vals.max() + pad)
