"""Exact evaluation of the maximal Pucci operator.

The operator of a symmetric matrix A is

    Lambda * (sum of positive eigenvalues) + lambda * (sum of negative ones),

zero eigenvalues contributing to neither sum.  Eigenvalues are computed by
cyclic Jacobi rotations; the brute-force search over orthonormal bases in
``sup_over_bases_bruteforce`` provides an independent route to the same
number and is used as an oracle in the tests.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSymmetric, UnsupportedDimension

SYM_TOL = 1e-12
_JACOBI_OFF_TOL = 1e-14


@dataclass(frozen=True)
class PucciParams:
    """Ellipticity constants and dimension.

    ``lam`` may be zero only for the degenerate variant of the operator;
    the main game requires lam > 0.
    """

    lam: float
    Lam: float
    dim: int

    def __post_init__(self):
        if not (0 <= self.lam <= self.Lam):
            raise ValueError("require 0 <= lam <= Lam")
        if not self.Lam > 0:
            raise ValueError("require Lam > 0")
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ValueError("dim must be an integer >= 1")

    @property
    def min_step_scale(self):
        """Scale of the shortest move the game can make.

        sqrt(lam) for the main game; sqrt(Lam) in the degenerate variant,
        where every move uses the large scale.
        """
        return math.sqrt(self.lam) if self.lam > 0 else math.sqrt(self.Lam)

    @property
    def max_step_scale(self):
        return math.sqrt(self.Lam)


def symmetrize(A, tol=SYM_TOL):
    """Validate symmetry to ``tol`` and return the symmetrised array.

    Raises NonSymmetric when the asymmetry exceeds tol * (1 + max|A|);
    inputs coming from finite differencing carry roundoff, hence the
    symmetrisation rather than exact comparison.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    gap = np.max(np.abs(A - A.T)) if A.size else 0.0
    scale = 1.0 + (np.max(np.abs(A)) if A.size else 0.0)
    if gap > tol * scale:
        raise NonSymmetric(f"asymmetry {gap:.3e} exceeds tolerance {tol * scale:.3e}")
    return 0.5 * (A + A.T)


def jacobi_eigensystem(A, off_tol=_JACOBI_OFF_TOL, max_sweeps=60):
    """Eigenvalues (ascending) and paired eigenvectors by cyclic Jacobi.

    Iterates full cyclic sweeps of plane rotations until the off-diagonal
    Frobenius norm drops below ``off_tol`` times the matrix norm.  Small
    dimensions only; accuracy is high because each rotation is orthogonal.

    Returns
    -------
    vals : (N,) ascending eigenvalues
    vecs : (N, N) matrix whose column j is the eigenvector for vals[j]
    """
    A = symmetrize(A)
    n = A.shape[0]
    a = A.copy()
    v = np.eye(n)
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        # off-diagonal Frobenius norm, summed directly to avoid cancellation
        off = math.sqrt(np.sum((a - np.diag(np.diag(a))) ** 2))
        if off <= off_tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
                a[p, q] = 0.0
                a[q, p] = 0.0
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


def eigenvalues_sym(A):
    """Ascending eigenvalues of a symmetric matrix (cyclic Jacobi)."""
    vals, _ = jacobi_eigensystem(A)
    return vals


def pucci_plus(params, A):
    """Maximal Pucci operator of A for ellipticity constants (lam, Lam)."""
    A = symmetrize(A)
    if A.shape[0] != params.dim:
        raise ValueError("params.dim does not match matrix dimension")
    vals = eigenvalues_sym(A)
    return float(params.Lam * vals[vals > 0].sum() + params.lam * vals[vals < 0].sum())


def pucci_plus_degenerate(Lam, A):
    """Degenerate variant: Lambda times the sum of positive eigenvalues."""
    if not Lam > 0:
        raise ValueError("Lam must be positive")
    vals = eigenvalues_sym(A)
    return float(Lam * vals[vals > 0].sum())


def _scale_max(lam, Lam, q):
    # best of mu^2 * q over mu^2 in {lam, Lam}; Lam >= lam makes this a max
    return np.maximum(lam * q, Lam * q)


def _sup_grid_2d(params, A, angle_step):
    thetas = np.arange(0.0, math.pi / 2, angle_step)
    c = np.cos(thetas)
    s = np.sin(thetas)
    a00, a01, a11 = A[0, 0], A[0, 1], A[1, 1]
    q1 = a00 * c * c + 2.0 * a01 * c * s + a11 * s * s
    q2 = a00 * s * s - 2.0 * a01 * c * s + a11 * c * c
    obj = _scale_max(params.lam, params.Lam, q1) + _scale_max(params.lam, params.Lam, q2)
    return float(obj.max())


def _sup_grid_3d(params, A, angle_step):
    # basis vectors from three Givens rotations R12(alpha) R13(beta) R12(gamma);
    # gamma only spins (v1, v2) inside the plane orthogonal to v3, so with
    # q1 = (s + t)/2, q2 = (s - t)/2, s fixed and t = d cos(2g) + e sin(2g),
    # the two-direction objective collapses to
    #   (Lam + lam) s / 2 + (Lam - lam) max(|s|, |t|) / 2,
    # which is nondecreasing in |t|; the grid maximum over gamma therefore
    # only needs the running maximum of |t|
    ang = np.arange(0.0, math.pi, angle_step)
    ca, sa = np.cos(ang), np.sin(ang)
    cb, sb = ca.copy(), sa.copy()

    # frames for gamma = 0 on the (alpha, beta) grid: w1 = R12 R13 e1 etc.
    w1 = np.empty((ang.size, ang.size, 3))
    w1[..., 0] = ca[:, None] * cb[None, :]
    w1[..., 1] = sa[:, None] * cb[None, :]
    w1[..., 2] = sb[None, :]
    w2 = np.zeros((ang.size, ang.size, 3))
    w2[..., 0] = -sa[:, None]
    w2[..., 1] = ca[:, None]
    v3 = np.empty((ang.size, ang.size, 3))
    v3[..., 0] = -ca[:, None] * sb[None, :]
    v3[..., 1] = -sa[:, None] * sb[None, :]
    v3[..., 2] = cb[None, :]

    def quad(u, w):
        return np.einsum("...i,ij,...j->...", u, A, w)

    a11 = quad(w1, w1)
    a12 = quad(w1, w2)
    a22 = quad(w2, w2)
    q3 = quad(v3, v3)
    obj3 = _scale_max(params.lam, params.Lam, q3)
    ssum = a11 + a22
    diff = a11 - a22

    c2g = np.cos(2.0 * ang)
    s2g = np.sin(2.0 * ang)
    tabs = np.zeros_like(ssum)
    chunk = 64
    for k0 in range(0, ang.size, chunk):
        k1 = min(k0 + chunk, ang.size)
        t = diff[..., None] * c2g[k0:k1] + (2.0 * a12)[..., None] * s2g[k0:k1]
        np.abs(t, out=t)
        np.maximum(tabs, t.max(axis=-1), out=tabs)
    pair12 = 0.5 * (params.Lam + params.lam) * ssum + 0.5 * (params.Lam - params.lam) * np.maximum(
        np.abs(ssum), tabs
    )
    return float((pair12 + obj3).max())


def sup_over_bases_bruteforce(params, A, angle_step):
    """Maximise sum_i mu_i^2 <A v_i, v_i> over a grid of orthonormal bases.

    The per-direction scale is chosen optimally (Lam where the quadratic
    form is nonnegative, lam otherwise).  In dimension 2 the grid is a
    single angle over [0, pi/2); in dimension 3 three Givens angles over
    [0, pi)^3.  As angle_step -> 0 this approaches ``pucci_plus``.
    """
    if not angle_step > 0:
        raise ValueError("angle_step must be positive")
    A = symmetrize(A)
    if params.dim != A.shape[0]:
        raise ValueError("params.dim does not match matrix dimension")
    if params.dim == 2:
        return _sup_grid_2d(params, A, angle_step)
    if params.dim == 3:
        return _sup_grid_3d(params, A, angle_step)
    raise UnsupportedDimension("brute-force basis search supports dim 2 and 3 only")
