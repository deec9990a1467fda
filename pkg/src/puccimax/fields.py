"""Scalar fields used for payoffs: vectorised callables on (m, N) points."""

import numpy as np


def constant_field(c):
    """Field equal to ``c`` everywhere."""
    c = float(c)

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        return np.full(pts.shape[0], c)

    return f


def quadratic_form_field(Q):
    """Field x -> <Q x, x> for a square matrix Q."""
    Q = np.asarray(Q, dtype=float)

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        return np.einsum("mi,ij,mj->m", pts, Q, pts)

    return f


def pointwise_field(fn):
    """Wrap a scalar-only callable into the batched field convention."""

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        return np.array([float(fn(p)) for p in pts])

    return f
