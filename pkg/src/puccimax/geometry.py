"""Bounded domains and the interior / boundary-strip / far-exterior split.

A point is *Interior* when it lies in the open set, *Strip* when it is
outside but within distance ``eps * sqrt(Lambda)`` of the boundary (where
the game stops), and *FarExterior* otherwise.  Points exactly on the
boundary count as Strip so that the stopping rule fires there.
"""

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class Region(enum.IntEnum):
    INTERIOR = 0
    STRIP = 1
    FAR_EXTERIOR = 2


def _as_points(x):
    """Normalise input to an (m, N) float array, remembering scalar-ness."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        return pts[None, :], True
    if pts.ndim != 2:
        raise ValueError("points must be an (N,) vector or an (m, N) array")
    return pts, False


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    def contains_points(self, pts):
        d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        return d < self.radius

    def boundary_distance(self, pts):
        d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        return np.abs(d - self.radius)

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    @property
    def bounding_radius(self):
        return float(np.linalg.norm(self.center) + self.radius)

    @property
    def exterior_sphere_radius(self):
        return self.radius


@dataclass(frozen=True)
class Annulus:
    center: tuple
    r_inner: float
    r_outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError("annulus requires 0 < r_inner < r_outer")

    @property
    def dim(self):
        return len(self.center)

    def contains_points(self, pts):
        d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        return (d > self.r_inner) & (d < self.r_outer)

    def boundary_distance(self, pts):
        d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        return np.minimum(np.abs(d - self.r_inner), np.abs(d - self.r_outer))

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.r_outer, c + self.r_outer

    @property
    def bounding_radius(self):
        return float(np.linalg.norm(self.center) + self.r_outer)

    @property
    def exterior_sphere_radius(self):
        return self.r_inner


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(c) for c in self.lo))
        object.__setattr__(self, "hi", tuple(float(c) for c in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("box corners must have equal dimension")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box requires lo < hi componentwise")

    @property
    def dim(self):
        return len(self.lo)

    def contains_points(self, pts):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts > lo) & (pts < hi), axis=1)

    def boundary_distance(self, pts):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        # componentwise signed excess; positive outside the slab
        q = np.maximum(lo - pts, pts - hi)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = -np.max(q, axis=1)
        return np.where(outside > 0, outside, inside)

    def bbox(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    @property
    def bounding_radius(self):
        corners = np.array(np.meshgrid(*zip(self.lo, self.hi))).reshape(self.dim, -1).T
        return float(np.max(np.linalg.norm(corners, axis=1)))

    @property
    def exterior_sphere_radius(self):
        # a box admits tangent exterior balls of any radius at faces; edges
        # and corners are convex, so any positive value is admissible
        return float(min(b - a for a, b in zip(self.lo, self.hi)) / 2)


@dataclass(frozen=True)
class Implicit:
    """Domain given by a signed distance field (negative inside).

    The bounding radius and exterior-sphere radius are declared by the
    caller; they are not inferred.
    """

    signed_distance: Callable
    dim: int
    bounding_radius: float
    exterior_sphere_radius: float

    def __post_init__(self):
        if not self.bounding_radius > 0:
            raise ValueError("bounding_radius must be positive")
        if not self.exterior_sphere_radius > 0:
            raise ValueError("exterior_sphere_radius must be positive")

    def contains_points(self, pts):
        return np.asarray(self.signed_distance(pts)) < 0

    def boundary_distance(self, pts):
        return np.abs(np.asarray(self.signed_distance(pts)))

    def bbox(self):
        r = self.bounding_radius
        return np.full(self.dim, -r), np.full(self.dim, r)


Domain = Ball | Annulus | Box | Implicit


def contains(domain, x):
    """True iff x lies in the open set (boundary points excluded)."""
    pts, scalar = _as_points(x)
    inside = domain.contains_points(pts)
    return bool(inside[0]) if scalar else inside


def strip_width(params, eps):
    """Width of the stopping strip: eps * max(sqrt(lambda), sqrt(Lambda))."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return eps * math.sqrt(max(params.lam, params.Lam))


def classify(domain, params, eps, x):
    """Label points as Interior, Strip or FarExterior.

    Strip means outside the domain with boundary distance <= the strip
    width; boundary points (distance 0) are Strip.
    """
    pts, scalar = _as_points(x)
    labels = classify_points(domain, params, eps, pts)
    return Region(int(labels[0])) if scalar else labels


def classify_points(domain, params, eps, pts):
    """Vectorised classify: uint8 array of Region values for (m, N) pts."""
    alpha = strip_width(params, eps)
    inside = domain.contains_points(pts)
    labels = np.full(len(pts), Region.FAR_EXTERIOR, dtype=np.uint8)
    labels[inside] = Region.INTERIOR
    outside = ~inside
    if np.any(outside):
        near = domain.boundary_distance(pts[outside]) <= alpha
        lab = labels[outside]
        lab[near] = Region.STRIP
        labels[outside] = lab
    return labels
