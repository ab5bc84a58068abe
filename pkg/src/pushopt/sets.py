"""Convex feasible sets with shrinkage-aware Euclidean projection.

Two set families are supported, boxes and Euclidean balls; these cover all
shipped experiments. Shrinking by a factor ``1 - s`` is performed about the
set's Chebyshev center ``c``, i.e. the shrunk set is ``(1-s)(S - c) + c``.
For sets centered at the origin this coincides with plain rescaling
``{(1-s) x : x in S}``. Shrinking about the Chebyshev center guarantees that
any point of the shrunk set, perturbed by at most ``r_inner * s``, stays
inside the original set.
"""

from __future__ import annotations

import numpy as np


def _as_points(x, dimension):
    """Validate and reshape input to (k, dimension); remember if 1-D."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise ValueError(
            f"expected points of dimension {dimension}, got shape {np.shape(x)}"
        )
    return arr, single


class Box:
    """Axis-aligned box ``{x : lo <= x <= hi}`` (componentwise)."""

    kind = "box"

    def __init__(self, lo, hi, r_inner=None, R_outer=None):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.ndim != 1 or self.lo.shape != self.hi.shape:
            raise ValueError("lo and hi must be 1-D vectors of equal length")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")
        self.dimension = self.lo.size
        self.center = 0.5 * (self.lo + self.hi)
        half = 0.5 * (self.hi - self.lo)
        self.r_inner = float(np.min(half)) if r_inner is None else float(r_inner)
        corners = np.maximum(np.abs(self.lo), np.abs(self.hi))
        self.R_outer = (
            float(np.linalg.norm(corners)) if R_outer is None else float(R_outer)
        )
        self.origin_interior = bool(np.all(self.lo < 0.0) and np.all(self.hi > 0.0))

    @property
    def origin_ball_radius(self):
        """Largest r with the origin-centered r-ball inside the box (0 if none)."""
        if not self.origin_interior:
            return 0.0
        return float(min(np.min(-self.lo), np.min(self.hi)))

    def _shrunk_bounds(self, shrink):
        lo = self.center + (1.0 - shrink) * (self.lo - self.center)
        hi = self.center + (1.0 - shrink) * (self.hi - self.center)
        return lo, hi

    def project(self, x, shrink=0.0):
        """Euclidean projection of x (vector or rows) onto the shrunk box."""
        pts, single = _as_points(x, self.dimension)
        lo, hi = self._shrunk_bounds(shrink)
        out = np.clip(pts, lo, hi)
        return out[0] if single else out

    def contains(self, x, shrink=0.0, tol=1e-9):
        pts, single = _as_points(x, self.dimension)
        lo, hi = self._shrunk_bounds(shrink)
        ok = np.all(pts >= lo - tol, axis=1) & np.all(pts <= hi + tol, axis=1)
        return bool(ok[0]) if single else ok

    def sample(self, rng, k=1):
        """k points uniform on the (unshrunk) box, rows of a (k, m) array."""
        u = rng.random((k, self.dimension))
        return self.lo + u * (self.hi - self.lo)

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class Ball:
    """Euclidean ball ``{x : ||x - center|| <= radius}``."""

    kind = "ball"

    def __init__(self, center, radius, r_inner=None, R_outer=None):
        self.center = np.asarray(center, dtype=float)
        if self.center.ndim != 1:
            raise ValueError("center must be a 1-D vector")
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")
        self.dimension = self.center.size
        self.r_inner = self.radius if r_inner is None else float(r_inner)
        self.R_outer = (
            float(np.linalg.norm(self.center)) + self.radius
            if R_outer is None
            else float(R_outer)
        )
        self.origin_interior = bool(np.linalg.norm(self.center) < self.radius)

    @property
    def origin_ball_radius(self):
        return max(0.0, self.radius - float(np.linalg.norm(self.center)))

    def project(self, x, shrink=0.0):
        """Radial clamp toward the center with radius (1-shrink)*radius."""
        pts, single = _as_points(x, self.dimension)
        rad = (1.0 - shrink) * self.radius
        d = pts - self.center
        norms = np.linalg.norm(d, axis=1)
        scale = np.ones_like(norms)
        outside = norms > rad
        scale[outside] = rad / norms[outside]
        out = self.center + d * scale[:, None]
        return out[0] if single else out

    def contains(self, x, shrink=0.0, tol=1e-9):
        pts, single = _as_points(x, self.dimension)
        rad = (1.0 - shrink) * self.radius
        ok = np.linalg.norm(pts - self.center, axis=1) <= rad + tol
        return bool(ok[0]) if single else ok

    def sample(self, rng, k=1):
        """k points uniform on the (unshrunk) ball."""
        z = rng.standard_normal((k, self.dimension))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        u = rng.random(k) ** (1.0 / self.dimension)
        return self.center + self.radius * z * u[:, None]

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"
