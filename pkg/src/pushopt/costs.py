"""Online cost families and the two-point value-only gradient estimator.

A cost suite exposes per-node, per-round costs through bandit value queries
and explicit subgradients. The value-only estimator probes the cost at the
current point and at one sphere-perturbed point and rescales the difference
into a gradient surrogate whose norm never exceeds ``m * G``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, InvariantViolation


class OnlineCost:
    """Base class for a family of per-node, per-round convex costs.

    Subclasses must implement ``value`` and ``subgradient``; the batched and
    global variants have generic (loop) fallbacks that subclasses override
    for speed. ``l1_weight`` is the coefficient of an optional nonsmooth
    l1 term in the global cost (0 when the cost is smooth), and
    ``global_smooth_gradient`` differentiates everything except that term.
    """

    n = None
    m = None
    lipschitz_G = None
    l1_weight = 0.0

    def value(self, i, t, x):
        """Bandit query of node i's round-t cost at x."""
        raise NotImplementedError

    def subgradient(self, i, t, x):
        """An element of node i's round-t subdifferential at x."""
        raise NotImplementedError

    def value_batch(self, t, points):
        """Row i evaluates node i's cost at points[i]."""
        return np.array([self.value(i, t, points[i]) for i in range(self.n)])

    def subgradient_batch(self, t, points):
        """Row i is node i's subgradient at points[i]."""
        return np.stack([self.subgradient(i, t, points[i]) for i in range(self.n)])

    def global_value(self, t, x):
        """Network-wide round-t cost at x (sum over nodes)."""
        return float(sum(self.value(i, t, x) for i in range(self.n)))

    def global_value_many(self, t, points):
        """Network-wide round-t cost at each row of points."""
        return np.array([self.global_value(t, x) for x in points])

    def global_smooth_gradient(self, t, x):
        """Gradient of the smooth part of the global cost (valid as-is when
        l1_weight == 0, in which case it is the full subgradient sum)."""
        if self.l1_weight != 0.0:
            raise NotImplementedError("costs with an l1 term must override this")
        return np.sum(self.subgradient_batch(t, np.tile(x, (self.n, 1))), axis=0)


@dataclass(frozen=True)
class SmoothingParams:
    """Exploration radius mu and shrinkage xi of the value-only estimator."""

    mu: float
    xi: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ConfigError("smoothing mu must be positive")
        if not 0.0 < self.xi < 1.0:
            raise ConfigError("shrinkage xi must lie in (0, 1)")

    def check_feasible(self, r_inner):
        """Queries x + mu*zeta stay feasible only when mu <= r_inner * xi."""
        if self.mu > r_inner * self.xi + 1e-12:
            raise ConfigError(
                f"mu={self.mu} exceeds r_inner*xi={r_inner * self.xi}; "
                "perturbed queries would leave the feasible set"
            )


def sample_sphere(rng, m):
    """A point uniform on the unit sphere in R^m."""
    z = rng.standard_normal(m)
    return z / np.linalg.norm(z)


def sample_sphere_batch(rng, k, m):
    """k independent uniform unit-sphere points, as rows."""
    z = rng.standard_normal((k, m))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_ball_batch(rng, k, m):
    """k independent points uniform in the unit ball, as rows."""
    z = sample_sphere_batch(rng, k, m)
    u = rng.random(k) ** (1.0 / m)
    return z * u[:, None]


def zo_gradient(cost, i, t, x, zeta, params, feasible_set=None):
    """Two-point gradient surrogate from value queries only:
    (m / mu) * (f(x + mu*zeta) - f(x)) * zeta.

    When a feasible set is given, the perturbed query point is checked to
    lie inside it; a violation means the shrinkage chain was broken upstream.
    """
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    query = x + params.mu * zeta
    if feasible_set is not None and not feasible_set.contains(query, 0.0, 1e-9):
        raise InvariantViolation(
            "query-feasibility", f"perturbed query left the set at node {i}, round {t}"
        )
    diff = cost.value(i, t, query) - cost.value(i, t, x)
    return (cost.m / params.mu) * diff * zeta


def zo_gradient_batch(cost, t, points, zetas, params):
    """Row-wise two-point surrogates: row i perturbs node i's point along
    zetas[i]. Exactly two batched value queries."""
    f_base = cost.value_batch(t, points)
    f_pert = cost.value_batch(t, points + params.mu * zetas)
    return (cost.m / params.mu) * (f_pert - f_base)[:, None] * zetas


def estimate_subgradient_bound(cost, feasible_set, rng, probe_rounds, num_points=10_000):
    """Sampled bound on sup ||subgradient|| over the feasible set: the max
    over random (node, round, point) triples, inflated by 10%."""
    probe_rounds = list(probe_rounds)
    points = feasible_set.sample(rng, num_points)
    nodes = rng.integers(0, cost.n, size=num_points)
    rounds = rng.integers(0, len(probe_rounds), size=num_points)
    worst = 0.0
    for x, i, k in zip(points, nodes, rounds):
        g = cost.subgradient(int(i), probe_rounds[int(k)], x)
        worst = max(worst, float(np.linalg.norm(g)))
    return 1.1 * worst
