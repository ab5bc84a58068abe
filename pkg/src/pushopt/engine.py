"""Synchronous-round execution of the distributed online updates.

Every round follows the same barrier semantics: the full (x, phi) snapshot
is materialized, every node's mass scalar is pushed through the
column-stochastic weights, the mass-rescaled row-stochastic mixing matrix
is formed, and only then do the nodes take their (estimated or explicit)
subgradient steps and project back into the feasible region. All per-node
updates read the round-t snapshot exclusively, so update order is
irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import SmoothingParams, sample_sphere_batch, zo_gradient_batch
from .exceptions import InvariantViolation
from .graphs import build_row_stochastic

PHI_CONSERVATION_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
ORACLE_BOUND_TOL = 1e-9

ALGORITHMS = ("zo", "subgradient")


def trial_rngs(seed, trial):
    """Independent (problem, engine, audit) generators for one trial.

    Streams depend only on (seed, trial), so trials can run in any order or
    in parallel and still reproduce bit-identically.
    """
    root = np.random.SeedSequence([int(seed), int(trial)])
    children = root.spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


@dataclass
class RunConfig:
    """Execution parameters of a single run."""

    algorithm: str
    horizon: int
    step_scale: float
    smoothing: SmoothingParams | None = None
    seed: int = 0
    trials: int = 1
    start: np.ndarray | None = None
    record_mixing: bool = False
    record_directions: bool = False
    check_oracle_bound: bool = True
    divergence_limit: float = 1e6

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if not self.step_scale > 0.0:
            raise ValueError("step scale must be positive")
        if self.algorithm == "zo" and self.smoothing is None:
            raise ValueError("the value-only algorithm needs smoothing parameters")

    def step(self, t):
        """Step size scale / sqrt(t+1): positive and non-increasing."""
        return self.step_scale / np.sqrt(t + 1.0)

    @property
    def shrink(self):
        """Effective shrinkage of the feasible set (0 for the subgradient
        algorithm, which projects onto the full set)."""
        return self.smoothing.xi if self.algorithm == "zo" else 0.0


@dataclass
class NetworkState:
    """Synchronized snapshot: decisions (n, m), mass scalars (n,), round."""

    x: np.ndarray
    phi: np.ndarray
    t: int


@dataclass
class CheckSummary:
    """Worst-case deviations observed by the per-round invariant checks."""

    col_sum_err: float = 0.0
    row_sum_err: float = 0.0
    phi_drift: float = 0.0
    phi_min: float = np.inf
    phi_max: float = -np.inf
    oracle_bound_ratio: float = 0.0
    rounds_checked: int = 0


@dataclass
class Trajectory:
    """Recorded run: states, mass scalars, and revealed per-node global
    costs for rounds 0..T; optionally mixing matrices and probe directions."""

    x: np.ndarray
    phi: np.ndarray
    node_costs: np.ndarray
    checks: CheckSummary
    mixing: np.ndarray | None = None
    directions: np.ndarray | None = None

    @property
    def horizon(self):
        return self.x.shape[0] - 1

    @property
    def nodes(self):
        return self.x.shape[1]


def init(n, feasible_set, config):
    """Common start: unit mass everywhere; every node starts from the same
    configured point (default: the set's Chebyshev center) projected into
    the (possibly shrunk) feasible set."""
    start = feasible_set.center if config.start is None else np.asarray(config.start, float)
    x0 = feasible_set.project(start, config.shrink)
    return NetworkState(
        x=np.tile(x0, (n, 1)), phi=np.ones(n), t=0
    )


def _mass_update(state, schedule, checks, t):
    """Push the mass scalars through the round-t weights and validate the
    conservation, positivity and bound invariants."""
    weights = schedule.weights_at(t)
    a = weights.a
    n = a.shape[0]
    checks.col_sum_err = max(
        checks.col_sum_err, float(np.max(np.abs(a.sum(axis=0) - 1.0)))
    )
    phi_next = a @ state.phi
    drift = abs(float(phi_next.sum()) - n)
    if drift > PHI_CONSERVATION_TOL:
        raise InvariantViolation(
            "phi-conservation", f"sum of mass scalars drifted by {drift:.3e} at t={t}"
        )
    lo, hi = schedule.phi_bounds()
    if phi_next.min() < lo - 1e-12 or phi_next.max() > hi + 1e-12:
        raise InvariantViolation(
            "phi-bounds",
            f"mass scalar left [{lo:.3e}, {hi:.3e}] at t={t}: "
            f"range [{phi_next.min():.3e}, {phi_next.max():.3e}]",
        )
    b = build_row_stochastic(a, state.phi, phi_next)
    checks.row_sum_err = max(
        checks.row_sum_err, float(np.max(np.abs(b.sum(axis=1) - 1.0)))
    )
    checks.phi_drift = max(checks.phi_drift, drift)
    checks.phi_min = min(checks.phi_min, float(phi_next.min()))
    checks.phi_max = max(checks.phi_max, float(phi_next.max()))
    return phi_next, b


def _finish_round(x_next, feasible_set, shrink, config, t):
    if float(np.max(np.abs(x_next))) > config.divergence_limit:
        raise InvariantViolation(
            "divergence", f"a coordinate exceeded {config.divergence_limit:g} at t={t}"
        )
    inside = feasible_set.contains(x_next, shrink, FEASIBILITY_TOL)
    if not np.all(inside):
        raise InvariantViolation(
            "feasibility", f"a projected decision left the shrunk set at t={t}"
        )


def round_zo(state, schedule, cost, config, t, rng, feasible_set, checks=None):
    """One synchronous round of the value-only algorithm. Returns the next
    state plus the mixing matrix and probe directions used."""
    checks = CheckSummary() if checks is None else checks
    phi_next, b = _mass_update(state, schedule, checks, t)
    mixed = b @ state.x
    params = config.smoothing
    zetas = sample_sphere_batch(rng, cost.n, cost.m)
    queries = state.x + params.mu * zetas
    if not np.all(feasible_set.contains(queries, 0.0, FEASIBILITY_TOL)):
        raise InvariantViolation(
            "query-feasibility", f"a perturbed query left the set at t={t}"
        )
    ghat = zo_gradient_batch(cost, t, state.x, zetas, params)
    if cost.lipschitz_G is not None and config.check_oracle_bound:
        bound = cost.m * cost.lipschitz_G
        worst = float(np.max(np.linalg.norm(ghat, axis=1)))
        checks.oracle_bound_ratio = max(checks.oracle_bound_ratio, worst / bound)
        if worst > bound + ORACLE_BOUND_TOL:
            raise InvariantViolation(
                "oracle-bound", f"||ghat||={worst:.6g} exceeded m*G={bound:.6g} at t={t}"
            )
    step = config.step(t)
    x_next = feasible_set.project(
        mixed - (step / phi_next)[:, None] * ghat, config.shrink
    )
    _finish_round(x_next, feasible_set, config.shrink, config, t)
    checks.rounds_checked += 1
    return NetworkState(x=x_next, phi=phi_next, t=t + 1), b, zetas, checks


def round_subgradient(state, schedule, cost, config, t, feasible_set, checks=None):
    """One synchronous round of the explicit-subgradient algorithm."""
    checks = CheckSummary() if checks is None else checks
    phi_next, b = _mass_update(state, schedule, checks, t)
    mixed = b @ state.x
    grads = cost.subgradient_batch(t, state.x)
    step = config.step(t)
    x_next = feasible_set.project(mixed - (step / phi_next)[:, None] * grads, 0.0)
    _finish_round(x_next, feasible_set, 0.0, config, t)
    checks.rounds_checked += 1
    return NetworkState(x=x_next, phi=phi_next, t=t + 1), b, checks


def run(config, schedule, cost, feasible_set, rng=None):
    """Execute rounds 0..horizon, recording the trajectory.

    Each round first records the synchronized decisions and the revealed
    network cost at every node's decision, then performs the update; the
    final round is recorded without a trailing update. `rng` drives the
    probe directions of the value-only algorithm (unused otherwise); pass
    the engine stream from `trial_rngs` for reproducible trials.
    """
    n, m, horizon = cost.n, cost.m, config.horizon
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([int(config.seed), 0]))
    if config.algorithm == "zo":
        config.smoothing.check_feasible(feasible_set.r_inner)
    state = init(n, feasible_set, config)
    xs = np.empty((horizon + 1, n, m))
    phis = np.empty((horizon + 1, n))
    node_costs = np.empty((horizon + 1, n))
    mixing = np.empty((horizon, n, n)) if config.record_mixing else None
    directions = np.empty((horizon, n, m)) if config.record_directions else None
    checks = CheckSummary()
    for t in range(horizon + 1):
        xs[t] = state.x
        phis[t] = state.phi
        node_costs[t] = cost.global_value_many(t, state.x)
        if t == horizon:
            break
        if config.algorithm == "zo":
            state, b, zetas, _ = round_zo(
                state, schedule, cost, config, t, rng, feasible_set, checks
            )
            if directions is not None:
                directions[t] = zetas
        else:
            state, b, _ = round_subgradient(
                state, schedule, cost, config, t, feasible_set, checks
            )
        if mixing is not None:
            mixing[t] = b
    return Trajectory(
        x=xs,
        phi=phis,
        node_costs=node_costs,
        checks=checks,
        mixing=mixing,
        directions=directions,
    )
