"""Clairvoyant benchmarks, dynamic regret, and mixing diagnostics.

Dynamic regret compares the costs a node actually incurred against the
per-round constrained minimizer. Minimizers come either from a closed form
(quartic drift, noiseless tracking) or from a proximal projected-gradient
solver (smooth part stepped with 1/L, an optional l1 term handled by
soft-thresholding). The mixing diagnostic reconstructs the row-stochastic
matrices of a run, forms their backward products, and measures how fast the
normalized mass scalars approach the products' limiting weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graphs import build_row_stochastic


@dataclass(frozen=True)
class SolverBudget:
    iterations: int = 5000
    tol: float = 1e-8


@dataclass
class SolveResult:
    x: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool


def clairvoyant_quartic(t):
    """Closed-form minimizer of the drifting-quartic network cost."""
    return np.array([-2.0, np.arctan(t / 10.0)])


def soft_threshold(v, thr):
    return np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)


def estimate_smooth_lipschitz(cost, t, feasible_set, probes=32, iters=40, eps=1e-5):
    """Curvature bound of the smooth part via power iteration on
    finite-difference Hessian-vector products, probed at several points of
    the set (exact for quadratic smooth parts), inflated by 20%."""
    rng = np.random.default_rng(0x5EED)
    points = np.vstack([feasible_set.center, feasible_set.sample(rng, probes - 1)])
    worst = 0.0
    for x0 in points:
        g0 = cost.global_smooth_gradient(t, x0)
        v = rng.standard_normal(cost.m)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            hv = (cost.global_smooth_gradient(t, x0 + eps * v) - g0) / eps
            lam = float(np.linalg.norm(hv))
            if lam == 0.0:
                break
            v = hv / lam
        worst = max(worst, lam)
    return 1.2 * max(worst, 1e-12)


def kkt_residual(cost, feasible_set, t, x):
    """First-order optimality residual. With an l1 term: the componentwise
    stationarity defect of the (assumed inactive) constrained problem; the
    defect stays bounded away from zero if the set constraint does bind,
    which the non-convergence flag then reports. Without one: the norm of
    the projected-gradient step."""
    g = cost.global_smooth_gradient(t, x)
    sigma = cost.l1_weight
    if sigma != 0.0:
        active = x != 0.0
        res = np.where(
            active,
            np.abs(g + sigma * np.sign(x)),
            np.maximum(np.abs(g) - sigma, 0.0),
        )
        return float(np.max(res))
    return float(np.max(np.abs(x - feasible_set.project(x - g))))


def clairvoyant_iterative(cost, feasible_set, t, budget=None, warm_start=None,
                          lipschitz=None):
    """Proximal projected-gradient solve of the round-t network cost.

    Runs until the step norm drops below the budget tolerance or the
    iteration budget is exhausted; the result carries the achieved
    first-order residual and a convergence flag (residual <= 10 * tol).
    """
    budget = budget or SolverBudget()
    L = lipschitz or estimate_smooth_lipschitz(cost, t, feasible_set)
    x = np.array(
        feasible_set.center if warm_start is None else warm_start, dtype=float
    )
    thr = cost.l1_weight / L
    used = 0
    step_converged = False
    for used in range(1, budget.iterations + 1):
        g = cost.global_smooth_gradient(t, x)
        x_new = x - g / L
        if cost.l1_weight != 0.0:
            x_new = soft_threshold(x_new, thr)
        x_new = feasible_set.project(x_new)
        move = float(np.linalg.norm(x_new - x))
        x = x_new
        if move < budget.tol:
            step_converged = True
            break
    res = kkt_residual(cost, feasible_set, t, x)
    return SolveResult(
        x=x,
        kkt_residual=res,
        iterations=used,
        converged=step_converged or res <= 10.0 * budget.tol,
    )


def clairvoyant_costs(cost, feasible_set, horizon, minimizer=None, budget=None):
    """Per-round minimizers (rounds 0..horizon+1, the extra round feeds the
    path-variation sum) and minimizer costs (rounds 0..horizon).

    `minimizer` is an analytic map t -> x*; when omitted the iterative
    solver is used with warm starts and a Lipschitz estimate refreshed from
    round 0. Returns (values, minimizers, worst_kkt, all_converged).
    """
    xs = np.empty((horizon + 2, cost.m))
    values = np.empty(horizon + 1)
    worst_kkt = 0.0
    all_converged = True
    if minimizer is not None:
        for t in range(horizon + 2):
            xs[t] = minimizer(t)
        values[:] = [cost.global_value(t, xs[t]) for t in range(horizon + 1)]
        return values, xs, worst_kkt, all_converged
    budget = budget or SolverBudget()
    L = estimate_smooth_lipschitz(cost, 0, feasible_set)
    warm = None
    for t in range(horizon + 2):
        sol = clairvoyant_iterative(
            cost, feasible_set, t, budget=budget, warm_start=warm, lipschitz=L
        )
        xs[t] = sol.x
        warm = sol.x
        worst_kkt = max(worst_kkt, sol.kkt_residual)
        all_converged = all_converged and sol.converged
        if t <= horizon:
            values[t] = cost.global_value(t, sol.x)
    return values, xs, worst_kkt, all_converged


def audit_clairvoyant(cost, feasible_set, minimizers, rounds, rng, samples=100,
                      tol=1e-6):
    """Spot-check minimality: on each audited round, the claimed minimizer
    must not exceed the cost of any random feasible point by more than tol.
    Returns the worst signed gap (positive would be a violation)."""
    worst = -np.inf
    for t in rounds:
        ref = cost.global_value(t, minimizers[t])
        trial_costs = cost.global_value_many(t, feasible_set.sample(rng, samples))
        worst = max(worst, float(ref - trial_costs.min()))
        if ref - trial_costs.min() > tol:
            return worst
    return worst


def dynamic_regret(traj, clairvoyant_values, j):
    """Node j's cumulative excess cost curve over rounds 0..T."""
    return np.cumsum(traj.node_costs[:, j] - clairvoyant_values)


def regret_matrix(traj, clairvoyant_values):
    """All nodes' cumulative excess cost curves, shape (n, T+1)."""
    return np.cumsum(traj.node_costs - clairvoyant_values[:, None], axis=0).T


def path_variation(minimizers, horizon):
    """Total movement of the minimizer sequence over rounds 0..horizon
    (uses minimizers up to round horizon+1)."""
    if callable(minimizers):
        xs = np.stack([minimizers(t) for t in range(horizon + 2)])
    else:
        xs = np.asarray(minimizers)
        if xs.shape[0] < horizon + 2:
            raise ValueError("need minimizers through round horizon+1")
    steps = np.linalg.norm(np.diff(xs[: horizon + 2], axis=0), axis=1)
    return float(steps.sum())


def disagreement_curve(traj):
    """Per-round maximum pairwise distance between node decisions."""
    out = np.empty(traj.x.shape[0])
    for t, pts in enumerate(traj.x):
        diffs = pts[:, None, :] - pts[None, :, :]
        out[t] = np.sqrt((diffs * diffs).sum(axis=2)).max()
    return out


# -- mixing diagnostics ---------------------------------------------------


@dataclass
class PerronDiagnostic:
    """Limiting weight vectors of backward mixing products and the decay of
    the normalized mass scalars toward them."""

    pi: np.ndarray
    residuals: np.ndarray
    slope: float | None
    lambda_hat: float | None
    c_hat: float | None
    exact: bool
    low_confidence: bool


def perron_from_products(b_mats):
    """For each t, the row-average of B_{T-1} ... B_t applied backward,
    normalized to sum one: the limiting weight vector of the product.
    Returns shape (T+1, n); the entry at t = T is the uniform vector."""
    T = len(b_mats)
    n = b_mats[0].shape[0]
    pi = np.empty((T + 1, n))
    acc = np.eye(n)
    pi[T] = 1.0 / n
    for t in range(T - 1, -1, -1):
        acc = acc @ b_mats[t]
        row_avg = acc.mean(axis=0)
        pi[t] = row_avg / row_avg.sum()
    return pi


def estimate_perron(schedule, phi_history, horizon):
    """Reconstruct the run's mixing matrices from the schedule and recorded
    mass scalars, estimate the limiting weight vectors, and fit the
    geometric decay of |phi_{i,s}/n - pi_{i,s}| against (T - s)."""
    phi_history = np.asarray(phi_history, dtype=float)
    n = phi_history.shape[1]
    b_mats = [
        build_row_stochastic(
            schedule.weights_at(t).a, phi_history[t], phi_history[t + 1]
        )
        for t in range(horizon)
    ]
    pi = perron_from_products(b_mats)
    residuals = np.full(horizon + 1, np.nan)
    residuals[1:] = np.max(
        np.abs(phi_history[1 : horizon + 1] / n - pi[1 : horizon + 1]), axis=1
    )
    s = np.arange(1, horizon + 1)
    usable = residuals[1:] > 1e-13
    low_confidence = horizon < schedule.b_window * n or int(usable.sum()) < 8
    if not usable.any():
        return PerronDiagnostic(
            pi=pi, residuals=residuals, slope=None, lambda_hat=None, c_hat=None,
            exact=True, low_confidence=low_confidence,
        )
    xs = (horizon - s[usable]).astype(float)
    ys = np.log(residuals[1:][usable])
    slope, intercept = np.polyfit(xs, ys, 1)
    return PerronDiagnostic(
        pi=pi,
        residuals=residuals,
        slope=float(slope),
        lambda_hat=float(np.exp(slope)),
        c_hat=float(np.exp(intercept)),
        exact=False,
        low_confidence=low_confidence,
    )


# -- per-trial reports and aggregation ------------------------------------


@dataclass
class RegretReport:
    """Regret trajectories of one trial, or the average over several.

    `node_regret` holds cumulative curves per node; max/min are taken over
    nodes within each trial before any cross-trial averaging, and
    `network_avg_regret` is the across-nodes mean curve.
    """

    node_regret: np.ndarray
    max_regret: np.ndarray
    min_regret: np.ndarray
    network_avg_regret: np.ndarray
    disagreement: np.ndarray
    path_var: float
    trials: int = 1

    @classmethod
    def from_run(cls, traj, clairvoyant_values, path_var):
        curves = regret_matrix(traj, clairvoyant_values)
        return cls(
            node_regret=curves,
            max_regret=curves.max(axis=0),
            min_regret=curves.min(axis=0),
            network_avg_regret=curves.mean(axis=0),
            disagreement=disagreement_curve(traj),
            path_var=path_var,
        )

    def time_average(self, curve):
        """Running per-round average: curve[t] / (t+1)."""
        return curve / np.arange(1, curve.shape[-1] + 1)


def aggregate(reports):
    """Average a list of per-trial reports elementwise (single report:
    identity). Max/min curves remain per-trial extrema, averaged."""
    if not reports:
        raise ValueError("nothing to aggregate")
    if len(reports) == 1:
        return replace(reports[0])
    return RegretReport(
        node_regret=np.mean([r.node_regret for r in reports], axis=0),
        max_regret=np.mean([r.max_regret for r in reports], axis=0),
        min_regret=np.mean([r.min_regret for r in reports], axis=0),
        network_avg_regret=np.mean([r.network_avg_regret for r in reports], axis=0),
        disagreement=np.mean([r.disagreement for r in reports], axis=0),
        path_var=float(np.mean([r.path_var for r in reports])),
        trials=len(reports),
    )
