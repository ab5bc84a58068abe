"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s` to see them). Expensive runs are
shared through module-scoped fixtures; every tolerance is pinned here.
"""

import time

import numpy as np
import pytest

from pushopt.benchmark import estimate_perron
from pushopt.config import load
from pushopt.costs import (
    OnlineCost,
    SmoothingParams,
    sample_ball_batch,
    sample_sphere_batch,
    zo_gradient_batch,
)
from pushopt.engine import RunConfig, run, trial_rngs
from pushopt.experiments import (
    build_cost,
    build_feasible_set,
    build_schedule,
    estimate_bound,
    resolve_run_config,
    run_experiment,
    sweep,
)
from pushopt.graphs import GraphSchedule, complete_digraph
from pushopt.problems import quartic_suite
from pushopt.sets import Ball, Box

from reference_oracles import single_node_subgradient_descent, single_node_zo_descent


def criterion(num, ok, description):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {description}")
    assert ok, f"criterion {num} failed: {description}"


def time_avg(curve):
    return curve / np.arange(1, curve.shape[-1] + 1)


# -- shared expensive runs ---------------------------------------------------


@pytest.fixture(scope="module")
def quartic_5000():
    """Single 5000-round run of the quartic preset, engine time measured."""
    cfg = load("quartic").override(trials=1)
    g_bound = estimate_bound(cfg)
    cost = build_cost(cfg, trial_rngs(cfg.seed, 0)[0], lipschitz_G=g_bound)
    feasible = build_feasible_set(cfg, cost.m)
    schedule = build_schedule(cfg)
    run_cfg = resolve_run_config(cfg, feasible, cost.m, record_mixing=True)
    start = time.perf_counter()
    traj = run(run_cfg, schedule, cost, feasible, rng=trial_rngs(cfg.seed, 0)[1])
    elapsed = time.perf_counter() - start
    return {"cfg": cfg, "schedule": schedule, "traj": traj, "seconds": elapsed}


@pytest.fixture(scope="module")
def quartic_alg1_2000():
    cfg = load("quartic").override(horizon=2000, trials=20)
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def quartic_alg2_2000():
    cfg = load("quartic").override(horizon=2000, trials=20, algorithm="subgradient")
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def tracking_2000():
    cfg = load("tracking").override(trials=1)
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def sparse_full():
    """The complete 100-trial sparse preset, wall time measured."""
    cfg = load("sparse")
    start = time.perf_counter()
    result = run_experiment(cfg)
    return {"result": result, "seconds": time.perf_counter() - start, "cfg": cfg}


# -- criterion 1: stochasticity and mass conservation at scale ---------------


def test_criterion_1_stochasticity(quartic_5000):
    checks = quartic_5000["traj"].checks
    ok = (
        checks.rounds_checked == 5000
        and checks.col_sum_err <= 1e-12
        and checks.row_sum_err <= 1e-12
        and checks.phi_drift <= 1e-10
        and quartic_5000["seconds"] < 10.0
    )
    criterion(
        1, ok,
        f"5000 rounds: col err {checks.col_sum_err:.1e}, row err "
        f"{checks.row_sum_err:.1e}, mass drift {checks.phi_drift:.1e}, "
        f"{quartic_5000['seconds']:.2f}s",
    )


# -- criterion 2: mass-scalar bounds on every preset --------------------------


def test_criterion_2_phi_bounds(quartic_5000, tracking_2000, sparse_full):
    entries = []
    lo, hi = quartic_5000["schedule"].phi_bounds()
    c = quartic_5000["traj"].checks
    entries.append(("quartic", lo <= c.phi_min and c.phi_max <= hi, c))
    for name, res in (("tracking", tracking_2000), ("sparse", sparse_full["result"])):
        inv = res.manifest["invariants"]
        entries.append((name, inv["phi_bounds_ok"], inv))
    ok = all(e[1] for e in entries)
    criterion(2, ok, "observed mass scalars inside the theoretical bounds on "
                     + ", ".join(e[0] for e in entries))


# -- criterion 3: value-only oracle suite -------------------------------------


class SharedQuadratic(OnlineCost):
    """f(x) = 0.5 q ||x||^2 + b . x for every node; batch queries accept any
    number of rows."""

    def __init__(self, q, b):
        self.q = float(q)
        self.b = np.asarray(b, float)
        self.n, self.m = 1, self.b.size

    def value(self, i, t, x):
        x = np.asarray(x, float)
        return 0.5 * self.q * float(x @ x) + float(self.b @ x)

    def subgradient(self, i, t, x):
        return self.q * np.asarray(x, float) + self.b

    def value_batch(self, t, points):
        return 0.5 * self.q * np.sum(points * points, axis=1) + points @ self.b

    def smoothed_value(self, x, mu):
        # ball-average in closed form: E[u u^T] = I/(m+2) over the unit ball
        return self.value(0, 0, x) + 0.5 * self.q * mu**2 * self.m / (self.m + 2)


def test_criterion_3_oracle_suite():
    m, radius = 4, 2.0
    cost = SharedQuadratic(q=0.8, b=np.array([0.6, -0.3, 0.2, 0.55]))
    ball = Ball(np.zeros(m), radius)
    G = cost.q * radius + float(np.linalg.norm(cost.b))  # exact sup of ||grad||
    params = SmoothingParams(mu=0.05, xi=0.1)
    rng = np.random.default_rng(20240817)

    # (a) norm bound on one million estimator calls
    bound = m * G + 1e-9
    worst = 0.0
    for _ in range(20):
        x = ball.project(ball.sample(rng, 1)[0], params.xi)
        zetas = sample_sphere_batch(rng, 50_000, m)
        ghats = zo_gradient_batch(cost, 0, np.tile(x, (50_000, 1)), zetas, params)
        worst = max(worst, float(np.max(np.linalg.norm(ghats, axis=1))))
    bound_ok = worst <= bound

    # (b) Monte-Carlo mean vs finite differences of the smoothed function
    x = ball.project(ball.sample(rng, 1)[0], params.xi)
    zetas = sample_sphere_batch(rng, 100_000, m)
    mc_mean = zo_gradient_batch(cost, 0, np.tile(x, (100_000, 1)), zetas, params).mean(axis=0)
    h = 1e-4
    fd = np.empty(m)
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        fd[k] = (cost.smoothed_value(x + e, params.mu)
                 - cost.smoothed_value(x - e, params.mu)) / (2 * h)
    rel_err = float(np.linalg.norm(mc_mean - fd) / np.linalg.norm(fd))
    unbiased_ok = rel_err <= 0.03

    # (c) smoothing sandwich f <= f_hat <= f + mu G within sampling error
    sandwich_ok = True
    for _ in range(1000):
        x = ball.project(ball.sample(rng, 1)[0], params.xi)
        probes = x + params.mu * sample_ball_batch(rng, 4000, m)
        vals = cost.value_batch(0, probes)
        est = float(vals.mean())
        margin = 5.0 * float(vals.std(ddof=1)) / np.sqrt(vals.size)
        base = cost.value(0, 0, x)
        if not (base - margin <= est <= base + params.mu * G + margin):
            sandwich_ok = False
            break

    ok = bound_ok and unbiased_ok and sandwich_ok
    criterion(
        3, ok,
        f"max ||ghat||/(mG) = {worst / (m * G):.4f} over 1e6 calls; "
        f"Monte-Carlo vs finite-difference rel err {rel_err:.4f}; "
        f"sandwich held on 1000 points",
    )


# -- criterion 4: single-node reduction to projected descent ------------------


class DriftTarget(OnlineCost):
    n, m = 1, 2

    def value(self, i, t, x):
        d = np.asarray(x, float) - self.target(t)
        return float(d @ d)

    def subgradient(self, i, t, x):
        return 2.0 * (np.asarray(x, float) - self.target(t))

    @staticmethod
    def target(t):
        return np.array([np.cos(t / 40.0), 1.2 + 0.5 * np.sin(t / 25.0)])


def test_criterion_4_reduction_oracle():
    from pushopt.graphs import Digraph

    lo, hi = np.array([-3.0, 0.0]), np.array([2.0, 3.0])
    box = Box(lo, hi)
    sched = GraphSchedule([Digraph(1)], b_window=1)
    cost = DriftTarget()
    T, seed = 300, 424242

    cfg_zo = RunConfig(algorithm="zo", horizon=T, step_scale=0.5,
                       smoothing=SmoothingParams(mu=1e-3, xi=0.02), seed=seed)
    traj_zo = run(cfg_zo, sched, cost, box, rng=trial_rngs(seed, 0)[1])
    ref_zo = single_node_zo_descent(
        lambda t, x: cost.value(0, t, x), lo, hi, T, 0.5, 1e-3, 0.02, seed, 0
    )
    gap_zo = float(np.max(np.abs(traj_zo.x[:, 0, :] - ref_zo)))

    cfg_sub = RunConfig(algorithm="subgradient", horizon=T, step_scale=0.5, seed=seed)
    traj_sub = run(cfg_sub, sched, cost, box)
    ref_sub = single_node_subgradient_descent(
        lambda t, x: cost.subgradient(0, t, x), lo, hi, T, 0.5
    )
    gap_sub = float(np.max(np.abs(traj_sub.x[:, 0, :] - ref_sub)))

    ok = gap_zo <= 1e-12 and gap_sub <= 1e-12
    criterion(4, ok, f"single-node gap vs standalone descent: value-only "
                     f"{gap_zo:.1e}, subgradient {gap_sub:.1e}")


# -- criterion 5: terminal tracking of the drifting minimizer -----------------


def test_criterion_5_terminal_tracking(quartic_alg1_2000, quartic_alg2_2000):
    star = np.array([-2.0, np.arctan(200.0)])
    term2 = np.stack([t.terminal_x for t in quartic_alg2_2000.trial_results])
    err2 = float(np.max(np.abs(term2.mean(axis=0) - star)))
    term1 = np.stack([t.terminal_x for t in quartic_alg1_2000.trial_results])
    err1 = float(np.max(np.abs(term1.mean(axis=0) - star)))
    ok = err2 <= 0.2 and err1 <= 0.35
    criterion(5, ok, f"terminal coordinate error: subgradient {err2:.3f} (<=0.2), "
                     f"value-only {err1:.3f} (<=0.35), 20 trials")


# -- criterion 6: sublinear time-average regret across horizons ---------------


def test_criterion_6_sublinear_sweep():
    cfg = load("quartic")
    horizons = [250, 500, 1000, 2000, 4000]
    start = time.perf_counter()
    rows = sweep(cfg, horizons)
    elapsed = time.perf_counter() - start
    max_avgs = np.array([row[1] for row in rows])
    slope = float(np.polyfit(np.log(horizons), np.log(max_avgs), 1)[0])
    monotone = bool(np.all(np.diff(max_avgs) < 0))
    ok = -0.8 <= slope <= -0.3 and monotone and elapsed < 120.0
    criterion(6, ok, f"log-log slope {slope:.3f} in [-0.8,-0.3], "
                     f"decreasing {monotone}, {elapsed:.1f}s")


# -- criterion 7: value-only vs subgradient parity -----------------------------


def test_criterion_7_parity(quartic_alg1_2000, quartic_alg2_2000):
    r1 = quartic_alg1_2000.summary.max_regret[-1] / 2001.0
    r2 = quartic_alg2_2000.summary.max_regret[-1] / 2001.0
    gap = abs(r1 - r2) / r2
    ok = gap <= 0.25
    criterion(7, ok, f"time-average regret: value-only {r1:.4f}, subgradient "
                     f"{r2:.4f}, relative gap {gap:.3f} (<=0.25)")


# -- criterion 8: geometric decay of the mass/limit-weight residual ------------


def test_criterion_8_mixing_diagnostic(quartic_5000, tracking_2000, sparse_full):
    entries = []
    diag_q = estimate_perron(
        quartic_5000["schedule"], quartic_5000["traj"].phi, 5000
    )
    entries.append(("quartic", diag_q.exact or diag_q.slope < 0.0,
                    f"slope {diag_q.slope}"))
    for name, res in (("tracking", tracking_2000), ("sparse", sparse_full["result"])):
        d = res.perron
        entries.append((name, d.exact or (d.slope is not None and d.slope < 0.0),
                        "exact" if d.exact else f"slope {d.slope}"))

    # balanced control: complete graph weights are doubly stochastic, so the
    # residual must vanish identically
    sched = GraphSchedule([complete_digraph(6)], b_window=1)
    cfg = RunConfig(algorithm="subgradient", horizon=200, step_scale=0.5)
    traj = run(cfg, sched, quartic_suite(), Box([-3.0, 0.0], [2.0, 3.0]))
    diag_b = estimate_perron(sched, traj.phi, 200)
    balanced_ok = diag_b.exact and np.nanmax(diag_b.residuals) <= 1e-10
    entries.append(("balanced-control", balanced_ok, "residual <= 1e-10"))

    ok = all(e[1] for e in entries)
    criterion(8, ok, "; ".join(f"{n}: {d}" for n, _, d in entries))


# -- criterion 9: sparse-recovery regret decay at scale ------------------------


def test_criterion_9_sparse_preset(sparse_full):
    res = sparse_full["result"]
    inv = res.manifest["invariants"]
    ta_max = time_avg(res.summary.max_regret)
    ta_min = time_avg(res.summary.min_regret)
    max_dec = bool(np.all(np.diff(ta_max[50:]) <= 1e-12))
    min_dec = bool(np.all(np.diff(ta_min[50:]) <= 1e-12))
    kkt_ok = inv["clairvoyant_kkt_max"] <= 1e-6
    in_time = sparse_full["seconds"] < 300.0
    ok = max_dec and min_dec and kkt_ok and in_time
    criterion(
        9, ok,
        f"100-trial averaged max/min time-average regret decreasing after round "
        f"50: {max_dec}/{min_dec}; solver residual {inv['clairvoyant_kkt_max']:.1e} "
        f"(<=1e-6); {sparse_full['seconds']:.0f}s",
    )


# -- criterion 10: estimator error grows with problem dimension ----------------


def test_criterion_10_dimension_sensitivity():
    finals = []
    for m in (6, 8, 10):
        cfg = load("sparse").override(trials=20)
        cfg.problem_params = dict(cfg.problem_params, signal_dim=m)
        res = run_experiment(cfg)
        finals.append(float(time_avg(res.summary.network_avg_regret)[-1]))
    ok = finals[0] <= finals[1] <= finals[2]
    criterion(10, ok, "terminal averaged time-average regret by dimension: "
                      + ", ".join(f"m={m}: {v:.4f}" for m, v in zip((6, 8, 10), finals)))


# -- criterion 11: bit-level determinism ---------------------------------------


def test_criterion_11_determinism(tmp_path):
    cfg = load("quartic").override(horizon=100, trials=4, seed=7)
    run_experiment(cfg, out_dir=tmp_path / "a")
    run_experiment(cfg, out_dir=tmp_path / "b")
    run_experiment(cfg.override(workers=2), out_dir=tmp_path / "c")
    ra = (tmp_path / "a" / "regret.csv").read_bytes()
    rb = (tmp_path / "b" / "regret.csv").read_bytes()
    rc = (tmp_path / "c" / "regret.csv").read_bytes()
    ok = ra == rb == rc
    criterion(11, ok, "regret.csv byte-identical across reruns and across "
                      "trial-parallelism degrees")
