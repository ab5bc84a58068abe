"""Experiment orchestration: config to objects, trial loops, result files.

One experiment = one config = `trials` independent runs whose random streams
derive from (seed, trial index) alone, so any execution order or degree of
trial parallelism reproduces bit-identical results. Output files (regret,
diagnostics, optional trajectory, manifest) are byte-reproducible from
(config, seed).
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import benchmark, engine
from .benchmark import (
    RegretReport,
    SolverBudget,
    aggregate,
    audit_clairvoyant,
    clairvoyant_costs,
    estimate_perron,
    path_variation,
)
from .config import ExperimentConfig
from .costs import SmoothingParams, estimate_subgradient_bound
from .exceptions import ConfigError, InvariantViolation, SolverNonConvergence
from .graphs import (
    Digraph,
    GraphSchedule,
    WeightMatrix,
    build_column_stochastic,
    check_joint_connectivity,
    complete_digraph,
    random_strongly_connected,
    ring_digraph,
)
from .problems import quartic_suite, sparse_suite, tracking_suite
from .sets import Ball, Box

AUDIT_EVERY = 100
AUDIT_SAMPLES = 100
AUDIT_TOL = 1e-6
G_PROBE_STREAM = 2**48  # reserved trial index for the bound-estimation streams


# -- config -> objects ------------------------------------------------------


def problem_dimension(cfg):
    if cfg.problem_kind == "quartic":
        return 2
    if cfg.problem_kind == "tracking":
        return 2 * len(cfg.problem_params.get("omega", (1.0, 1.5, 2.0)))
    return int(cfg.problem_params.get("signal_dim", 8))


def build_feasible_set(cfg, dimension):
    params = cfg.set_params
    if cfg.set_kind == "box":
        try:
            lo, hi = params["lo"], params["hi"]
        except KeyError as exc:
            raise ConfigError("box set needs 'lo' and 'hi'") from exc
        made = Box(lo, hi, r_inner=params.get("r_inner"), R_outer=params.get("R_outer"))
    else:
        radius = params.get("radius")
        if radius is None:
            raise ConfigError("ball set needs a 'radius'")
        center = params.get("center")
        if center is None:
            center = np.zeros(dimension)
        made = Ball(
            center, radius, r_inner=params.get("r_inner"), R_outer=params.get("R_outer")
        )
    if made.dimension != dimension:
        raise ConfigError(
            f"set dimension {made.dimension} does not match problem dimension {dimension}"
        )
    return made


def build_schedule(cfg):
    n = cfg.graph_nodes
    if cfg.graph_generator:
        if cfg.graph_generator == "ring":
            graphs = [ring_digraph(n)]
        elif cfg.graph_generator == "complete":
            graphs = [complete_digraph(n)]
        else:
            gen_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
            count = int(cfg.problem_params.get("generator_graphs", 2))
            graphs = [
                random_strongly_connected(n, gen_rng, extra_edges=n // 2)
                for _ in range(count)
            ]
        return GraphSchedule(graphs, policy=cfg.graph_policy, b_window=cfg.graph_b_window)
    graphs, weights, any_matrix = [], [], False
    for entry in cfg.graph_list:
        if "matrix" in entry:
            any_matrix = True
            mat = np.asarray(entry["matrix"], dtype=float)
            adj = (mat > 0.0) & ~np.eye(n, dtype=bool)
            edges = frozenset(
                (j + 1, i + 1) for i in range(n) for j in range(n) if adj[i, j]
            )
            graphs.append(Digraph(n, edges))
            weights.append(mat)
        else:
            graphs.append(
                Digraph(n, frozenset((int(u), int(v)) for u, v in entry["edges"]))
            )
            weights.append(None)
    if any_matrix:
        weights = [
            WeightMatrix.from_matrix(w, g) if w is not None else build_column_stochastic(g)
            for g, w in zip(graphs, weights)
        ]
        return GraphSchedule(
            graphs, policy=cfg.graph_policy, b_window=cfg.graph_b_window, weights=weights
        )
    return GraphSchedule(graphs, policy=cfg.graph_policy, b_window=cfg.graph_b_window)


def build_cost(cfg, rng, lipschitz_G=None):
    params = cfg.problem_params
    if cfg.problem_kind == "quartic":
        return quartic_suite(lipschitz_G=lipschitz_G)
    if cfg.problem_kind == "tracking":
        return tracking_suite(
            rng,
            omega=tuple(params.get("omega", (1.0, 1.5, 2.0))),
            sample_rate=float(params.get("sample_rate", 100.0)),
            lipschitz_G=lipschitz_G,
        )
    return sparse_suite(
        rng,
        sensors=int(params.get("sensors", 40)),
        measurement_dim=int(params.get("measurement_dim", 3)),
        signal_dim=int(params.get("signal_dim", 8)),
        noise_std=float(params.get("noise_std", 0.0)),
        gamma_reg=params.get("gamma_reg"),
        sigma_reg=params.get("sigma_reg"),
        lipschitz_G=lipschitz_G,
    )


def _g_probe_rounds(cfg):
    if cfg.problem_kind == "quartic":
        return [0, 1, 10, 100, 1000, 10000]
    if cfg.problem_kind == "tracking":
        step = max(1, cfg.horizon // 63)
        return list(range(0, cfg.horizon + 1, step))
    return list(range(min(48, cfg.horizon + 1)))


def estimate_bound(cfg):
    """Sampled subgradient bound from a dedicated probe suite/stream (shared
    by all trials; feeds the estimator-norm assertion and diagnostics)."""
    if "lipschitz_G" in cfg.problem_params:
        return float(cfg.problem_params["lipschitz_G"])
    prob_rng, _, sample_rng = engine.trial_rngs(cfg.seed, G_PROBE_STREAM)
    cost = build_cost(cfg, prob_rng)
    feasible = build_feasible_set(cfg, cost.m)
    return estimate_subgradient_bound(
        cost, feasible, sample_rng, _g_probe_rounds(cfg), num_points=10_000
    )


def resolve_run_config(cfg, feasible_set, dimension, record_mixing=False):
    """Fill algorithm defaults: step scale 1/m (value-only) or 1
    (subgradient); exploration radius r/sqrt(T+1) and shrinkage
    1/sqrt(T+1) unless pinned by the config."""
    if cfg.step_scale is not None:
        scale = cfg.step_scale
    else:
        scale = 1.0 / dimension if cfg.algorithm == "zo" else 1.0
    smoothing = None
    if cfg.algorithm == "zo":
        root = np.sqrt(cfg.horizon + 1.0)
        mu = cfg.mu if cfg.mu is not None else feasible_set.r_inner / root
        xi = cfg.xi if cfg.xi is not None else 1.0 / root
        smoothing = SmoothingParams(mu=mu, xi=xi)
        smoothing.check_feasible(feasible_set.r_inner)
    return engine.RunConfig(
        algorithm=cfg.algorithm,
        horizon=cfg.horizon,
        step_scale=scale,
        smoothing=smoothing,
        seed=cfg.seed,
        trials=cfg.trials,
        start=None if cfg.start is None else np.asarray(cfg.start, dtype=float),
        record_mixing=record_mixing,
    )


# -- trials ------------------------------------------------------------------


@dataclass
class TrialResult:
    trial: int
    report: RegretReport
    checks: engine.CheckSummary
    clairvoyant_kkt: float
    clairvoyant_converged: bool
    audit_gap: float
    terminal_x: np.ndarray | None = None
    traj: engine.Trajectory | None = None


def run_trial(cfg, trial, g_bound=None, keep_trajectory=False):
    """Execute one trial end to end: build the suite from the trial's own
    streams, run the engine, benchmark against the clairvoyant."""
    prob_rng, eng_rng, audit_rng = engine.trial_rngs(cfg.seed, trial)
    cost = build_cost(cfg, prob_rng, lipschitz_G=g_bound)
    feasible = build_feasible_set(cfg, cost.m)
    schedule = build_schedule(cfg)
    if schedule.n != cost.n:
        raise ConfigError(
            f"graph has {schedule.n} nodes but the problem defines {cost.n}"
        )
    run_cfg = resolve_run_config(cfg, feasible, cost.m, record_mixing=keep_trajectory)
    traj = engine.run(run_cfg, schedule, cost, feasible, rng=eng_rng)

    minimizer = getattr(cost, "analytic_minimizer", None)
    values, minimizers, kkt, converged = clairvoyant_costs(
        cost, feasible, cfg.horizon, minimizer=minimizer, budget=SolverBudget()
    )
    audit_rounds = range(0, cfg.horizon + 1, AUDIT_EVERY)
    gap = audit_clairvoyant(
        cost, feasible, minimizers, audit_rounds, audit_rng,
        samples=AUDIT_SAMPLES, tol=AUDIT_TOL,
    )
    report = RegretReport.from_run(traj, values, path_variation(minimizers, cfg.horizon))
    return TrialResult(
        trial=trial,
        report=report,
        checks=traj.checks,
        clairvoyant_kkt=kkt,
        clairvoyant_converged=converged,
        audit_gap=gap,
        terminal_x=traj.x[-1].copy(),
        traj=traj if keep_trajectory else None,
    )


def _trial_task(args):
    cfg_dict, trial, g_bound, keep = args
    return run_trial(ExperimentConfig.from_dict(cfg_dict), trial, g_bound, keep)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trial_results: list
    summary: RegretReport
    perron: benchmark.PerronDiagnostic | None
    manifest: dict

    @property
    def reports(self):
        return [t.report for t in self.trial_results]


def run_experiment(cfg, out_dir=None):
    """Run all trials of a config, aggregate, and optionally emit files."""
    g_bound = estimate_bound(cfg)
    tasks = [(cfg.to_dict(), trial, g_bound, trial == 0) for trial in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_trial_task, tasks))
    else:
        results = [_trial_task(t) for t in tasks]
    results.sort(key=lambda r: r.trial)
    summary = aggregate([r.report for r in results])

    schedule = build_schedule(cfg)
    first = results[0]
    perron = (
        estimate_perron(schedule, first.traj.phi, cfg.horizon)
        if cfg.horizon >= 1
        else None
    )
    connected_horizon = max(
        schedule.b_window, 2 * len(schedule.graphs) + schedule.b_window
    )
    manifest = _build_manifest(
        cfg, g_bound, results, perron,
        jointly_connected=check_joint_connectivity(schedule, connected_horizon),
    )
    result = ExperimentResult(
        config=cfg,
        trial_results=results,
        summary=summary,
        perron=perron,
        manifest=manifest,
    )
    if out_dir is not None:
        write_results(result, out_dir)
    if not all(r.clairvoyant_converged for r in results):
        raise SolverNonConvergence(
            "the iterative benchmark solver missed its residual target; "
            "see the manifest for the worst round"
        )
    return result


def _build_manifest(cfg, g_bound, results, perron, jointly_connected):
    feasible = build_feasible_set(cfg, problem_dimension(cfg))
    run_cfg = resolve_run_config(cfg, feasible, problem_dimension(cfg))
    schedule = build_schedule(cfg)
    lo, hi = schedule.phi_bounds()
    checks = [r.checks for r in results]
    phi_min = min(c.phi_min for c in checks)
    phi_max = max(c.phi_max for c in checks)
    derived = {
        "algorithm": cfg.algorithm,
        "step_scale": run_cfg.step_scale,
        "mu": run_cfg.smoothing.mu if run_cfg.smoothing else None,
        "xi": run_cfg.smoothing.xi if run_cfg.smoothing else None,
        "estimated_G": g_bound,
        "r_inner": feasible.r_inner,
        "R_outer": feasible.R_outer,
        "gamma_floor": schedule.gamma_floor,
        "phi_lower_bound": lo,
        "phi_upper_bound": hi,
    }
    invariants = {
        "joint_connectivity": bool(jointly_connected),
        "col_sum_err_max": max(c.col_sum_err for c in checks),
        "row_sum_err_max": max(c.row_sum_err for c in checks),
        "phi_drift_max": max(c.phi_drift for c in checks),
        "phi_min": phi_min,
        "phi_max": phi_max,
        "phi_bounds_ok": bool(lo - 1e-12 <= phi_min and phi_max <= hi + 1e-12),
        "oracle_bound_ratio_max": max(c.oracle_bound_ratio for c in checks),
        "clairvoyant_kkt_max": max(r.clairvoyant_kkt for r in results),
        "clairvoyant_converged": bool(all(r.clairvoyant_converged for r in results)),
        "audit_gap_max": max(r.audit_gap for r in results),
        "perron_slope": None if perron is None else perron.slope,
        "perron_exact": None if perron is None else perron.exact,
    }
    blob = cfg.canonical_json().encode()
    return {
        "version": __version__,
        "config": cfg.to_dict(),
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "derived": derived,
        "invariants": invariants,
    }


# -- result files ------------------------------------------------------------


def _fmt(x):
    return format(float(x), ".17g")


def write_regret_csv(result, path):
    T = result.config.horizon
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["T", "node", "trial", "regret", "avg_regret"])
        for tr in result.trial_results:
            final = tr.report.node_regret[:, -1]
            for node, value in enumerate(final, start=1):
                writer.writerow(
                    [T, node, tr.trial, _fmt(value), _fmt(value / (T + 1))]
                )


def write_diag_csv(result, path):
    first = result.trial_results[0]
    traj = first.traj
    from .benchmark import disagreement_curve

    disagreement = disagreement_curve(traj)
    residuals = (
        result.perron.residuals
        if result.perron is not None
        else np.full(traj.x.shape[0], np.nan)
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "disagreement", "phi_min", "phi_max", "perron_residual"])
        for t in range(traj.x.shape[0]):
            writer.writerow(
                [
                    t,
                    _fmt(disagreement[t]),
                    _fmt(traj.phi[t].min()),
                    _fmt(traj.phi[t].max()),
                    _fmt(residuals[t]),
                ]
            )


def write_trajectory_csv(result, path):
    traj = result.trial_results[0].traj
    m = traj.x.shape[2]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["round", "node"] + [f"coord_{k}" for k in range(m)] + ["phi"]
        )
        for t in range(traj.x.shape[0]):
            for node in range(traj.x.shape[1]):
                writer.writerow(
                    [t, node + 1]
                    + [_fmt(v) for v in traj.x[t, node]]
                    + [_fmt(traj.phi[t, node])]
                )


def write_manifest(result, path):
    Path(path).write_text(json.dumps(result.manifest, sort_keys=True, indent=2) + "\n")


def write_results(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_regret_csv(result, out / "regret.csv")
    write_diag_csv(result, out / "diag.csv")
    if result.config.emit_trajectory:
        write_trajectory_csv(result, out / "trajectory.csv")
    files = ["regret.csv", "diag.csv"] + (
        ["trajectory.csv"] if result.config.emit_trajectory else []
    ) + ["manifest.json"]
    result.manifest["files"] = files
    write_manifest(result, out / "manifest.json")
    return out


# -- horizon sweeps -----------------------------------------------------------


def sweep(cfg, horizons, out_dir=None):
    """Rerun the experiment at each horizon with the horizon-tuned
    exploration radius and shrinkage recomputed (mu = r/sqrt(T+1),
    xi = 1/sqrt(T+1)); returns [(T, max_avg, min_avg)] of trial-averaged
    extreme per-round regrets at the final round."""
    if not horizons:
        raise ConfigError("sweep needs at least one horizon")
    rows = []
    for T in horizons:
        cfg_T = cfg.override(horizon=int(T))
        cfg_T.mu = None
        cfg_T.xi = None
        res = run_experiment(cfg_T)
        max_avg = res.summary.max_regret[-1] / (T + 1)
        min_avg = res.summary.min_regret[-1] / (T + 1)
        rows.append((int(T), float(max_avg), float(min_avg)))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["T", "max_avg_regret", "min_avg_regret"])
            for T, hi, lo in rows:
                writer.writerow([T, _fmt(hi), _fmt(lo)])
    return rows


# -- validation ---------------------------------------------------------------


def validate(cfg, max_horizon=200):
    """Short-horizon battery asserting every module invariant; returns
    [(invariant, passed, detail)]."""
    checks = []
    cfg = cfg.override(horizon=min(cfg.horizon, max_horizon), trials=1, workers=1)

    try:
        schedule = build_schedule(cfg)
        horizon = max(schedule.b_window, 2 * len(schedule.graphs) + schedule.b_window)
        ok = check_joint_connectivity(schedule, horizon)
        checks.append(("joint-connectivity", ok, f"window={schedule.b_window}"))
    except InvariantViolation as exc:
        checks.append((exc.name, False, str(exc)))
        return checks

    dimension = problem_dimension(cfg)
    feasible = build_feasible_set(cfg, dimension)
    run_cfg = resolve_run_config(cfg, feasible, dimension)

    if cfg.algorithm == "zo":
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
        pts = feasible.project(feasible.sample(rng, 500), run_cfg.smoothing.xi)
        dirs = rng.standard_normal((500, dimension))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        inside = feasible.contains(pts + run_cfg.smoothing.mu * dirs, 0.0, 1e-9)
        checks.append(
            ("feasibility-chain", bool(np.all(inside)),
             f"mu={run_cfg.smoothing.mu:.3g} xi={run_cfg.smoothing.xi:.3g}")
        )

    try:
        result = run_trial(cfg, 0, g_bound=estimate_bound(cfg), keep_trajectory=True)
    except InvariantViolation as exc:
        checks.append((exc.name, False, str(exc)))
        return checks

    cs = result.checks
    lo, hi = schedule.phi_bounds()
    checks.append(
        ("column-stochasticity", cs.col_sum_err <= 1e-12, f"max err {cs.col_sum_err:.2e}")
    )
    checks.append(
        ("row-stochasticity", cs.row_sum_err <= 1e-12, f"max err {cs.row_sum_err:.2e}")
    )
    checks.append(
        ("phi-conservation", cs.phi_drift <= 1e-10, f"max drift {cs.phi_drift:.2e}")
    )
    checks.append(
        (
            "phi-bounds",
            lo - 1e-12 <= cs.phi_min and cs.phi_max <= hi + 1e-12,
            f"observed [{cs.phi_min:.3g}, {cs.phi_max:.3g}] in [{lo:.3g}, {hi:.3g}]",
        )
    )
    if cfg.algorithm == "zo":
        checks.append(
            (
                "oracle-bound",
                cs.oracle_bound_ratio <= 1.0 + 1e-9,
                f"max ||ghat||/(mG) = {cs.oracle_bound_ratio:.3f}",
            )
        )
    if cfg.horizon >= 1:
        diag = estimate_perron(build_schedule(cfg), result.traj.phi, cfg.horizon)
        ok = diag.exact or (diag.slope is not None and diag.slope < 0.0)
        detail = "exact" if diag.exact else f"slope {diag.slope:.3g}"
        checks.append(("perron-decay", ok, detail))
    checks.append(
        ("clairvoyant-audit", result.audit_gap <= AUDIT_TOL, f"gap {result.audit_gap:.2e}")
    )
    checks.append(
        (
            "clairvoyant-convergence",
            result.clairvoyant_converged,
            f"kkt {result.clairvoyant_kkt:.2e}",
        )
    )
    return checks
