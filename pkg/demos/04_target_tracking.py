"""Sensor network tracking moving targets from scalar measurements.

Each of six sensors sees one random linear functional of the stacked
position/velocity state of three sinusoidal targets; the value-only
algorithm fits the network cost whose unique zero-cost minimizer is the
true state. Tracking quality hinges on how fast the targets move relative
to the diminishing step size: slow targets are pinned down, fast ones are
chased with a lag. Both regimes are shown.
"""

import numpy as np

from pushopt import load, run_experiment
from pushopt.engine import trial_rngs
from pushopt.experiments import build_cost


def report(cfg, label):
    res = run_experiment(cfg)
    traj = res.trial_results[0].traj
    suite = build_cost(cfg, trial_rngs(cfg.seed, 0)[0])
    T = cfg.horizon
    print(f"--- {label} (angular frequencies {cfg.problem_params['omega']} rad/s)")
    print(f"{'round':>6} {'worst position err':>20} {'mean revealed cost':>20}")
    for t in (T // 8, T // 2, T):
        pos_err = np.abs(traj.x[t][:, 0::2] - suite.target_state(t)[0::2]).max()
        print(f"{t:6d} {pos_err:20.3f} {traj.node_costs[t].mean():20.4f}")
    print(f"minimizer path variation over the run: {res.summary.path_var:7.2f}")
    print(f"max time-average regret at T={T}: "
          f"{res.summary.max_regret[-1] / (T + 1):.4f}\n")


slow = load("tracking").override(horizon=4000, trials=1)
slow.problem_params = dict(slow.problem_params, omega=[0.05, 0.08, 0.12])
report(slow, "slowly drifting targets")

fast = load("tracking").override(horizon=2000, trials=1)
report(fast, "fast targets (preset)")

print("with slow targets the decisions settle near the true state; fast "
      "targets outrun the\ndiminishing step size, so the network tracks "
      "them with a lag that shows up as a\nlarger (but still per-round "
      "bounded) regret level")
