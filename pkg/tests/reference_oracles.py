"""Independent reference implementations used as test oracles.

These deliberately avoid the engine module: plain numpy loops implementing
single-node projected descent (value-probe and subgradient variants) and a
power-method eigenvector routine. They reproduce the engine's random stream
by drawing one (1, m) standard-normal block per round and normalizing.
"""

import numpy as np

from pushopt.engine import trial_rngs


def project_box(x, lo, hi):
    return np.minimum(np.maximum(x, lo), hi)


def shrunk_box(lo, hi, shrink):
    center = 0.5 * (lo + hi)
    return center + (1 - shrink) * (lo - center), center + (1 - shrink) * (hi - center)


def single_node_zo_descent(value_fn, lo, hi, horizon, step_scale, mu, xi, seed, trial):
    """Projected descent from value probes only, on a box; returns all
    iterates (horizon+1, m)."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    m = lo.size
    _, rng, _ = trial_rngs(seed, trial)
    lo_s, hi_s = shrunk_box(lo, hi, xi)
    x = project_box(0.5 * (lo + hi), lo_s, hi_s)
    out = [x]
    for t in range(horizon):
        z = rng.standard_normal((1, m))
        z = z / np.linalg.norm(z, axis=1, keepdims=True)
        zeta = z[0]
        ghat = (m / mu) * (value_fn(t, x + mu * zeta) - value_fn(t, x)) * zeta
        step = step_scale / np.sqrt(t + 1.0)
        x = project_box(x - step * ghat, lo_s, hi_s)
        out.append(x)
    return np.stack(out)


def single_node_subgradient_descent(grad_fn, lo, hi, horizon, step_scale):
    """Plain projected subgradient descent on a box."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    x = 0.5 * (lo + hi)
    out = [x]
    for t in range(horizon):
        step = step_scale / np.sqrt(t + 1.0)
        x = project_box(x - step * grad_fn(t, x), lo, hi)
        out.append(x)
    return np.stack(out)


def power_method_left_eigenvector(mat, iters=20_000, tol=1e-14):
    """Dominant left eigenvector of a row-stochastic matrix, normalized to
    sum one."""
    v = np.ones(mat.shape[0]) / mat.shape[0]
    for _ in range(iters):
        nxt = v @ mat
        nxt = nxt / nxt.sum()
        if np.max(np.abs(nxt - v)) < tol:
            return nxt
        v = nxt
    return v
