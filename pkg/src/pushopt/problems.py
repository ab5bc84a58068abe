"""Benchmark cost suites: drifting quartic, moving-target tracking, and
dynamic sparse signal recovery.

Each suite owns the random data of a single trial; independent trials get
independent generators. Round data, once drawn, is frozen, so repeated
value queries within a round are consistent.
"""

from __future__ import annotations

import numpy as np

from .costs import OnlineCost


class QuarticCosts(OnlineCost):
    """Six heterogeneous costs over the plane whose sum is a drifting quartic.

    Node i (1-based) pays
        (i/84) x1^4 + ((i-1)/15)(x1^2 + x2^2) + ((2i+1)/4) x1
        - (2(i-3)/3) h(t) x2,
    with drift h(t) = arctan(t/10). The network-wide cost collapses to
    x1^4/4 + x1^2 + x2^2 + 12 x1 - 2 h(t) x2, whose constrained minimizer
    is (-2, arctan(t/10)).
    """

    n = 6
    m = 2

    def __init__(self, lipschitz_G=None):
        idx = np.arange(1, 7, dtype=float)
        self.coef4 = idx / 84.0
        self.coef2 = (idx - 1.0) / 15.0
        self.coef1 = (2.0 * idx + 1.0) / 4.0
        self.drift_coef = 2.0 * (idx - 3.0) / 3.0
        self.lipschitz_G = lipschitz_G

    @staticmethod
    def drift(t):
        return np.arctan(t / 10.0)

    def value(self, i, t, x):
        x1, x2 = float(x[0]), float(x[1])
        h = self.drift(t)
        return (
            self.coef4[i] * x1**4
            + self.coef2[i] * (x1**2 + x2**2)
            + self.coef1[i] * x1
            - self.drift_coef[i] * h * x2
        )

    def subgradient(self, i, t, x):
        x1, x2 = float(x[0]), float(x[1])
        h = self.drift(t)
        return np.array(
            [
                4.0 * self.coef4[i] * x1**3 + 2.0 * self.coef2[i] * x1 + self.coef1[i],
                2.0 * self.coef2[i] * x2 - self.drift_coef[i] * h,
            ]
        )

    def value_batch(self, t, points):
        x1, x2 = points[:, 0], points[:, 1]
        h = self.drift(t)
        return (
            self.coef4 * x1**4
            + self.coef2 * (x1**2 + x2**2)
            + self.coef1 * x1
            - self.drift_coef * h * x2
        )

    def subgradient_batch(self, t, points):
        x1, x2 = points[:, 0], points[:, 1]
        h = self.drift(t)
        g1 = 4.0 * self.coef4 * x1**3 + 2.0 * self.coef2 * x1 + self.coef1
        g2 = 2.0 * self.coef2 * x2 - self.drift_coef * h
        return np.stack([g1, g2], axis=1)

    def global_value(self, t, x):
        x1, x2 = float(x[0]), float(x[1])
        h = self.drift(t)
        return 0.25 * x1**4 + x1**2 + x2**2 + 12.0 * x1 - 2.0 * h * x2

    def global_value_many(self, t, points):
        x1, x2 = points[:, 0], points[:, 1]
        h = self.drift(t)
        return 0.25 * x1**4 + x1**2 + x2**2 + 12.0 * x1 - 2.0 * h * x2

    def global_smooth_gradient(self, t, x):
        x1, x2 = float(x[0]), float(x[1])
        return np.array([x1**3 + 2.0 * x1 + 12.0, 2.0 * x2 - 2.0 * self.drift(t)])

    def analytic_minimizer(self, t):
        return np.array([-2.0, self.drift(t)])


def quartic_suite(lipschitz_G=None):
    """The six-node drifting-quartic suite (deterministic data)."""
    return QuarticCosts(lipschitz_G=lipschitz_G)


class TrackingCosts(OnlineCost):
    """Six sensors tracking three sinusoidal targets through scalar
    measurements of the stacked position/velocity state.

    Target i follows (amp_i sin(w_i tau + phase_i), w_i amp_i cos(...)), the
    second component being the exact time derivative of the first; round t
    samples continuous time at tau = t / sample_rate. Sensor i observes
    y_i = C_i @ state and pays 0.5 (C_i @ x - y_i)^2.
    """

    n = 6

    def __init__(
        self,
        rng,
        omega=(1.0, 1.5, 2.0),
        sample_rate=100.0,
        measurement=None,
        lipschitz_G=None,
    ):
        self.omega = np.asarray(omega, dtype=float)
        self.targets = self.omega.size
        self.m = 2 * self.targets
        self.sample_rate = float(sample_rate)
        self.amp = rng.uniform(0.0, 3.0, size=self.targets)
        self.phase = rng.uniform(0.0, np.pi, size=self.targets)
        if measurement is None:
            self.C = rng.uniform(0.0, 1.0, size=(self.n, self.m))
        else:
            self.C = np.asarray(measurement, dtype=float)
            if self.C.shape != (self.n, self.m):
                raise ValueError(f"measurement must have shape ({self.n},{self.m})")
        self.lipschitz_G = lipschitz_G

    def target_state(self, t):
        """Stacked (position, velocity) pairs of all targets at round t."""
        tau = t / self.sample_rate
        angle = self.omega * tau + self.phase
        pos = self.amp * np.sin(angle)
        vel = self.omega * self.amp * np.cos(angle)
        state = np.empty(self.m)
        state[0::2] = pos
        state[1::2] = vel
        return state

    def observations(self, t):
        return self.C @ self.target_state(t)

    def value(self, i, t, x):
        r = float(self.C[i] @ np.asarray(x, dtype=float)) - float(self.observations(t)[i])
        return 0.5 * r * r

    def subgradient(self, i, t, x):
        r = float(self.C[i] @ np.asarray(x, dtype=float)) - float(self.observations(t)[i])
        return r * self.C[i]

    def value_batch(self, t, points):
        r = np.einsum("ij,ij->i", self.C, points) - self.observations(t)
        return 0.5 * r * r

    def subgradient_batch(self, t, points):
        r = np.einsum("ij,ij->i", self.C, points) - self.observations(t)
        return r[:, None] * self.C

    def global_value(self, t, x):
        r = self.C @ np.asarray(x, dtype=float) - self.observations(t)
        return 0.5 * float(r @ r)

    def global_value_many(self, t, points):
        r = points @ self.C.T - self.observations(t)[None, :]
        return 0.5 * np.sum(r * r, axis=1)

    def global_smooth_gradient(self, t, x):
        r = self.C @ np.asarray(x, dtype=float) - self.observations(t)
        return self.C.T @ r

    def analytic_minimizer(self, t):
        """The true stacked state; it zeroes every residual, so it minimizes
        the global cost whenever it is feasible."""
        return self.target_state(t)


def tracking_suite(rng, omega=(1.0, 1.5, 2.0), sample_rate=100.0, measurement=None,
                   lipschitz_G=None):
    """The six-sensor moving-target suite with randomized amplitudes, phases
    and measurement rows."""
    return TrackingCosts(
        rng,
        omega=omega,
        sample_rate=sample_rate,
        measurement=measurement,
        lipschitz_G=lipschitz_G,
    )


class SparseRecoveryCosts(OnlineCost):
    """A sensor network recovering a slowly drifting sparse unit signal.

    The hidden signal starts with two entries of value one (unnormalized)
    and keeps a two-index support. From round 1 on, the support swaps one
    index with probability min(1, 1/t) (the leaving entry's value moves to
    the entering index), the on-support entries are perturbed by
    N(0, 1/t^2) noise, and the signal is renormalized to unit length.
    Each sensor observes the signal through a fresh Gaussian matrix and pays
    a per-node share of the ridge- and l1-regularized residual cost.
    """

    def __init__(
        self,
        rng,
        sensors=40,
        measurement_dim=3,
        signal_dim=8,
        support_size=2,
        noise_std=0.0,
        gamma_reg=None,
        sigma_reg=None,
        lipschitz_G=None,
    ):
        self.rng = rng
        self.n = int(sensors)
        self.d = int(measurement_dim)
        self.m = int(signal_dim)
        self.support_size = int(support_size)
        self.noise_std = float(noise_std)
        if gamma_reg is None:
            gamma_reg = 1.0 / (100.0 * self.d**2 * self.n)
        if sigma_reg is None:
            sigma_reg = 1.0 / (20.0 * self.d)
        self.gamma_reg = float(gamma_reg)
        self.sigma_reg = float(sigma_reg)
        self.l1_weight = self.sigma_reg
        self.lipschitz_G = lipschitz_G
        self._signals = []
        self._supports = []
        self._obs_matrices = []
        self._measurements = []

    # -- lazily generated round data ------------------------------------

    def _draw_observation(self, signal):
        C = self.rng.standard_normal((self.n, self.d, self.m))
        z = np.einsum("ndm,m->nd", C, signal)
        if self.noise_std > 0.0:
            z = z + self.noise_std * self.rng.standard_normal((self.n, self.d))
        self._obs_matrices.append(C)
        self._measurements.append(z)

    def _advance_signal(self, t):
        """Produce signal t+1 from signal t (t >= 0)."""
        w = self._signals[t].copy()
        support = list(self._supports[t])
        if t >= 1:
            if self.rng.random() < min(1.0, 1.0 / t):
                leave = support[int(self.rng.integers(len(support)))]
                others = [k for k in range(self.m) if k not in support]
                enter = others[int(self.rng.integers(len(others)))]
                w[enter] = w[leave]
                w[leave] = 0.0
                support[support.index(leave)] = enter
            noise = (1.0 / t) * self.rng.standard_normal(len(support))
            w[support] += noise
        w /= np.linalg.norm(w)
        self._signals.append(w)
        self._supports.append(support)

    def _ensure(self, t):
        if not self._signals:
            w = np.zeros(self.m)
            support = sorted(
                int(k) for k in self.rng.choice(self.m, self.support_size, replace=False)
            )
            w[support] = 1.0
            self._signals.append(w)
            self._supports.append(list(support))
            self._draw_observation(w)
        while len(self._signals) <= t:
            self._advance_signal(len(self._signals) - 1)
            self._draw_observation(self._signals[-1])

    def signal(self, t):
        self._ensure(t)
        return self._signals[t]

    def support(self, t):
        self._ensure(t)
        return list(self._supports[t])

    def round_data(self, t):
        self._ensure(t)
        return self._obs_matrices[t], self._measurements[t]

    # -- cost interface ---------------------------------------------------

    def _regularizer(self, x):
        return self.gamma_reg * float(x @ x) + self.sigma_reg * float(
            np.sum(np.abs(x))
        )

    def value(self, i, t, x):
        C, z = self.round_data(t)
        x = np.asarray(x, dtype=float)
        r = C[i] @ x - z[i]
        return (float(r @ r) + self._regularizer(x)) / self.n

    def subgradient(self, i, t, x):
        C, z = self.round_data(t)
        x = np.asarray(x, dtype=float)
        r = C[i] @ x - z[i]
        return (
            2.0 * C[i].T @ r + 2.0 * self.gamma_reg * x + self.sigma_reg * np.sign(x)
        ) / self.n

    def value_batch(self, t, points):
        C, z = self.round_data(t)
        r = np.einsum("ndm,nm->nd", C, points) - z
        reg = self.gamma_reg * np.sum(points * points, axis=1) + self.sigma_reg * np.sum(
            np.abs(points), axis=1
        )
        return (np.sum(r * r, axis=1) + reg) / self.n

    def subgradient_batch(self, t, points):
        C, z = self.round_data(t)
        r = np.einsum("ndm,nm->nd", C, points) - z
        grad = 2.0 * np.einsum("ndm,nd->nm", C, r)
        return (
            grad + 2.0 * self.gamma_reg * points + self.sigma_reg * np.sign(points)
        ) / self.n

    def global_value(self, t, x):
        C, z = self.round_data(t)
        x = np.asarray(x, dtype=float)
        r = np.einsum("ndm,m->nd", C, x) - z
        return float(np.sum(r * r)) / self.n + self._regularizer(x)

    def global_value_many(self, t, points):
        C, z = self.round_data(t)
        r = np.einsum("ndm,km->knd", C, points) - z[None, :, :]
        reg = self.gamma_reg * np.sum(points * points, axis=1) + self.sigma_reg * np.sum(
            np.abs(points), axis=1
        )
        return np.sum(r * r, axis=(1, 2)) / self.n + reg

    def global_smooth_gradient(self, t, x):
        C, z = self.round_data(t)
        x = np.asarray(x, dtype=float)
        r = np.einsum("ndm,m->nd", C, x) - z
        return 2.0 * np.einsum("ndm,nd->m", C, r) / self.n + 2.0 * self.gamma_reg * x


def sparse_suite(rng, sensors=40, measurement_dim=3, signal_dim=8, noise_std=0.0,
                 gamma_reg=None, sigma_reg=None, lipschitz_G=None):
    """The dynamic sparse-recovery suite over a sensor network."""
    return SparseRecoveryCosts(
        rng,
        sensors=sensors,
        measurement_dim=measurement_dim,
        signal_dim=signal_dim,
        noise_std=noise_std,
        gamma_reg=gamma_reg,
        sigma_reg=sigma_reg,
        lipschitz_G=lipschitz_G,
    )
