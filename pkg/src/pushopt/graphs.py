"""Time-varying digraphs, schedules, and stochastic mixing matrices.

Node labels are 1-based in edge lists (the convention of config files);
matrices are 0-indexed numpy arrays where entry ``a[i, j]`` weights the
information flowing from node ``j+1`` to node ``i+1``. Every node always
hears itself: self-loops are implicit and never listed as edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import InvariantViolation

COLUMN_SUM_TOL = 1e-12
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Digraph:
    """A directed graph on nodes 1..n given by explicit edges (no self-loops)."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("node count must be positive")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u},{v}) out of range 1..{self.n}")
            if u == v:
                raise ValueError(f"explicit self-loop ({u},{v}) not allowed")
        object.__setattr__(self, "edges", edges)

    def out_degree(self, u):
        """Number of explicit out-edges of node u (self-loop not counted)."""
        return sum(1 for a, _ in self.edges if a == u)

    def adjacency(self):
        """0/1 matrix with adj[i, j] = 1 iff edge (j+1 -> i+1) exists."""
        adj = np.zeros((self.n, self.n))
        for u, v in self.edges:
            adj[v - 1, u - 1] = 1.0
        return adj


def ring_digraph(n):
    """Directed cycle 1 -> 2 -> ... -> n -> 1."""
    return Digraph(n, frozenset((i, i % n + 1) for i in range(1, n + 1)))


def complete_digraph(n):
    """All ordered pairs of distinct nodes."""
    return Digraph(
        n, frozenset((u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v)
    )


def random_strongly_connected(n, rng, extra_edges=0):
    """A directed ring over a random node permutation plus random extra
    edges (capped at the number of ordered pairs still available)."""
    perm = [int(p) + 1 for p in rng.permutation(n)]
    edges = {(perm[i], perm[(i + 1) % n]) for i in range(n)}
    remaining = [
        (u, v)
        for u in range(1, n + 1)
        for v in range(1, n + 1)
        if u != v and (u, v) not in edges
    ]
    take = min(extra_edges, len(remaining))
    if take > 0:
        for k in rng.choice(len(remaining), size=take, replace=False):
            edges.add(remaining[int(k)])
    return Digraph(n, frozenset(edges))


@dataclass(frozen=True)
class WeightMatrix:
    """Column-stochastic weights induced by a digraph (or supplied directly)."""

    a: np.ndarray
    gamma_floor: float

    @classmethod
    def from_matrix(cls, a, graph=None):
        """Validate a user-supplied matrix: nonnegative, column-stochastic,
        supported on the graph's edges plus the diagonal."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvariantViolation("column-stochasticity", "matrix must be square")
        if np.any(a < 0.0):
            raise InvariantViolation("column-stochasticity", "negative weight")
        col_err = np.max(np.abs(a.sum(axis=0) - 1.0))
        if col_err > COLUMN_SUM_TOL:
            raise InvariantViolation(
                "column-stochasticity", f"column sums deviate by {col_err:.3e}"
            )
        if graph is not None:
            allowed = graph.adjacency() + np.eye(graph.n)
            if np.any((a > 0.0) & (allowed == 0.0)):
                raise InvariantViolation(
                    "weight-support", "positive weight off the edge set"
                )
        nz = a[a > 0.0]
        arr = a.copy()
        arr.setflags(write=False)
        return cls(a=arr, gamma_floor=float(nz.min()))


def build_column_stochastic(g):
    """Equal-split weights: each node divides its mass uniformly over its
    out-neighbors and itself, so every column sums to one."""
    a = np.zeros((g.n, g.n))
    share = np.array([1.0 / (g.out_degree(u) + 1) for u in range(1, g.n + 1)])
    for u, v in g.edges:
        a[v - 1, u - 1] = share[u - 1]
    for u in range(g.n):
        a[u, u] = 1.0 - (a[:, u].sum() - a[u, u])
    col_err = np.max(np.abs(a.sum(axis=0) - 1.0))
    if col_err > COLUMN_SUM_TOL:
        raise InvariantViolation(
            "column-stochasticity", f"builder produced column error {col_err:.3e}"
        )
    a.setflags(write=False)
    return WeightMatrix(a=a, gamma_floor=float(a[a > 0.0].min()))


def build_row_stochastic(a, phi, phi_next):
    """Rescale column-stochastic weights by the mass scalars into a
    row-stochastic mixing matrix: b[i, j] = a[i, j] * phi[j] / phi_next[i].

    The caller supplies phi_next = a @ phi (the mass update), which makes the
    row sums exactly one up to roundoff.
    """
    a = np.asarray(a, dtype=float)
    phi = np.asarray(phi, dtype=float)
    phi_next = np.asarray(phi_next, dtype=float)
    if np.any(phi_next <= 0.0):
        raise InvariantViolation(
            "phi-positivity", f"min updated mass {phi_next.min():.3e} <= 0"
        )
    b = a * phi[None, :] / phi_next[:, None]
    row_err = np.max(np.abs(b.sum(axis=1) - 1.0))
    if row_err > ROW_SUM_TOL:
        raise InvariantViolation(
            "row-stochasticity", f"row sums deviate by {row_err:.3e}"
        )
    return b


class GraphSchedule:
    """The per-round sequence of digraphs and their weight matrices.

    policy "cyclic" repeats the graph list forever; policy "list" plays it
    once and raises IndexError past the end. Explicit weight matrices may be
    supplied per graph; otherwise the equal-split builder is used.
    """

    def __init__(self, graphs, policy="cyclic", b_window=1, weights=None):
        if not graphs:
            raise ValueError("schedule needs at least one graph")
        if policy not in ("cyclic", "list"):
            raise ValueError(f"unknown schedule policy {policy!r}")
        ns = {g.n for g in graphs}
        if len(ns) != 1:
            raise ValueError("all graphs in a schedule must share the node count")
        if b_window < 1:
            raise ValueError("b_window must be a positive integer")
        self.graphs = list(graphs)
        self.policy = policy
        self.b_window = int(b_window)
        self.n = graphs[0].n
        if weights is None:
            self._weights = [build_column_stochastic(g) for g in self.graphs]
        else:
            if len(weights) != len(self.graphs):
                raise ValueError("one weight matrix per graph required")
            self._weights = [
                w if isinstance(w, WeightMatrix) else WeightMatrix.from_matrix(w, g)
                for g, w in zip(self.graphs, weights)
            ]
        self.gamma_floor = min(w.gamma_floor for w in self._weights)

    def _index(self, t):
        if t < 0:
            raise ValueError("round index must be nonnegative")
        if self.policy == "cyclic":
            return t % len(self.graphs)
        if t >= len(self.graphs):
            raise IndexError(
                f"round {t} beyond the {len(self.graphs)}-entry schedule (no cycling)"
            )
        return t

    def graph_at(self, t):
        return self.graphs[self._index(t)]

    def weights_at(self, t):
        return self._weights[self._index(t)]

    def phi_bounds(self):
        """Mass-scalar bounds (lower, upper) implied by the weight floor:
        gamma^(2(n-1)B) <= phi <= n - gamma^(2(n-1)B). A single node keeps
        unit mass exactly (the formulas degenerate at n = 1)."""
        if self.n == 1:
            return 1.0, 1.0
        edge = self.gamma_floor ** (2 * (self.n - 1) * self.b_window)
        return edge, self.n - edge


def is_strongly_connected(adjacency):
    """Strong-connectivity test on a 0/1 adjacency matrix."""
    n = adjacency.shape[0]
    if n == 1:
        return True
    ncomp, _ = connected_components(
        csr_matrix(adjacency), directed=True, connection="strong"
    )
    return ncomp == 1


def check_joint_connectivity(schedule, horizon):
    """True iff the union of every b_window consecutive graphs within the
    horizon is strongly connected."""
    if horizon < schedule.b_window:
        raise ValueError("horizon must cover at least one b_window")
    for start in range(0, horizon - schedule.b_window + 1):
        union = np.zeros((schedule.n, schedule.n))
        for l in range(schedule.b_window):
            union += schedule.graph_at(start + l).adjacency()
        if not is_strongly_connected(union):
            return False
    return True
