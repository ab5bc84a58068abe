import numpy as np
import pytest

from pushopt.exceptions import InvariantViolation
from pushopt.graphs import (
    Digraph,
    GraphSchedule,
    WeightMatrix,
    build_column_stochastic,
    build_row_stochastic,
    check_joint_connectivity,
    complete_digraph,
    is_strongly_connected,
    random_strongly_connected,
    ring_digraph,
)


def two_node_chain():
    return Digraph(2, frozenset({(1, 2)}))


class TestDigraph:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Digraph(3, frozenset({(1, 4)}))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Digraph(3, frozenset({(2, 2)}))

    def test_adjacency_orientation(self):
        adj = two_node_chain().adjacency()
        # edge 1 -> 2 lands in row 2 (receiver), column 1 (sender)
        assert adj[1, 0] == 1.0 and adj[0, 1] == 0.0


class TestSchedule:
    def test_constant_schedule_any_round(self):
        g = ring_digraph(4)
        sched = GraphSchedule([g], policy="cyclic", b_window=1)
        for t in (0, 1, 7, 1000):
            assert sched.graph_at(t) is g

    def test_cyclic_order(self):
        g1, g2 = ring_digraph(3), complete_digraph(3)
        sched = GraphSchedule([g1, g2], policy="cyclic", b_window=1)
        assert sched.graph_at(0) is g1
        assert sched.graph_at(1) is g2
        assert sched.graph_at(2) is g1

    def test_list_policy_out_of_range(self):
        graphs = [ring_digraph(3)] * 5
        sched = GraphSchedule(graphs, policy="list", b_window=1)
        assert sched.graph_at(4) is graphs[4]
        with pytest.raises(IndexError):
            sched.graph_at(7)

    def test_phi_bounds_formula(self):
        sched = GraphSchedule([two_node_chain()], b_window=3)
        gamma = sched.gamma_floor
        lo, hi = sched.phi_bounds()
        assert lo == pytest.approx(gamma ** (2 * (2 - 1) * 3))
        assert hi == pytest.approx(2 - gamma ** (2 * (2 - 1) * 3))


class TestColumnStochastic:
    def test_singleton(self):
        w = build_column_stochastic(Digraph(1))
        assert w.a.tolist() == [[1.0]]

    def test_two_node_chain_hand_values(self):
        # node 1 splits between itself and node 2; node 2 keeps everything
        w = build_column_stochastic(two_node_chain())
        assert w.a[1, 0] == pytest.approx(0.5)
        assert w.a[0, 0] == pytest.approx(0.5)
        assert w.a[1, 1] == pytest.approx(1.0)
        assert w.a[0, 1] == 0.0
        assert np.allclose(w.a.sum(axis=0), 1.0, atol=1e-12)

    def test_complete_graph_uniform(self):
        w = build_column_stochastic(complete_digraph(3))
        assert np.allclose(w.a, 1.0 / 3.0, atol=1e-15)

    def test_gamma_floor_is_min_nonzero(self):
        w = build_column_stochastic(two_node_chain())
        assert w.gamma_floor == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_random_graphs_column_stochastic(self, n):
        rng = np.random.default_rng(n)
        for _ in range(20):
            g = random_strongly_connected(n, rng, extra_edges=n)
            w = build_column_stochastic(g)
            assert np.max(np.abs(w.a.sum(axis=0) - 1.0)) <= 1e-12
            nz = w.a[w.a > 0]
            assert np.all(nz >= w.gamma_floor)

    def test_from_matrix_rejects_nonstochastic(self):
        bad = np.array([[0.7, 0.0], [0.2, 1.0]])
        with pytest.raises(InvariantViolation) as err:
            WeightMatrix.from_matrix(bad)
        assert err.value.name == "column-stochasticity"

    def test_from_matrix_rejects_off_support(self):
        mat = np.array([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(InvariantViolation):
            WeightMatrix.from_matrix(mat, graph=two_node_chain())


class TestRowStochastic:
    def test_doubly_stochastic_with_unit_mass_is_identity_transform(self):
        a = build_column_stochastic(complete_digraph(4)).a
        phi = np.ones(4)
        b = build_row_stochastic(a, phi, a @ phi)
        assert np.allclose(b, a, atol=1e-15)

    def test_two_node_hand_values(self):
        a = build_column_stochastic(two_node_chain()).a
        phi = np.ones(2)
        phi_next = a @ phi
        assert phi_next.tolist() == [0.5, 1.5]
        b = build_row_stochastic(a, phi, phi_next)
        assert np.allclose(b[0], [1.0, 0.0])
        assert np.allclose(b[1], [1.0 / 3.0, 2.0 / 3.0])

    def test_row_sums_one_on_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            g = random_strongly_connected(n, rng, extra_edges=n)
            a = build_column_stochastic(g).a
            phi = rng.uniform(0.2, 3.0, size=n)
            b = build_row_stochastic(a, phi, a @ phi)
            assert np.max(np.abs(b.sum(axis=1) - 1.0)) <= 1e-12

    def test_rejects_nonpositive_mass(self):
        a = np.eye(2)
        with pytest.raises(InvariantViolation) as err:
            build_row_stochastic(a, np.ones(2), np.array([0.0, 2.0]))
        assert err.value.name == "phi-positivity"


class TestJointConnectivity:
    def test_single_strong_graph_window_one(self):
        sched = GraphSchedule([ring_digraph(5)], b_window=1)
        assert check_joint_connectivity(sched, 10)

    def test_disjoint_cycles_never_connected(self):
        c1 = Digraph(6, frozenset({(1, 2), (2, 3), (3, 1)}))
        c2 = Digraph(6, frozenset({(4, 5), (5, 6), (6, 4)}))
        for window in (1, 2, 4):
            sched = GraphSchedule([c1, c2], b_window=window)
            assert not check_joint_connectivity(sched, 12)

    def test_split_four_cycle_joins_in_two_rounds(self):
        g1 = Digraph(4, frozenset({(1, 2), (3, 4)}))
        g2 = Digraph(4, frozenset({(2, 3), (4, 1)}))
        sched2 = GraphSchedule([g1, g2], b_window=2)
        assert check_joint_connectivity(sched2, 10)
        sched1 = GraphSchedule([g1, g2], b_window=1)
        assert not check_joint_connectivity(sched1, 10)

    def test_strong_connectivity_primitive(self):
        assert is_strongly_connected(ring_digraph(6).adjacency())
        line = Digraph(3, frozenset({(1, 2), (2, 3)}))
        assert not is_strongly_connected(line.adjacency())


class TestMassConservation:
    def test_sum_preserved_along_any_schedule(self):
        rng = np.random.default_rng(3)
        graphs = [random_strongly_connected(6, rng, extra_edges=4) for _ in range(3)]
        sched = GraphSchedule(graphs, b_window=3)
        phi = np.ones(6)
        for t in range(200):
            phi = sched.weights_at(t).a @ phi
            assert abs(phi.sum() - 6.0) <= 1e-10

    def test_phi_stays_within_theoretical_bounds(self):
        rng = np.random.default_rng(11)
        graphs = [random_strongly_connected(5, rng, extra_edges=3) for _ in range(2)]
        sched = GraphSchedule(graphs, b_window=2)
        lo, hi = sched.phi_bounds()
        phi = np.ones(5)
        for t in range(500):
            phi = sched.weights_at(t).a @ phi
            assert lo - 1e-12 <= phi.min() and phi.max() <= hi + 1e-12
