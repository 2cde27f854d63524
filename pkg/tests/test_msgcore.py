import numpy as np
import pytest

from conftest import af_triangle, chain2, random_model
from refsolvers import enumerate_map, tree_map_energy

from mplpx import (
    Cluster,
    GeneratorSpec,
    MessageState,
    MissingEdgeError,
    PairwiseModel,
    generate,
)
from mplpx.msgcore import UnregisteredClusterError


def converge(state, cap=2000, eps=1e-12):
    prev = None
    for _ in range(cap):
        state.run_pass()
        dual = state.dual_objective()
        if prev is not None and prev - dual < eps:
            return dual
        prev = dual
    return state.dual_objective()


class TestInit:
    def test_all_messages_start_zero(self, backend):
        m = chain2()
        st = MessageState(m, backend=backend)
        assert np.all(st.edge_to_node(0, 0) == 0)
        assert np.all(st.edge_to_node(0, 1) == 0)
        assert np.all(st.edge_to_edge_view(0) == 0)
        assert st.pass_count == 0

    def test_cluster_tables_start_zero(self, backend):
        from mplpx import init_messages

        m = af_triangle()
        c = Cluster.from_vars(m, 0, 1, 2)
        st = init_messages(m, clusters=[c], backend=backend)
        for e in c.edge_ids:
            assert np.all(st.cluster_to_edge(c, e) == 0)

    def test_repeated_cluster_variable_rejected(self):
        with pytest.raises(ValueError):
            Cluster.from_vars(af_triangle(), 0, 0, 1)

    def test_cluster_with_missing_edge_rejected(self):
        m = PairwiseModel(
            [2] * 3, [np.zeros(2)] * 3, [(0, 1), (1, 2)], [np.zeros((2, 2))] * 2
        )
        with pytest.raises(MissingEdgeError):
            Cluster.from_vars(m, 0, 1, 2)
        bogus = Cluster(vars=(0, 1, 2), edge_ids=(0, 1, 7))
        with pytest.raises(MissingEdgeError):
            MessageState(m, clusters=[bogus])


class TestEdgeUpdate:
    def test_hand_derived_isolated_edge(self, backend):
        # one edge, zero messages: lambda_{01->0}(x) =
        # -(2/3) theta_0(x) + (1/3) max_y [theta_01(x,y) + theta_1(y)]
        st = MessageState(chain2(), backend=backend)
        st.update_edge(0)
        np.testing.assert_allclose(
            st.edge_to_node(0, 0), [2.0 / 3.0, 1.0], atol=1e-15
        )
        np.testing.assert_allclose(
            st.edge_to_node(0, 1), [1.0 / 3.0, 0.0], atol=1e-15
        )
        np.testing.assert_allclose(
            st.edge_to_edge_view(0),
            np.array([[0.0, 2.0], [1.0, 6.0]]) / 3.0,
            atol=1e-15,
        )

    def test_zero_potentials_stay_zero(self, backend):
        m = PairwiseModel([2, 3], [np.zeros(2), np.zeros(3)], [(0, 1)],
                          [np.zeros((2, 3))])
        st = MessageState(m, backend=backend)
        for _ in range(5):
            st.run_pass()
        assert np.all(st._e2n == 0)
        assert np.all(st._e2e == 0)
        assert st.dual_objective() == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_edge_update_is_idempotent(self, seed, backend):
        m = random_model(seed)
        st = MessageState(m, backend=backend)
        st.run_pass()
        for e in range(min(m.num_edges, 4)):
            st.update_edge(e)
            d1 = st.dual_objective()
            st.update_edge(e)
            assert abs(st.dual_objective() - d1) <= 1e-9

    def test_bad_edge_index(self, backend):
        st = MessageState(chain2(), backend=backend)
        with pytest.raises(IndexError):
            st.update_edge(5)


class TestClusterUpdate:
    def test_hand_derived_af_triangle_block(self, backend):
        # preload the edge-to-edge tables so each belief (minus the cluster's
        # own zero message) is the antiferromagnetic table
        m = PairwiseModel([2] * 3, [np.zeros(2)] * 3,
                          [(0, 1), (0, 2), (1, 2)], [np.zeros((2, 2))] * 3)
        c = Cluster.from_vars(m, 0, 1, 2)
        st = MessageState(m, clusters=[c], backend=backend)
        af = np.array([[0.0, 1.0], [1.0, 0.0]])
        for e in range(3):
            st.edge_to_edge_view(e)[:] = af
        st.update_cluster(c)
        expect = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0
        for e in c.edge_ids:
            np.testing.assert_allclose(st.cluster_to_edge(c, e), expect, atol=1e-15)

    def test_zero_state_stays_zero(self, backend):
        m = af_triangle()
        z = PairwiseModel(m.cardinalities, [np.zeros(2)] * 3, m.edges,
                          [np.zeros((2, 2))] * 3)
        c = Cluster.from_vars(z, 0, 1, 2)
        st = MessageState(z, clusters=[c], backend=backend)
        for _ in range(3):
            st.run_pass()
        assert np.all(st._c2e == 0)
        assert st.dual_objective() == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_cluster_update_is_idempotent(self, seed, backend):
        m = generate(GeneratorSpec(kind="random_complete", n=6, states=(2, 3),
                                   seed=seed))
        c = Cluster.from_vars(m, 0, 1, 2)
        st = MessageState(m, clusters=[c], backend=backend)
        st.run_pass()
        st.update_cluster(c)
        d1 = st.dual_objective()
        st.update_cluster(c)
        assert abs(st.dual_objective() - d1) <= 1e-9

    def test_unregistered_cluster_rejected(self, backend):
        m = af_triangle()
        st = MessageState(m, backend=backend)
        with pytest.raises(UnregisteredClusterError):
            st.update_cluster(Cluster.from_vars(m, 0, 1, 2))
        with pytest.raises(UnregisteredClusterError):
            st.update_cluster(0)


class TestDualObjective:
    def test_zero_messages_node_terms_only(self, backend):
        st = MessageState(chain2(), backend=backend)
        assert st.dual_objective() == 3.0  # max theta_0 + max theta_1

    def test_all_zero_model(self, backend):
        m = PairwiseModel([2, 2], [np.zeros(2)] * 2, [(0, 1)], [np.zeros((2, 2))])
        assert MessageState(m, backend=backend).dual_objective() == 0.0

    def test_af_triangle_edge_plateau(self, backend):
        st = MessageState(af_triangle(), backend=backend)
        dual = converge(st)
        assert dual == pytest.approx(3.0, abs=1e-6)

    def test_beliefs_sum_to_dual(self, backend):
        m = random_model(3)
        st = MessageState(m, backend=backend)
        for _ in range(4):
            st.run_pass()
        total = sum(st.node_belief(i).max() for i in range(m.num_vars))
        total += sum(st.edge_belief(e).max() for e in range(m.num_edges))
        assert total == pytest.approx(st.dual_objective(), abs=1e-10)


class TestInvariants:
    @pytest.mark.parametrize("seed", range(8))
    def test_upper_bound_after_first_pass(self, seed, backend):
        m = random_model(seed, n_lo=3, n_hi=7)
        _, opt = enumerate_map(m)
        st = MessageState(m, backend=backend)
        st.run_pass()
        assert st.dual_objective() >= opt - 1e-9

    @pytest.mark.parametrize("seed", range(8))
    def test_monotone_per_pass(self, seed, backend):
        m = random_model(seed)
        st = MessageState(m, backend=backend)
        st.run_pass()
        prev = st.dual_objective()
        for _ in range(20):
            st.run_pass()
            dual = st.dual_objective()
            assert dual <= prev + 1e-9
            prev = dual

    @pytest.mark.parametrize("seed", range(4))
    def test_monotone_per_block(self, seed, backend):
        m = random_model(seed)
        st = MessageState(m, backend=backend)
        st.run_pass()
        prev = st.dual_objective()
        rng = np.random.default_rng(seed)
        for _ in range(60):
            e = int(rng.integers(0, m.num_edges))
            st.update_edge(e)
            dual = st.dual_objective()
            assert dual <= prev + 1e-9
            prev = dual

    @pytest.mark.parametrize("seed", range(6))
    def test_tree_exactness(self, seed, backend):
        m = generate(GeneratorSpec(kind="tree", n=20, states=(2, 5), seed=seed))
        ref = tree_map_energy(m)
        st = MessageState(m, backend=backend)
        prev = None
        for _ in range(1000):
            st.run_pass()
            dual = st.dual_objective()
            if prev is not None and prev - dual < 1e-12:
                break
            prev = dual
        assert dual == pytest.approx(ref, abs=1e-6)
        assert m.energy(st.decode()) == pytest.approx(ref, abs=1e-6)

    def test_messages_stay_finite(self, backend):
        m = random_model(11)
        st = MessageState(m, backend=backend)
        for _ in range(50):
            st.run_pass()
        for arr in (st._e2n, st._e2e, st._c2e, st._node_sum, st._csum):
            assert np.all(np.isfinite(arr))


class TestBeliefsAndDecode:
    def test_zero_message_beliefs(self, backend):
        m = chain2()
        st = MessageState(m, backend=backend)
        np.testing.assert_array_equal(st.node_belief(0), m.node_potentials[0])
        np.testing.assert_array_equal(st.edge_belief(0), np.zeros((2, 2)))

    def test_exclude_only_cluster_leaves_edge_message(self, backend):
        m = af_triangle()
        c = Cluster.from_vars(m, 0, 1, 2)
        st = MessageState(m, clusters=[c], backend=backend)
        for _ in range(3):
            st.run_pass()
        e = c.edge_ids[0]
        np.testing.assert_allclose(
            st.edge_belief(e, exclude=c), st.edge_to_edge_view(e), atol=1e-15
        )

    def test_exclude_not_containing_edge_rejected(self, backend):
        m = generate(GeneratorSpec(kind="random_complete", n=4, states=2, seed=0))
        c = Cluster.from_vars(m, 0, 1, 2)
        st = MessageState(m, clusters=[c], backend=backend)
        outside = m.edge_index(0, 3)
        with pytest.raises(ValueError):
            st.edge_belief(outside, exclude=c)

    def test_decode_tie_goes_to_lowest_state(self, backend):
        m = PairwiseModel([2, 3], [[0.5, 0.5], [1.0, 2.0, 2.0]], [], [])
        st = MessageState(m, backend=backend)
        np.testing.assert_array_equal(st.decode(), [0, 1])

    def test_zero_model_decodes_all_zero(self, backend):
        m = PairwiseModel([2, 2, 2], [np.zeros(2)] * 3, [(0, 1)],
                          [np.zeros((2, 2))])
        st = MessageState(m, backend=backend)
        np.testing.assert_array_equal(st.decode(), [0, 0, 0])


class TestPassBookkeeping:
    def test_empty_edge_set_pass(self, backend):
        m = PairwiseModel([2, 3], [np.zeros(2), np.zeros(3)], [], [])
        st = MessageState(m, backend=backend)
        st.run_pass()
        assert st.pass_count == 1
        assert st.dual_objective() == 0.0

    def test_pass_count_increments(self, backend):
        st = MessageState(chain2(), backend=backend)
        for k in range(3):
            st.run_pass()
        assert st.pass_count == 3
