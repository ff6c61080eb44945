import numpy as np
import pytest

from gbn.bayesnet import DiscreteDataset, forward_sample, random_parameters, xor_fixture
from gbn.errors import EncodingOverflowError
from gbn.graph import Dag, Grouping, d_separated, random_dag
from gbn.independence import (
    DSeparationOracle,
    G2Oracle,
    GroupOracle,
    decode_group_product,
    encode_group_product,
    g2_statistic,
    g2_test,
)

CASCADE = Dag(4, [(0, 2), (1, 3), (2, 3)])
# crossing arcs into pair groups {0,1} and {3,4} around singleton {2}
CROSSED_PAIRS = Dag(5, [(1, 0), (1, 4), (3, 0), (2, 4)])
CROSSED_GROUPS = Grouping([(0, 1), (2,), (3, 4)], names=["V1", "V2", "V3"])
# four groups S,T,U,V of sizes 2,2,3,2; group level entails S -> U <- T, U - V
STUV_DAG = Dag(9, [(4, 0), (7, 4), (1, 5), (2, 5), (8, 6), (6, 3)])
STUV_GROUPS = Grouping(
    [(0, 1), (2, 3), (4, 5, 6), (7, 8)], names=["S", "T", "U", "V"]
)


class TestG2:
    def test_duplicated_column_dependent(self):
        rows = np.tile(np.arange(1000) % 2, (2, 1)).T
        data = DiscreteDataset(["a", "b"], [2, 2], rows)
        assert not g2_test(data, 0, 1, [], 0.05)

    def test_independent_columns_mostly_accepted(self):
        accepted = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            rows = rng.integers(0, 2, size=(10000, 2))
            data = DiscreteDataset(["a", "b"], [2, 2], rows)
            accepted += g2_test(data, 0, 1, [], 0.05)
        assert accepted >= 90

    def test_type_one_error_rate(self):
        rejections = 0
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            rows = rng.integers(0, 2, size=(10000, 2))
            data = DiscreteDataset(["a", "b"], [2, 2], rows)
            if not g2_test(data, 0, 1, [], 0.05):
                rejections += 1
        assert 0.025 <= rejections / 1000 <= 0.1

    def test_xor_pattern(self):
        bn = xor_fixture(Dag(3, [(0, 2), (1, 2)]), 2, (0, 1), seed=4)
        data = forward_sample(bn, 10000, seed=5)
        assert g2_test(data, 0, 2, [], 0.05)
        assert not g2_test(data, 0, 2, [1], 0.05)

    def test_untestable_flag(self):
        rows = np.array([[0, 1], [1, 0], [0, 0]])
        data = DiscreteDataset(["a", "b"], [2, 2], rows)
        res = g2_statistic(data, 0, 1, [])
        assert res.untestable
        assert g2_test(data, 0, 1, [], 0.05) is True

    def test_min_rows_heuristic_scales_with_dof(self):
        rng = np.random.default_rng(0)
        rows = rng.integers(0, 2, size=(60, 4))
        data = DiscreteDataset(list("abcd"), [2] * 4, rows)
        # conditioning on two binaries: dof = 4, needs 40 rows
        assert not g2_statistic(data, 0, 1, [2]).untestable
        # three-variable conditioning set would need 80
        rows = rng.integers(0, 2, size=(60, 5))
        data = DiscreteDataset(list("abcde"), [2] * 5, rows)
        assert g2_statistic(data, 0, 1, [2, 3, 4]).untestable

    def test_rejects_overlapping_arguments(self):
        data = DiscreteDataset(["a", "b"], [2, 2], np.zeros((4, 2), dtype=int))
        with pytest.raises(ValueError):
            g2_test(data, 0, 0, [], 0.05)
        with pytest.raises(ValueError):
            g2_test(data, 0, 1, [1], 0.05)


class TestDSeparationOracle:
    def test_cascade_marginal_independence(self):
        oracle = DSeparationOracle(CASCADE)
        assert oracle.query({0}, {1}, set())

    def test_complete_dag_all_dependent(self):
        d = random_dag(4, 1.0, 0)
        oracle = DSeparationOracle(d)
        assert not oracle.query({0}, {1}, set())
        assert not oracle.query({0}, {3}, {1, 2})

    def test_empty_dag_all_independent(self):
        oracle = DSeparationOracle(Dag(4))
        assert oracle.query({0}, {1}, set())
        assert oracle.query({0}, {3}, {1, 2})


class TestGroupOracle:
    def test_crossed_pairs_queries(self):
        oracle = GroupOracle(DSeparationOracle(CROSSED_PAIRS), CROSSED_GROUPS)
        assert oracle.query({0}, {1}, set())
        assert not oracle.query({0}, {1}, {2})

    def test_stuv_queries(self):
        oracle = GroupOracle(DSeparationOracle(STUV_DAG), STUV_GROUPS)
        assert oracle.query({0}, {1}, set())  # S indep T
        assert not oracle.query({0}, {1}, {2})  # dependent given U

    def test_singleton_groups_match_base(self):
        base = DSeparationOracle(CASCADE)
        oracle = GroupOracle(base, Grouping.singletons(4))
        for x, y, zs in (((0,), (1,), ()), ((0,), (3,), (2,)), ((1,), (2,), (3,))):
            assert oracle.query(set(x), set(y), set(zs)) == base.query(
                set(x), set(y), set(zs)
            )

    def test_matches_direct_set_queries(self):
        for seed in range(15):
            dag = random_dag(8, 0.35, seed)
            grouping = Grouping([(0, 1), (2, 3, 4), (5,), (6, 7)])
            oracle = GroupOracle(DSeparationOracle(dag), grouping)
            assert oracle.query({0}, {1}, {3}) == d_separated(
                dag, (0, 1), (2, 3, 4), (6, 7)
            )
            assert oracle.query({2}, {3}, {0, 1}) == d_separated(
                dag, (5,), (6, 7), (0, 1, 2, 3, 4)
            )

    def test_group_index_out_of_range(self):
        oracle = GroupOracle(DSeparationOracle(CROSSED_PAIRS), CROSSED_GROUPS)
        with pytest.raises(ValueError):
            oracle.query({0}, {5}, set())


class TestProductEncoding:
    def test_mixed_radix_convention(self):
        rows = np.array([[1, 0, 1]])
        data = DiscreteDataset(["a", "b", "c"], [2, 2, 3], rows)
        enc = encode_group_product(data, Grouping([(0, 1), (2,)]))
        # first member most significant: (a=1, b=0) -> 1*2 + 0 = 2
        assert enc.rows[0, 0] == 2
        assert enc.rows[0, 1] == 1
        assert enc.cardinalities == (4, 3)

    def test_singleton_groups_unchanged(self):
        rng = np.random.default_rng(0)
        rows = rng.integers(0, 3, size=(50, 3))
        data = DiscreteDataset(["a", "b", "c"], [3, 3, 3], rows)
        enc = encode_group_product(data, Grouping.singletons(3))
        assert np.array_equal(enc.rows, data.rows)

    def test_decode_inverts(self):
        rng = np.random.default_rng(1)
        cards = [2, 3, 2, 4, 2]
        rows = np.column_stack([rng.integers(0, r, size=40) for r in cards])
        data = DiscreteDataset([f"x{i}" for i in range(5)], cards, rows)
        grouping = Grouping([(0, 2), (1,), (3, 4)])
        enc = encode_group_product(data, grouping)
        dec = decode_group_product(enc, grouping, cards)
        assert np.array_equal(dec.rows, data.rows)

    def test_state_blowup_refused(self):
        data = DiscreteDataset(
            [f"x{i}" for i in range(21)], [2] * 21, np.zeros((1, 21), dtype=int)
        )
        with pytest.raises(EncodingOverflowError) as err:
            encode_group_product(data, Grouping([tuple(range(21))]))
        assert err.value.states_needed > err.value.cap

    def test_encoded_independence_matches_generator(self):
        # encoded-variable G2 verdicts should track set-level truth in the
        # generating network for strong margins; majority over seeds
        dag = Dag(4, [(0, 2), (1, 3)])
        grouping = Grouping([(0, 1), (2, 3)])
        agree_indep = 0
        for seed in range(20):
            bn = random_parameters(dag, [2] * 4, seed=seed)
            data = forward_sample(bn, 10000, seed=1000 + seed)
            enc = encode_group_product(data, grouping)
            truth = d_separated(dag, (0, 1), (2, 3), ())
            agree_indep += g2_test(enc, 0, 1, [], 0.05) == truth
        assert agree_indep >= 15


class TestG2Oracle:
    def test_counts_and_memoization(self):
        rng = np.random.default_rng(0)
        rows = rng.integers(0, 2, size=(500, 3))
        data = DiscreteDataset(["a", "b", "c"], [2, 2, 2], rows)
        oracle = G2Oracle(data, alpha=0.05)
        first = oracle.query((0,), (1,), (2,))
        again = oracle.query((1,), (0,), (2,))
        assert first == again
        assert oracle.n_queries == 1  # symmetric memo hit

    def test_rejects_set_queries(self):
        data = DiscreteDataset(["a", "b"], [2, 2], np.zeros((4, 2), dtype=int))
        with pytest.raises(ValueError):
            G2Oracle(data).query((0, 1), (1,), ())
