from itertools import permutations

import numpy as np
import pytest

from gbn.bayesnet import forward_sample, random_parameters
from gbn.errors import EncodingOverflowError
from gbn.experiments import generate_gf_pair
from gbn.graph import Cpdag, Dag, Grouping, cpdag_of
from gbn.grouplearn import (
    check_groupwise_faithfulness,
    find_group_dag_direct,
    find_group_dag_direct_oracle,
    find_group_dag_via_variable,
    find_group_dag_via_variable_oracle,
    group_causes_from_vstructures,
    group_dsep_table,
    groupwise_markov_equivalent,
    strong_causality_counterexample,
)
from oracles import group_tables_naive, strong_random_parameters

CASCADE = Dag(4, [(0, 2), (1, 3), (2, 3)])
CASCADE_GROUPS = Grouping([(0,), (1,), (2, 3)], names=["V1", "V2", "V3"])
CROSSED_PAIRS = Dag(5, [(1, 0), (1, 4), (3, 0), (2, 4)])
CROSSED_GROUPS = Grouping([(0, 1), (2,), (3, 4)], names=["V1", "V2", "V3"])
STUV_DAG = Dag(9, [(4, 0), (7, 4), (1, 5), (2, 5), (8, 6), (6, 3)])
STUV_GROUPS = Grouping([(0, 1), (2, 3), (4, 5, 6), (7, 8)], names=["S", "T", "U", "V"])
STUV_GROUP_DAG = Dag(4, [(0, 2), (1, 2), (2, 3)])


class TestGroupDsepTable:
    def test_matches_naive_set_queries(self):
        rng = np.random.default_rng(0)
        for seed in range(12):
            n = int(rng.integers(4, 9))
            dag = Dag(
                n,
                [
                    (i, j)
                    for i in range(n)
                    for j in range(i + 1, n)
                    if rng.random() < 0.35
                ],
            )
            sizes = []
            left = n
            while left > 0:
                take = min(left, int(rng.integers(1, 4)))
                sizes.append(take)
                left -= take
            start = 0
            groups = []
            for s in sizes:
                groups.append(tuple(range(start, start + s)))
                start += s
            grouping = Grouping(groups)
            table = group_dsep_table(dag, grouping)
            naive = group_tables_naive(dag, grouping)
            for (i, j, sub), indep in naive.items():
                mask = sum(1 << g for g in sub)
                assert ((int(table[i, mask]) >> j) & 1 == 0) == indep
                assert ((int(table[j, mask]) >> i) & 1 == 0) == indep


class TestChecker:
    def test_cascade_grouping_unfaithful(self):
        ok, learned = check_groupwise_faithfulness(CASCADE, CASCADE_GROUPS)
        assert not ok
        assert learned == Cpdag(3, [(0, 2), (1, 2)], ())

    def test_crossed_pairs_faithful_with_vstructure(self):
        ok, learned = check_groupwise_faithfulness(CROSSED_PAIRS, CROSSED_GROUPS)
        assert ok
        assert learned == Cpdag(3, [(0, 2), (1, 2)], ())

    def test_singletons_always_faithful_small(self, dags5):
        grouping = Grouping.singletons(5)
        for dag in dags5:
            ok, learned = check_groupwise_faithfulness(dag, grouping)
            assert ok, dag
            assert learned == cpdag_of(dag)

    def test_group_count_cap(self):
        dag = Dag(17)
        with pytest.raises(ValueError):
            check_groupwise_faithfulness(dag, Grouping.singletons(17))

    def test_equivalence_helper_matches_checker_on_true_group_dag(self):
        for seed in range(10):
            h, g, w = generate_gf_pair(5, 2, 0.3, 300, seed=seed)
            assert groupwise_markov_equivalent(g, w, h)
            ok, learned = check_groupwise_faithfulness(g, w)
            assert ok
            assert learned == cpdag_of(h)


class TestDirectLearner:
    def test_oracle_limit_equals_pc_on_variables(self):
        for seed in range(8):
            n = 6
            dag = Dag(
                n,
                [
                    (i, j)
                    for i in range(n)
                    for j in range(i + 1, n)
                    if (i * 7 + j * 13 + seed) % 5 == 0
                ],
            )
            res = find_group_dag_direct_oracle(dag, Grouping.singletons(n))
            assert res.group_cpdag == cpdag_of(dag)

    def test_crossed_pairs_from_data(self):
        hits = 0
        for seed in range(10):
            bn = random_parameters(CROSSED_PAIRS, [2] * 5, seed=seed)
            data = forward_sample(bn, 10000, seed=100 + seed)
            res = find_group_dag_direct(data, CROSSED_GROUPS, "constraint")
            hits += res.group_cpdag == Cpdag(3, [(0, 2), (1, 2)], ())
        assert hits >= 8

    def test_score_backend_runs(self):
        bn = random_parameters(CROSSED_PAIRS, [2] * 5, seed=0)
        data = forward_sample(bn, 5000, seed=1)
        res = find_group_dag_direct(data, CROSSED_GROUPS, "score")
        assert res.method == "direct-sb"
        assert res.group_cpdag.node_count == 3
        assert "total_score" in res.diagnostics

    def test_state_blowup_refused(self):
        rng = np.random.default_rng(0)
        rows = rng.integers(0, 2, size=(50, 21))
        from gbn.bayesnet import DiscreteDataset

        data = DiscreteDataset([f"x{i}" for i in range(21)], [2] * 21, rows)
        with pytest.raises(EncodingOverflowError):
            find_group_dag_direct(data, Grouping([tuple(range(21))]), "constraint")

    def test_unknown_backend(self):
        bn = random_parameters(CROSSED_PAIRS, [2] * 5, seed=0)
        data = forward_sample(bn, 100, seed=1)
        with pytest.raises(ValueError):
            find_group_dag_direct(data, CROSSED_GROUPS, "quantum")


class TestViaVariableLearner:
    def test_stuv_from_data(self):
        # parameterized away from degeneracy; a low significance level keeps
        # spurious edges from breaking exact-class recovery
        hits = 0
        for seed in range(10):
            bn = strong_random_parameters(STUV_DAG, seed=seed)
            data = forward_sample(bn, 10000, seed=200 + seed)
            try:
                res = find_group_dag_via_variable(
                    data, STUV_GROUPS, "constraint", alpha=0.01
                )
            except Exception:
                continue
            hits += res.group_cpdag == cpdag_of(STUV_GROUP_DAG)
        assert hits >= 8

    def test_oracle_limit_on_generated_pairs(self):
        for seed in range(10):
            h, g, w = generate_gf_pair(6, 2, 0.25, 400, seed=40 + seed)
            res = find_group_dag_via_variable_oracle(g, w)
            assert res.group_cpdag == cpdag_of(h)
            assert res.variable_cpdag == cpdag_of(g)

    def test_empty_variable_dag_gives_empty_group_cpdag(self):
        res = find_group_dag_via_variable_oracle(Dag(6), Grouping([(0, 1, 2), (3,), (4, 5)]))
        assert res.group_cpdag == Cpdag(3)

    def test_score_backend_returns_both_patterns(self):
        bn = random_parameters(CROSSED_PAIRS, [2] * 5, seed=3)
        data = forward_sample(bn, 5000, seed=4)
        res = find_group_dag_via_variable(data, CROSSED_GROUPS, "score")
        assert res.method == "via-sb"
        assert res.variable_cpdag is not None
        assert res.group_cpdag.node_count == 3


class TestGroupCauses:
    def test_stuv_pattern(self):
        cp = Cpdag(4, [(0, 2), (1, 2), (2, 3)], ())
        assert group_causes_from_vstructures(cp) == {(0, 2), (1, 2)}

    def test_housing_style_vstructure(self):
        names = ["Apartment properties", "Taxes", "House prices"]
        cp = Cpdag(3, [(0, 2), (1, 2)], ())
        causes = {
            (names[i], names[j]) for i, j in group_causes_from_vstructures(cp)
        }
        assert causes == {
            ("Apartment properties", "House prices"),
            ("Taxes", "House prices"),
        }

    def test_edgeless(self):
        assert group_causes_from_vstructures(Cpdag(4)) == set()

    def test_shielded_collider_not_reported(self):
        cp = Cpdag(3, [(0, 2), (1, 2)], [(0, 1)])
        assert group_causes_from_vstructures(cp) == set()

    def test_permutation_equivariance(self):
        cp = cpdag_of(Dag(5, [(0, 2), (1, 2), (2, 3), (4, 3)]))
        base = group_causes_from_vstructures(cp)
        for perm in permutations(range(5)):
            relabeled = Cpdag(
                5,
                [(perm[u], perm[v]) for u, v in cp.directed_edges],
                [(perm[u], perm[v]) for u, v in cp.undirected_edges],
            )
            got = group_causes_from_vstructures(relabeled)
            assert got == {(perm[i], perm[j]) for i, j in base}


class TestStrongCausalityCounterexample:
    def test_two_group_construction(self):
        h = Dag(2, [(0, 1)])
        w = Grouping([(0, 1), (2, 3)])
        g = strong_causality_counterexample(h, w, [0, 1])
        assert g.arcs == frozenset({(0, 2), (3, 1)})

    def test_counterexample_preserves_group_independencies(self):
        rng = np.random.default_rng(5)
        built = 0
        for seed in range(40):
            if built >= 10:
                break
            k = int(rng.integers(3, 6))
            h = Dag(
                k,
                [
                    (i, j)
                    for i in range(k)
                    for j in range(i + 1, k)
                    if rng.random() < 0.4
                ],
            )
            # find a directed path of length >= 2 arcs if one exists
            path = None
            for a in range(k):
                for b in range(k):
                    if h.has_arc(a, b):
                        for c in range(k):
                            if h.has_arc(b, c):
                                path = [a, b, c]
                                break
                    if path:
                        break
                if path:
                    break
            if path is None:
                continue
            built += 1
            w = Grouping([(2 * i, 2 * i + 1) for i in range(k)])
            g = strong_causality_counterexample(h, w, path)
            assert groupwise_markov_equivalent(g, w, h)
        assert built >= 5

    def test_reverse_path_exists(self):
        h = Dag(3, [(0, 1), (1, 2)])
        w = Grouping([(0, 1), (2, 3), (4, 5)])
        g = strong_causality_counterexample(h, w, [0, 1, 2])
        # second designated node of the path's end reaches the start's
        assert g.reverse_reachable([1]) & (1 << 5)

    def test_errors(self):
        h = Dag(2, [(0, 1)])
        with pytest.raises(ValueError):
            strong_causality_counterexample(h, Grouping([(0,), (1, 2)]), [0, 1])
        with pytest.raises(ValueError):
            strong_causality_counterexample(h, Grouping([(0, 1), (2, 3)]), [1, 0])
        with pytest.raises(ValueError):
            strong_causality_counterexample(h, Grouping([(0, 1), (2, 3)]), [0])


class TestCausePathWitness:
    def test_reported_causes_have_variable_level_paths(self):
        # on faithful oracle-limit runs, every reported cause pair is
        # witnessed by a directed variable-level path into the effect group
        found_pairs = 0
        for seed in range(12):
            h, g, w = generate_gf_pair(5, 2, 0.3, 300, seed=seed)
            res = find_group_dag_via_variable_oracle(g, w)
            causes = group_causes_from_vstructures(res.group_cpdag)
            found_pairs += len(causes)
            for ci, cj in causes:
                effect_nodes = set(w.groups[cj])
                hit = any(
                    g.reverse_reachable([t]) & sum(1 << s for s in w.groups[ci])
                    for t in effect_nodes
                )
                assert hit, (seed, ci, cj)
        assert found_pairs > 0
