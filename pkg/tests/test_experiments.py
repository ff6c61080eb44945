import pytest

from gbn.experiments import (
    BenchInstance,
    BenchmarkConfig,
    generate_gf_pair,
    gf_prevalence,
    run_benchmark,
)
from gbn.graph import Dag, Grouping, cpdag_of, shd
from gbn.grouplearn import check_groupwise_faithfulness, groupwise_markov_equivalent


class TestGfPrevalence:
    def test_p_zero_all_faithful(self):
        cells = gf_prevalence(8, [0.0], [2], 5, 3, seed=0)
        assert cells[0].proportion == 1.0

    def test_p_one_all_faithful(self):
        cells = gf_prevalence(8, [1.0], [2], 5, 3, seed=0)
        assert cells[0].proportion == 1.0

    def test_deterministic(self):
        a = gf_prevalence(10, [0.3], [2, 3], 4, 3, seed=5)
        b = gf_prevalence(10, [0.3], [2, 3], 4, 3, seed=5)
        assert [(c.p, c.group_size, c.pairs_faithful) for c in a] == [
            (c.p, c.group_size, c.pairs_faithful) for c in b
        ]

    def test_proportions_in_unit_interval(self):
        for c in gf_prevalence(10, [0.2, 0.6], [2, 4], 4, 2, seed=1):
            assert 0.0 <= c.proportion <= 1.0
            assert c.pairs_checked == 8

    def test_invalid_group_size(self):
        with pytest.raises(ValueError):
            gf_prevalence(6, [0.5], [7], 2, 2, seed=0)


class TestGenerateGfPair:
    def test_singleton_groups_return_h_itself(self):
        h, g, w = generate_gf_pair(6, 1, 0.3, 500, seed=3)
        assert g.arcs == h.arcs
        assert w.is_all_singletons()

    def test_all_outputs_groupwise_equivalent(self):
        for seed in range(20):
            h, g, w = generate_gf_pair(5, 2, 0.25, 200, seed=seed)
            assert groupwise_markov_equivalent(g, w, h), seed
            ok, learned = check_groupwise_faithfulness(g, w)
            assert ok
            assert learned == cpdag_of(h)

    def test_deterministic(self):
        a = generate_gf_pair(6, 2, 0.2, 300, seed=11)
        b = generate_gf_pair(6, 2, 0.2, 300, seed=11)
        assert a[0] == b[0] and a[1] == b[1]

    def test_initial_layer_mirrors_group_dag(self):
        h, g, w = generate_gf_pair(6, 3, 0.3, 0, seed=2)
        designated = [grp[0] for grp in w.groups]
        assert g.arcs == frozenset(
            (designated[i], designated[j]) for i, j in h.arcs
        )

    def test_basis_shortcut_agrees_with_full_comparison(self):
        # paranoid mode re-validates every accepted/rejected addition
        # against the naive full-table comparison
        for seed in range(6):
            generate_gf_pair(4, 2, 0.3, 150, seed=seed, paranoid=True)


class TestRunBenchmark:
    def _tiny_instance(self, seed=0):
        h, g, w = generate_gf_pair(4, 2, 0.3, 200, seed=seed)
        return BenchInstance(f"tiny{seed}", g, w, h)

    def test_oracle_methods_recover_exactly(self):
        config = BenchmarkConfig(
            [self._tiny_instance(s) for s in range(3)],
            sample_sizes=[100],
            methods=["via-cb-oracle", "direct-cb-oracle"],
            seed=1,
        )
        result = run_benchmark(config)
        for row in result.rows:
            assert row.mean_shd == 0.0
            assert row.n_failed == 0

    def test_zero_sample_size_yields_empty_pattern_shd(self):
        inst = self._tiny_instance(1)
        config = BenchmarkConfig(
            [inst], sample_sizes=[0], methods=["via-cb"], seed=2
        )
        result = run_benchmark(config)
        row = result.rows[0]
        true_cpdag = cpdag_of(inst.group_dag)
        assert row.mean_shd == float(true_cpdag.edge_count())

    def test_self_distance_is_zero(self):
        cp = cpdag_of(Dag(4, [(0, 2), (1, 2)]))
        assert shd(cp, cp) == 0

    def test_failures_recorded_not_raised(self):
        n = 22
        dag = Dag(n, [(0, 1)])
        grouping = Grouping([tuple(range(21)), (21,)])
        h = Dag(2, [(0, 1)])
        config = BenchmarkConfig(
            [BenchInstance("blowup", dag, grouping, h)],
            sample_sizes=[50],
            methods=["direct-cb"],
            seed=0,
        )
        result = run_benchmark(config)
        assert result.rows[0].n_failed == 1
        assert result.rows[0].mean_shd is None
        assert result.failures[0]["error"] == "EncodingOverflowError"

    def test_replicates_and_row_schema(self):
        config = BenchmarkConfig(
            [self._tiny_instance(2)],
            sample_sizes=[50, 200],
            methods=["via-cb", "combined"],
            replicates=2,
            seed=3,
        )
        result = run_benchmark(config)
        assert len(result.rows) == 4
        for row in result.rows:
            assert row.n_ok + row.n_failed == 2

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BenchmarkConfig([], sample_sizes=[10], methods=[])
        with pytest.raises(ValueError):
            BenchmarkConfig([], sample_sizes=[-1], methods=["via-cb"])
