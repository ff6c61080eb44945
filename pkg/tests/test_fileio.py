import numpy as np
import pytest

from gbn.bayesnet import DiscreteDataset, random_parameters
from gbn.errors import InputFormatError
from gbn.fileio import (
    read_bench_config,
    read_dag_file,
    read_dataset_csv,
    read_grouping_file,
    read_network_json,
    read_result_json,
    write_dag_file,
    write_dataset_csv,
    write_grouping_file,
    write_network_json,
    write_result_json,
)
from gbn.graph import Cpdag, Dag, Grouping
from gbn.grouplearn import GroupLearnResult


def _bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestDagFiles:
    def test_round_trip_byte_identical(self, tmp_path):
        dag = Dag(4, [(0, 2), (1, 3), (2, 3)])
        names = ["x1", "x2", "x3", "x4"]
        p1 = tmp_path / "a.dag"
        p2 = tmp_path / "b.dag"
        write_dag_file(p1, dag, names)
        loaded, loaded_names = read_dag_file(p1)
        assert loaded == dag and list(loaded_names) == names
        write_dag_file(p2, loaded, loaded_names)
        assert _bytes(p1) == _bytes(p2)

    def test_integer_mode(self, tmp_path):
        p = tmp_path / "c.dag"
        p.write_text("0 -> 2\n1 -> 2\n3\n")
        dag, names = read_dag_file(p)
        assert names is None
        assert dag.node_count == 4
        assert dag.arcs == frozenset({(0, 2), (1, 2)})

    def test_isolated_named_node(self, tmp_path):
        p = tmp_path / "d.dag"
        p.write_text("a -> b\nlonely\n")
        dag, names = read_dag_file(p)
        assert dag.node_count == 3
        assert "lonely" in names

    def test_nodes_directive_fixes_order(self, tmp_path):
        p = tmp_path / "e.dag"
        p.write_text("# nodes: z,y,x\nx -> z\n")
        dag, names = read_dag_file(p)
        assert names == ("z", "y", "x")
        assert dag.arcs == frozenset({(2, 0)})

    def test_malformed_arc(self, tmp_path):
        p = tmp_path / "f.dag"
        p.write_text("a -> \n")
        with pytest.raises(InputFormatError):
            read_dag_file(p)

    def test_cycle_reported_as_format_error(self, tmp_path):
        p = tmp_path / "g.dag"
        p.write_text("a -> b\nb -> a\n")
        with pytest.raises(InputFormatError):
            read_dag_file(p)


class TestGroupingFiles:
    def test_round_trip(self, tmp_path):
        grouping = Grouping([(0, 2), (1,), (3, 4)], names=["A", "B C", "D"])
        names = ["v0", "v1", "v2", "v3", "v4"]
        p1 = tmp_path / "a.groups"
        p2 = tmp_path / "b.groups"
        write_grouping_file(p1, grouping, names)
        loaded = read_grouping_file(p1, names)
        assert loaded.groups == grouping.groups
        assert loaded.names == ("A", "B C", "D")
        write_grouping_file(p2, loaded, names)
        assert _bytes(p1) == _bytes(p2)

    def test_unknown_variable(self, tmp_path):
        p = tmp_path / "bad.groups"
        p.write_text("A: v0,nope\n")
        with pytest.raises(InputFormatError):
            read_grouping_file(p, ["v0", "v1"])

    def test_non_partition(self, tmp_path):
        p = tmp_path / "bad2.groups"
        p.write_text("A: 0,1\nB: 1\n")
        with pytest.raises(InputFormatError):
            read_grouping_file(p)


class TestDatasetCsv:
    def test_round_trip_byte_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        data = DiscreteDataset(
            ["a", "b", "c"], [2, 3, 2], rng.integers(0, 2, size=(20, 3))
        )
        p1 = tmp_path / "d1.csv"
        p2 = tmp_path / "d2.csv"
        write_dataset_csv(p1, data)
        loaded = read_dataset_csv(p1)
        assert loaded.names == data.names
        assert loaded.cardinalities == data.cardinalities
        assert np.array_equal(loaded.rows, data.rows)
        write_dataset_csv(p2, loaded)
        assert _bytes(p1) == _bytes(p2)

    def test_cardinalities_inferred(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b\n0,2\n1,0\n")
        loaded = read_dataset_csv(p)
        assert loaded.cardinalities == (2, 3)

    def test_ragged_row_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n0\n")
        with pytest.raises(InputFormatError):
            read_dataset_csv(p)

    def test_non_integer_cell_rejected(self, tmp_path):
        p = tmp_path / "bad2.csv"
        p.write_text("a,b\n0,x\n")
        with pytest.raises(InputFormatError):
            read_dataset_csv(p)


class TestNetworkJson:
    def test_round_trip_byte_identical(self, tmp_path):
        bn = random_parameters(Dag(3, [(0, 1), (1, 2)]), [2, 3, 2], seed=1)
        p1 = tmp_path / "n1.json"
        p2 = tmp_path / "n2.json"
        write_network_json(p1, bn, ["a", "b", "c"])
        loaded, names = read_network_json(p1)
        assert names == ("a", "b", "c")
        assert loaded.dag == bn.dag
        assert all(np.allclose(x, y) for x, y in zip(loaded.cpts, bn.cpts))
        write_network_json(p2, loaded, names)
        assert _bytes(p1) == _bytes(p2)

    def test_wrong_format_rejected(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text('{"format": "other"}')
        with pytest.raises(InputFormatError):
            read_network_json(p)


class TestResultJson:
    def test_round_trip(self, tmp_path):
        result = GroupLearnResult(
            Cpdag(3, [(0, 2), (1, 2)], ()),
            None,
            "via-cb",
            {"ci_queries": 12},
        )
        p = tmp_path / "res.json"
        write_result_json(p, result, ["A", "B", "C"], [(0, 2), (1, 2)])
        payload, cpdag = read_result_json(p)
        assert payload["method"] == "via-cb"
        assert cpdag == result.group_cpdag
        assert payload["cause_pairs"] == [["A", "C"], ["B", "C"]]


class TestBenchConfig:
    def test_generator_config(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(
            '{"format": "gbn.bench", "version": 1,'
            '"generator": {"num_groups": 3, "group_size": 2, "p": 0.3,'
            '"flips": 50, "instances": 2},'
            '"sample_sizes": [50], "methods": ["via-cb"], "seed": 1}'
        )
        config = read_bench_config(p)
        assert len(config.instances) == 2
        assert config.instances[0].grouping.k == 3

    def test_instance_files_resolved_relative(self, tmp_path, data_dir):
        p = tmp_path / "cfg.json"
        p.write_text(
            '{"format": "gbn.bench", "version": 1,'
            f'"instances": [{{"name": "s1", "variable_dag": "{data_dir}/structure1.dag",'
            f'"grouping": "{data_dir}/structure1.groups",'
            f'"group_dag": "{data_dir}/structure1_groups.dag"}}],'
            '"sample_sizes": [10], "methods": ["via-cb"]}'
        )
        config = read_bench_config(p)
        assert config.instances[0].variable_dag.node_count == 30
        assert config.instances[0].grouping.k == 10

    def test_bad_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{nope")
        with pytest.raises(InputFormatError):
            read_bench_config(p)
