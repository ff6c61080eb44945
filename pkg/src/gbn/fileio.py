"""File formats.

Text formats are line-oriented with ``#`` comments: DAG files hold one
``u -> v`` arc per line plus a ``# nodes:`` directive naming every node,
grouping files hold one ``Name: var1,var2`` line per group. Datasets are
CSV with a leading ``#cardinalities:`` line, networks and results are
versioned JSON. Writers are deterministic, so write -> read -> write is
byte-identical.
"""

import csv
import io
import json
import os

import numpy as np

from .bayesnet import DiscreteBayesNet, DiscreteDataset
from .errors import InputFormatError
from .graph import Cpdag, Dag, Grouping


def _open_text(path, mode="r"):
    return open(path, mode, encoding="utf-8", newline="")


# ---------------------------------------------------------------------------
# DAG files


def write_dag_file(path, dag, names=None):
    if names is None:
        names = [str(v) for v in range(dag.node_count)]
    with _open_text(path, "w") as fh:
        fh.write("# nodes: " + ",".join(names) + "\n")
        for u, v in sorted(dag.arcs):
            fh.write(f"{names[u]} -> {names[v]}\n")


def read_dag_file(path):
    """Parse a DAG file; returns (Dag, names or None).

    Nodes come from the ``# nodes:`` directive when present; otherwise from
    first appearance order, except that all-integer tokens are taken as
    node indices directly (names is then None). Lines holding one bare
    token declare an isolated node.
    """
    names = None
    tokens = []
    arcs_raw = []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if text.startswith("#"):
                body = text[1:].strip()
                if body.lower().startswith("nodes:"):
                    declared = [t.strip() for t in body[6:].split(",") if t.strip()]
                    if declared:
                        names = declared
                continue
            if not text:
                continue
            if "->" in text:
                left, _, right = text.partition("->")
                u, v = left.strip(), right.strip()
                if not u or not v:
                    raise InputFormatError(f"{path}:{lineno}: malformed arc {text!r}")
                arcs_raw.append((u, v))
                tokens.extend((u, v))
            else:
                if len(text.split()) != 1:
                    raise InputFormatError(f"{path}:{lineno}: unrecognized line {text!r}")
                tokens.append(text)
    if names is None and tokens and all(_is_int(t) for t in tokens):
        node_count = max(int(t) for t in tokens) + 1
        arcs = [(int(u), int(v)) for u, v in arcs_raw]
        return _build_dag(path, node_count, arcs), None
    if names is None:
        names = list(dict.fromkeys(tokens))
    if not names:
        raise InputFormatError(f"{path}: no nodes declared")
    index = {s: i for i, s in enumerate(names)}
    arcs = []
    for u, v in arcs_raw:
        if u not in index or v not in index:
            raise InputFormatError(f"{path}: arc references unknown node {u!r} or {v!r}")
        arcs.append((index[u], index[v]))
    return _build_dag(path, len(names), arcs), tuple(names)


def _build_dag(path, node_count, arcs):
    try:
        return Dag(node_count, arcs)
    except Exception as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def _is_int(t):
    try:
        int(t)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Grouping files


def write_grouping_file(path, grouping, variable_names=None):
    if variable_names is None:
        variable_names = [str(v) for v in range(grouping.node_count)]
    with _open_text(path, "w") as fh:
        for name, members in zip(grouping.names, grouping.groups):
            fh.write(f"{name}: " + ",".join(variable_names[v] for v in members) + "\n")


def read_grouping_file(path, variable_names=None):
    """Parse a grouping file; returns a Grouping carrying the group names.

    Member tokens are looked up in ``variable_names`` when given, else they
    must be integer node indices.
    """
    index = None
    if variable_names is not None:
        index = {s: i for i, s in enumerate(variable_names)}
    groups = []
    names = []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            name, sep, body = text.partition(":")
            if not sep:
                raise InputFormatError(f"{path}:{lineno}: expected 'Name: members'")
            members = []
            for tok in body.split(","):
                tok = tok.strip()
                if not tok:
                    continue
                if index is not None:
                    if tok not in index:
                        raise InputFormatError(
                            f"{path}:{lineno}: unknown variable {tok!r}"
                        )
                    members.append(index[tok])
                elif _is_int(tok):
                    members.append(int(tok))
                else:
                    raise InputFormatError(
                        f"{path}:{lineno}: variable {tok!r} needs a dataset "
                        "or DAG file to resolve names"
                    )
            groups.append(members)
            names.append(name.strip())
    try:
        return Grouping(groups, names=names)
    except Exception as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Dataset CSV


def write_dataset_csv(path, data):
    with _open_text(path, "w") as fh:
        fh.write("#cardinalities:" + ",".join(str(r) for r in data.cardinalities) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.names)
        for row in data.rows:
            writer.writerow([int(x) for x in row])


def read_dataset_csv(path):
    """Parse a dataset CSV; cardinalities come from the leading
    ``#cardinalities:`` line, or are inferred as max code + 1 (at least 2)."""
    with _open_text(path) as fh:
        content = fh.read()
    cards = None
    lines = content.splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            if line[1:].strip().lower().startswith("cardinalities:"):
                payload = line.split(":", 1)[1]
                cards = [int(t) for t in payload.split(",") if t.strip()]
            continue
        body_start = i
        break
    else:
        raise InputFormatError(f"{path}: no header row")
    reader = csv.reader(io.StringIO("\n".join(lines[body_start:])))
    try:
        names = next(reader)
    except StopIteration:
        raise InputFormatError(f"{path}: no header row") from None
    names = [s.strip() for s in names]
    rows = []
    for lineno, rec in enumerate(reader, body_start + 2):
        if not rec:
            continue
        if len(rec) != len(names):
            raise InputFormatError(f"{path}:{lineno}: expected {len(names)} cells")
        try:
            rows.append([int(x) for x in rec])
        except ValueError as exc:
            raise InputFormatError(f"{path}:{lineno}: non-integer cell") from exc
    matrix = np.array(rows, dtype=np.int64) if rows else np.zeros((0, len(names)), dtype=np.int64)
    if cards is None:
        cards = [
            max(2, int(matrix[:, j].max()) + 1) if len(rows) else 2
            for j in range(len(names))
        ]
    if len(cards) != len(names):
        raise InputFormatError(f"{path}: cardinality count does not match header")
    try:
        return DiscreteDataset(names, cards, matrix)
    except Exception as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Network JSON


def write_network_json(path, bn, names=None):
    n = bn.dag.node_count
    if names is None:
        names = [f"x{v}" for v in range(n)]
    payload = {
        "format": "gbn.network",
        "version": 1,
        "variables": [
            {"name": names[v], "cardinality": bn.cardinalities[v]} for v in range(n)
        ],
        "arcs": sorted([names[u], names[v]] for u, v in bn.dag.arcs),
        "cpts": {names[v]: [list(map(float, row)) for row in bn.cpts[v]] for v in range(n)},
    }
    _write_json(path, payload)


def read_network_json(path):
    payload = _read_json(path, "gbn.network")
    try:
        names = [rec["name"] for rec in payload["variables"]]
        cards = [int(rec["cardinality"]) for rec in payload["variables"]]
        index = {s: i for i, s in enumerate(names)}
        arcs = [(index[u], index[v]) for u, v in payload["arcs"]]
        dag = Dag(len(names), arcs)
        cpts = [payload["cpts"][name] for name in names]
        return DiscreteBayesNet(dag, cards, cpts), tuple(names)
    except InputFormatError:
        raise
    except Exception as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Learn-result JSON


def _edges_payload(cpdag, names):
    return {
        "directed": sorted([names[u], names[v]] for u, v in cpdag.directed_edges),
        "undirected": sorted([names[u], names[v]] for u, v in cpdag.undirected_edges),
    }


def _edges_from_payload(payload, names):
    index = {s: i for i, s in enumerate(names)}
    directed = [(index[u], index[v]) for u, v in payload["directed"]]
    undirected = [(index[u], index[v]) for u, v in payload["undirected"]]
    return Cpdag(len(names), directed, undirected)


def write_result_json(path, result, group_names, cause_pairs, variable_names=None,
                      extra=None):
    payload = {
        "format": "gbn.result",
        "version": 1,
        "method": result.method,
        "groups": list(group_names),
        "group_edges": _edges_payload(result.group_cpdag, group_names),
        "cause_pairs": sorted(
            [group_names[i], group_names[j]] for i, j in cause_pairs
        ),
        "variables": list(variable_names) if variable_names else None,
        "variable_edges": (
            _edges_payload(result.variable_cpdag, variable_names)
            if result.variable_cpdag is not None and variable_names
            else None
        ),
        "diagnostics": _json_safe(result.diagnostics),
    }
    if extra:
        payload.update(extra)
    _write_json(path, payload)


def read_result_json(path):
    payload = _read_json(path, "gbn.result")
    try:
        group_cpdag = _edges_from_payload(payload["group_edges"], payload["groups"])
    except Exception as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    return payload, group_cpdag


# ---------------------------------------------------------------------------
# Benchmark config and results


def read_bench_config(path):
    """Benchmark config JSON -> BenchmarkConfig (resolving referenced files)."""
    from .experiments import BenchInstance, BenchmarkConfig

    payload = _read_json(path, "gbn.bench")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(rel):
        return rel if os.path.isabs(rel) else os.path.join(base, rel)

    common = dict(
        sample_sizes=[int(m) for m in payload["sample_sizes"]],
        methods=list(payload["methods"]),
        replicates=int(payload.get("replicates", 1)),
        seed=int(payload.get("seed", 0)),
        alpha=float(payload.get("alpha", 0.05)),
        ess=float(payload.get("ess", 1.0)),
        max_parents=int(payload.get("max_parents", 3)),
    )
    try:
        if "generator" in payload:
            gen = payload["generator"]
            return BenchmarkConfig.from_generator(
                num_groups=int(gen["num_groups"]),
                group_size=int(gen["group_size"]),
                p=float(gen.get("p", 0.2)),
                flips=int(gen.get("flips", 1000)),
                n_instances=int(gen["instances"]),
                **common,
            )
        instances = []
        for rec in payload["instances"]:
            dag, names = read_dag_file(resolve(rec["variable_dag"]))
            grouping = read_grouping_file(resolve(rec["grouping"]), names)
            group_dag, gnames = read_dag_file(resolve(rec["group_dag"]))
            if grouping.node_count != dag.node_count:
                raise InputFormatError(
                    f"{rec['name']}: grouping covers {grouping.node_count} of "
                    f"{dag.node_count} variables"
                )
            if group_dag.node_count != grouping.k:
                raise InputFormatError(
                    f"{rec['name']}: group DAG has {group_dag.node_count} nodes "
                    f"but the grouping has {grouping.k} groups"
                )
            instances.append(BenchInstance(rec["name"], dag, grouping, group_dag))
        return BenchmarkConfig(instances, **common)
    except InputFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"{path}: {exc!r}") from exc


# The flat CSV keeps only run-to-run reproducible columns; wall-clock
# runtimes live in the JSON result.
_BENCH_COLUMNS = (
    "structure",
    "method",
    "sample_size",
    "n_ok",
    "n_failed",
    "mean_shd",
)


def write_bench_csv(path, result):
    with _open_text(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_BENCH_COLUMNS)
        for r in result.rows:
            writer.writerow(
                [
                    r.structure,
                    r.method,
                    r.sample_size,
                    r.n_ok,
                    r.n_failed,
                    "" if r.mean_shd is None else repr(round(r.mean_shd, 6)),
                ]
            )


def write_bench_json(path, result, config_echo=None):
    payload = {
        "format": "gbn.bench-result",
        "version": 1,
        "rows": [
            {
                "structure": r.structure,
                "method": r.method,
                "sample_size": r.sample_size,
                "n_ok": r.n_ok,
                "n_failed": r.n_failed,
                "mean_shd": r.mean_shd,
                "mean_runtime_s": r.mean_runtime,
            }
            for r in result.rows
        ],
        "failures": result.failures,
    }
    if config_echo:
        payload["config"] = config_echo
    _write_json(path, payload)


def write_prevalence_csv(path, cells):
    with _open_text(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["p", "group_size", "pairs_checked", "pairs_faithful", "proportion"]
        )
        for c in cells:
            writer.writerow(
                [
                    repr(float(c.p)),
                    c.group_size,
                    c.pairs_checked,
                    c.pairs_faithful,
                    repr(round(c.proportion, 6)),
                ]
            )


# ---------------------------------------------------------------------------
# helpers


def _write_json(path, payload):
    with _open_text(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path, expected_format):
    try:
        with _open_text(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != expected_format:
        raise InputFormatError(f"{path}: not a {expected_format} file")
    return payload


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
