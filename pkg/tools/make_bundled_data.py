#!/usr/bin/env python3
"""Regenerate the data files bundled under src/gbn/data/.

Everything here is deterministic. The housing CSV is a synthetic stand-in:
it matches the published schema of the UCI Boston housing table (506 rows,
14 variables) after discretization, but the original measurements are not
redistributable through this repository's toolchain, so the cells are
sampled from a seeded random network. The three benchmark structures are
likewise generated stand-ins with the documented node counts and group
memberships; see the file headers.
"""

import json
import os

from gbn import (
    Dag,
    Grouping,
    forward_sample,
    generate_gf_pair,
    random_dag,
    random_parameters,
)
from gbn.fileio import write_dag_file, write_grouping_file

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "gbn", "data")

HOUSING_NAMES = [
    "CRIM", "ZN", "INDUS", "CHAS", "NOX", "RM", "AGE",
    "DIS", "RAD", "TAX", "PTRATIO", "B", "LSTAT", "MEDV",
]
HOUSING_CARDS = [3, 3, 3, 2, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3]

HOUSING_GROUPS = [
    ("Accessibility", ["CHAS", "DIS", "RAD"]),
    ("Zoning", ["ZN", "INDUS"]),
    ("Apartment properties", ["RM", "AGE"]),
    ("Population", ["B", "LSTAT"]),
    ("Crime", ["CRIM"]),
    ("Pollution", ["NOX"]),
    ("Education", ["PTRATIO"]),
    ("House prices", ["MEDV"]),
    ("Taxes", ["TAX"]),
]


def make_housing():
    n = len(HOUSING_NAMES)
    dag = random_dag(n, 0.18, seed=20240811)
    bn = random_parameters(dag, HOUSING_CARDS, seed=5)
    data = forward_sample(bn, 506, seed=6, names=HOUSING_NAMES)
    path = os.path.join(DATA_DIR, "housing_discrete.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(
            "# Synthetic stand-in for the UCI Boston housing table: same shape\n"
            "# (506 rows, 14 variables) and names, discretized coding, but the\n"
            "# cells are sampled from a seeded random network because the real\n"
            "# measurements are not redistributable here. Regenerate with\n"
            "# tools/make_bundled_data.py.\n"
        )
        fh.write("#cardinalities:" + ",".join(map(str, HOUSING_CARDS)) + "\n")
        fh.write(",".join(HOUSING_NAMES) + "\n")
        for row in data.rows:
            fh.write(",".join(str(int(x)) for x in row) + "\n")
    write_grouping_file(
        os.path.join(DATA_DIR, "housing.groups"),
        Grouping(
            [[HOUSING_NAMES.index(v) for v in members] for _, members in HOUSING_GROUPS],
            names=[name for name, _ in HOUSING_GROUPS],
        ),
        HOUSING_NAMES,
    )


# Group memberships: ten base triples; each extra decade of nodes
# distributes one more member to every group.
def structure_grouping(n_extra_decades):
    groups = []
    for i in range(10):
        members = [3 * i, 3 * i + 1, 3 * i + 2]
        for d in range(n_extra_decades):
            members.append(30 + 10 * d + i)
        groups.append(members)
    return groups


def make_structure(tag, n_extra_decades, seed):
    group_size = 3 + n_extra_decades
    n = 10 * group_size
    # a short flip budget keeps the variable DAGs at hand-drawn density;
    # heavily accreted graphs defeat constraint-based recovery entirely
    h_dag, g_gen, w_gen = generate_gf_pair(
        num_groups=10, group_size=group_size, p=0.2, flips=100, seed=seed
    )
    target_groups = structure_grouping(n_extra_decades)
    # relabel the generator's consecutive chunks onto the documented
    # memberships, preserving within-group member order
    relabel = {}
    for i, chunk in enumerate(w_gen.groups):
        for slot, node in enumerate(chunk):
            relabel[node] = target_groups[i][slot]
    g_dag = Dag(n, [(relabel[u], relabel[v]) for u, v in g_gen.arcs])
    grouping = Grouping(target_groups, names=[f"v{i + 1}" for i in range(10)])
    names = [f"x{v + 1}" for v in range(n)]
    base = os.path.join(DATA_DIR, f"structure{tag}")
    _write_dag_with_note(
        base + ".dag",
        g_dag,
        names,
        f"Generated benchmark structure {tag}: {n} nodes in 10 groups,\n"
        "# groupwise faithful to the group DAG in\n"
        f"# structure{tag}_groups.dag by construction. Regenerate with\n"
        "# tools/make_bundled_data.py.",
    )
    write_grouping_file(base + ".groups", grouping, names)
    _write_dag_with_note(
        base + "_groups.dag",
        h_dag,
        list(grouping.names),
        f"Group DAG for benchmark structure {tag}.",
    )


def _write_dag_with_note(path, dag, names, note):
    write_dag_file(path, dag, names)
    with open(path, "r", encoding="utf-8") as fh:
        body = fh.read()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {note}\n{body}")


def make_configs():
    generated_small = {
        "format": "gbn.bench",
        "version": 1,
        "generator": {
            "num_groups": 4,
            "group_size": 2,
            "p": 0.2,
            "flips": 400,
            "instances": 3,
        },
        "sample_sizes": [100, 1000],
        "methods": ["direct-cb", "direct-sb", "via-cb", "via-sb", "combined"],
        "replicates": 1,
        "seed": 7,
        "alpha": 0.05,
        "ess": 1.0,
        "max_parents": 3,
    }
    structure_bench = {
        "format": "gbn.bench",
        "version": 1,
        "instances": [
            {
                "name": "structure1",
                "variable_dag": "structure1.dag",
                "grouping": "structure1.groups",
                "group_dag": "structure1_groups.dag",
            }
        ],
        "sample_sizes": [10000],
        "methods": ["via-cb"],
        "replicates": 3,
        "seed": 7,
        "alpha": 0.05,
        "ess": 1.0,
        "max_parents": 3,
    }
    for name, payload in (
        ("bench_generated_small.json", generated_small),
        ("bench_structure1.json", structure_bench),
    ):
        with open(os.path.join(DATA_DIR, name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


if __name__ == "__main__":
    os.makedirs(DATA_DIR, exist_ok=True)
    make_housing()
    make_structure(1, 0, seed=311)
    make_structure(2, 1, seed=312)
    make_structure(3, 2, seed=313)
    make_configs()
    print("bundled data regenerated under", os.path.abspath(DATA_DIR))
