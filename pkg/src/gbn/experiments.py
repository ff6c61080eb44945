"""Reproduction harnesses: the groupwise-faithfulness prevalence study over
random graphs, the generator of groupwise-faithful (group DAG, variable DAG)
pairs, and the structure-recovery benchmark scored by structural Hamming
distance.
"""

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._util import derive_seed
from .bayesnet import forward_sample, random_parameters
from .errors import (
    BudgetExceededError,
    EncodingOverflowError,
    NoConsistentExtensionError,
)
from .graph import Dag, Grouping, cpdag_of, random_dag, reachable_mask_lists, shd
from .grouplearn import (
    _dsep_table_core,
    check_groupwise_faithfulness,
    find_group_dag_direct_oracle,
    find_group_dag_via_variable_oracle,
    group_dsep_table,
    group_tables_equal,
    learn_group_dag,
)

ORACLE_METHODS = ("direct-cb-oracle", "via-cb-oracle")


# ---------------------------------------------------------------------------
# Prevalence of groupwise faithfulness over random DAG/grouping pairs


@dataclass
class PrevalenceCell:
    p: float
    group_size: int
    pairs_checked: int
    pairs_faithful: int

    @property
    def proportion(self):
        return self.pairs_faithful / self.pairs_checked


def gf_prevalence(n, p_grid, group_sizes, graphs_per_p, groupings_per_graph, seed):
    """Fraction of (random DAG, random grouping) pairs that are groupwise
    faithful, per (arc probability, group size) cell.

    For each p, ``graphs_per_p`` DAGs are drawn once and shared across all
    group sizes; each graph gets ``groupings_per_graph`` groupings per size,
    sampled by permuting the nodes uniformly and chunking (the last group is
    smaller when the size does not divide n). Deterministic per seed.
    """
    for s in group_sizes:
        if not 1 <= s <= n:
            raise ValueError(f"group size {s} not expressible for n={n}")
    cells = {
        (p, s): PrevalenceCell(p, s, 0, 0) for p in p_grid for s in group_sizes
    }
    for pi, p in enumerate(p_grid):
        for gi in range(graphs_per_p):
            dag = random_dag(n, p, derive_seed(seed, pi, gi))
            for si, s in enumerate(group_sizes):
                for ri in range(groupings_per_graph):
                    rng = np.random.default_rng(derive_seed(seed, pi, gi, si, ri))
                    perm = [int(x) for x in rng.permutation(n)]
                    grouping = Grouping.chunked(perm, s)
                    ok, _ = check_groupwise_faithfulness(dag, grouping)
                    cell = cells[(p, s)]
                    cell.pairs_checked += 1
                    cell.pairs_faithful += int(ok)
    return [cells[(p, s)] for p in p_grid for s in group_sizes]


# ---------------------------------------------------------------------------
# Groupwise-faithful pair generation


class _MutableDag:
    """Adjacency maintained incrementally through the flip loop."""

    def __init__(self, n, arcs):
        self.n = n
        self.arcs = set(arcs)
        self.parents = [set() for _ in range(n)]
        self.children = [set() for _ in range(n)]
        for u, v in self.arcs:
            self.parents[v].add(u)
            self.children[u].add(v)

    def add(self, u, v):
        self.arcs.add((u, v))
        self.parents[v].add(u)
        self.children[u].add(v)

    def remove(self, u, v):
        self.arcs.discard((u, v))
        self.parents[v].discard(u)
        self.children[u].discard(v)

    def creates_cycle(self, u, v):
        """Whether adding u -> v closes a cycle (v already reaches u)."""
        if u == v:
            return True
        seen = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            if x == u:
                return True
            for c in self.children[x]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False


def _holds_recursive_basis(graph, grouping, basis):
    """Whether every (source group, conditioning nodes, forbidden nodes)
    basis statement is a d-separation in the current graph."""
    for members, z_mask, other_mask in basis:
        reached = reachable_mask_lists(graph.parents, graph.children, members, z_mask)
        if reached & other_mask:
            return False
    return True


def generate_gf_pair(num_groups=10, group_size=2, p=0.2, flips=1000, seed=0,
                     paranoid=False):
    """Random (group DAG H, variable DAG G, grouping) with G groupwise
    Markov equivalent to H by construction.

    H is an order-respecting random DAG over the groups. G starts as a copy
    of H on one designated node per group; then single-arc toggles are
    proposed uniformly and accepted only when the result stays acyclic and
    still entails exactly H's independencies over whole groups.

    Equivalence is re-verified per proposal: adding an arc can only destroy
    independencies, so it suffices to recheck the recursive basis of H;
    removing an arc can only create independencies, so the full group
    dependence table is compared. ``paranoid`` additionally validates every
    accepted and rejected decision against the naive full-table comparison.
    """
    k = num_groups
    n = k * group_size
    grouping = Grouping.chunked(range(n), group_size)
    h_dag = random_dag(k, p, derive_seed(seed, 0))
    designated = [g[0] for g in grouping.groups]
    init_arcs = {(designated[i], designated[j]) for i, j in h_dag.arcs}
    graph = _MutableDag(n, init_arcs)

    t_h = group_dsep_table(h_dag, Grouping.singletons(k))
    node_masks = grouping.node_masks()
    basis = []
    for i in range(k):
        pa = set(h_dag.parents(i))
        other = [j for j in range(i) if j not in pa]
        if not other:
            continue
        z_mask = 0
        for j in pa:
            z_mask |= node_masks[j]
        other_mask = 0
        for j in other:
            other_mask |= node_masks[j]
        basis.append((grouping.groups[i], z_mask, other_mask))

    def full_check():
        children = [sorted(c) for c in graph.children]
        t_new = _dsep_table_core(n, children, grouping)
        return group_tables_equal(t_new, t_h, k)

    rng = np.random.default_rng(derive_seed(seed, 1))
    for _ in range(flips):
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        while v == u:
            v = int(rng.integers(n))
        if (u, v) in graph.arcs:
            # Removal only creates independencies; compare the full table.
            graph.remove(u, v)
            if not full_check():
                graph.add(u, v)
        else:
            if graph.creates_cycle(u, v):
                continue
            # Addition only destroys independencies; the recursive basis of
            # H certifies that none of H's independencies was lost.
            graph.add(u, v)
            ok = _holds_recursive_basis(graph, grouping, basis)
            if paranoid and ok != full_check():
                raise AssertionError("basis shortcut disagrees with full table")
            if not ok:
                graph.remove(u, v)
    return h_dag, Dag(n, graph.arcs), grouping


# ---------------------------------------------------------------------------
# SHD benchmark


@dataclass
class BenchInstance:
    name: str
    variable_dag: Dag
    grouping: Grouping
    group_dag: Dag


@dataclass
class BenchmarkConfig:
    instances: Sequence[BenchInstance]
    sample_sizes: Sequence[int]
    methods: Sequence[str]
    replicates: int = 1
    seed: int = 0
    alpha: float = 0.05
    ess: float = 1.0
    max_parents: int = 3

    def __post_init__(self):
        if not self.methods:
            raise ValueError("methods must be non-empty")
        if any(m < 0 for m in self.sample_sizes):
            raise ValueError("sample sizes must be non-negative")

    @classmethod
    def from_generator(
        cls,
        num_groups,
        group_size,
        p,
        flips,
        n_instances,
        sample_sizes,
        methods,
        seed=0,
        **kwargs,
    ):
        instances = []
        for i in range(n_instances):
            h, g, w = generate_gf_pair(
                num_groups, group_size, p, flips, seed=derive_seed(seed, 90, i)
            )
            instances.append(BenchInstance(f"gen{i}", g, w, h))
        return cls(instances, sample_sizes, methods, seed=seed, **kwargs)


@dataclass
class BenchmarkRow:
    structure: str
    method: str
    sample_size: int
    n_ok: int = 0
    n_failed: int = 0
    shd_sum: int = 0
    runtime_sum: float = 0.0

    @property
    def mean_shd(self):
        return self.shd_sum / self.n_ok if self.n_ok else None

    @property
    def mean_runtime(self):
        return self.runtime_sum / self.n_ok if self.n_ok else None


@dataclass
class BenchmarkResult:
    rows: list
    failures: list = field(default_factory=list)

    def row(self, structure, method, sample_size):
        for r in self.rows:
            if (r.structure, r.method, r.sample_size) == (
                structure,
                method,
                sample_size,
            ):
                return r
        raise KeyError((structure, method, sample_size))


def _run_method(method, inst, data, alpha, ess, max_parents):
    if method == "direct-cb-oracle":
        return find_group_dag_direct_oracle(inst.variable_dag, inst.grouping)
    if method == "via-cb-oracle":
        return find_group_dag_via_variable_oracle(inst.variable_dag, inst.grouping)
    return learn_group_dag(
        method, data, inst.grouping, alpha=alpha, ess=ess, max_parents=max_parents
    )


def run_benchmark(config):
    """Draw parameters and data per replicate, run every configured method,
    and aggregate SHD between the true group CPDAG and each learned one.

    Budget refusals (product-encoding overflow, subset-table memory) and
    patterns without a consistent extension are recorded as failures and
    excluded from the SHD means rather than raised.
    """
    rows = {}
    failures = []
    for r in [
        BenchmarkRow(inst.name, method, m)
        for inst in config.instances
        for method in config.methods
        for m in config.sample_sizes
    ]:
        rows[(r.structure, r.method, r.sample_size)] = r
    for ii, inst in enumerate(config.instances):
        true_cpdag = cpdag_of(inst.group_dag)
        cards = (2,) * inst.variable_dag.node_count
        for rep in range(config.replicates):
            bn = random_parameters(
                inst.variable_dag, cards, derive_seed(config.seed, ii, rep, 0)
            )
            for mi, m in enumerate(config.sample_sizes):
                data = forward_sample(
                    bn, m, derive_seed(config.seed, ii, rep, 1 + mi)
                )
                for method in config.methods:
                    row = rows[(inst.name, method, m)]
                    t0 = time.perf_counter()
                    try:
                        result = _run_method(
                            method,
                            inst,
                            data,
                            config.alpha,
                            config.ess,
                            config.max_parents,
                        )
                    except (
                        EncodingOverflowError,
                        BudgetExceededError,
                        NoConsistentExtensionError,
                    ) as exc:
                        row.n_failed += 1
                        failures.append(
                            {
                                "structure": inst.name,
                                "method": method,
                                "sample_size": m,
                                "replicate": rep,
                                "error": type(exc).__name__,
                                "message": str(exc),
                            }
                        )
                        continue
                    row.n_ok += 1
                    row.shd_sum += shd(true_cpdag, result.group_cpdag)
                    row.runtime_sum += time.perf_counter() - t0
    order = [
        (inst.name, method, m)
        for inst in config.instances
        for method in config.methods
        for m in config.sample_sizes
    ]
    return BenchmarkResult([rows[key] for key in order], failures)
