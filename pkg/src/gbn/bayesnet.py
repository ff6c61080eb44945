"""Discrete-CPT Bayesian networks: random parameterization, forward
sampling, and the XOR constructions used to build unfaithful distributions
whose group-level independence pattern stays intact.
"""

import numpy as np

from .graph import Dag

# Non-XOR CPT rows are kept at least this far from 0 and 1 so that the
# random parameterization cannot introduce accidental extra independencies.
XOR_EPSILON = 0.05


class DiscreteBayesNet:
    """A DAG plus one conditional probability table per node.

    The CPT of node v has one row per configuration of its parents (taken
    in ascending node-index order, first parent most significant) and one
    column per state of v. Rows must sum to 1.
    """

    __slots__ = ("dag", "cardinalities", "cpts")

    def __init__(self, dag, cardinalities, cpts):
        cards = tuple(int(r) for r in cardinalities)
        if len(cards) != dag.node_count:
            raise ValueError("one cardinality per node required")
        if any(r < 2 for r in cards):
            raise ValueError("cardinalities must be at least 2")
        tables = []
        for v in range(dag.node_count):
            t = np.asarray(cpts[v], dtype=float)
            q = 1
            for p in dag.parents(v):
                q *= cards[p]
            if t.shape != (q, cards[v]):
                raise ValueError(
                    f"CPT of node {v} must have shape ({q}, {cards[v]}), got {t.shape}"
                )
            if np.any(t < 0) or np.any(t > 1):
                raise ValueError(f"CPT of node {v} has entries outside [0, 1]")
            if not np.allclose(t.sum(axis=1), 1.0, atol=1e-9):
                raise ValueError(f"CPT rows of node {v} do not sum to 1")
            tables.append(t)
        self.dag = dag
        self.cardinalities = cards
        self.cpts = tuple(tables)

    def parent_config_index(self, v, row_values):
        """Row index into the CPT of v for a full assignment ``row_values``."""
        parents = self.dag.parents(v)
        idx = 0
        for p in parents:
            idx = idx * self.cardinalities[p] + int(row_values[p])
        return idx

    def joint_probability(self, row_values):
        """Probability of one complete configuration under the product form."""
        prob = 1.0
        for v in range(self.dag.node_count):
            row = self.parent_config_index(v, row_values)
            prob *= self.cpts[v][row, int(row_values[v])]
        return prob


class DiscreteDataset:
    """Integer-coded samples: names, per-variable cardinalities, row matrix."""

    __slots__ = ("names", "cardinalities", "rows")

    def __init__(self, names, cardinalities, rows):
        names = tuple(str(s) for s in names)
        cards = tuple(int(r) for r in cardinalities)
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            rows = rows.reshape(0, len(names))
        if rows.ndim != 2 or rows.shape[1] != len(names):
            raise ValueError("rows must be an (m, n) matrix matching names")
        if len(cards) != len(names):
            raise ValueError("one cardinality per variable required")
        for j, r in enumerate(cards):
            if rows.shape[0] and (rows[:, j].min() < 0 or rows[:, j].max() >= r):
                raise ValueError(f"column {names[j]} has codes outside 0..{r - 1}")
        self.names = names
        self.cardinalities = cards
        self.rows = rows

    @property
    def n_variables(self):
        return len(self.names)

    @property
    def n_rows(self):
        return self.rows.shape[0]

    def column(self, j):
        return self.rows[:, j]


def random_parameters(dag, cardinalities, seed):
    """Parameterize ``dag`` with CPT rows drawn uniformly from the simplex.

    Each row is a normalized vector of independent unit-exponential draws
    (a symmetric Dirichlet with unit concentration). Deterministic per seed;
    nodes are filled in index order.
    """
    cards = tuple(int(r) for r in cardinalities)
    if any(r < 2 for r in cards):
        raise ValueError("cardinalities must be at least 2")
    rng = np.random.default_rng(seed)
    cpts = []
    for v in range(dag.node_count):
        q = 1
        for p in dag.parents(v):
            q *= cards[p]
        draws = rng.exponential(1.0, size=(q, cards[v]))
        cpts.append(draws / draws.sum(axis=1, keepdims=True))
    return DiscreteBayesNet(dag, cards, cpts)


def forward_sample(bn, m, seed, names=None):
    """Ancestral sampling: ``m`` rows drawn in topological order.

    Deterministic per seed. Column order in the result matches node order.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    n = bn.dag.node_count
    if names is None:
        names = [f"x{v}" for v in range(n)]
    rng = np.random.default_rng(seed)
    rows = np.zeros((m, n), dtype=np.int64)
    if m > 0:
        for v in bn.dag.topological_order():
            parents = bn.dag.parents(v)
            cfg = np.zeros(m, dtype=np.int64)
            for p in parents:
                cfg = cfg * bn.cardinalities[p] + rows[:, p]
            cum = np.cumsum(bn.cpts[v], axis=1)
            u = rng.random(m)
            rows[:, v] = (u[:, None] > cum[cfg]).sum(axis=1)
    return DiscreteDataset(names, bn.cardinalities, rows)


def xor_fixture(base_dag, xor_node, xor_parents, seed=0):
    """Binary network in which ``xor_node`` is the exclusive-or of its parents.

    The XOR node's CPT is deterministic. Root nodes among the XOR parents
    get an exact (1/2, 1/2) prior, which is what makes the XOR node exactly
    marginally independent of the other parent. Every remaining CPT row is
    drawn simplex-uniform and squeezed into (XOR_EPSILON, 1 - XOR_EPSILON).

    Parameters
    ----------
    base_dag : Dag
        Structure; ``xor_parents`` must be exactly the parents of
        ``xor_node`` in it.
    xor_node : int
    xor_parents : pair of int
    seed : int
        Seed for the remaining random CPTs.
    """
    p1, p2 = (int(x) for x in xor_parents)
    if set(base_dag.parents(xor_node)) != {p1, p2} or p1 == p2:
        raise ValueError("xor_parents must be exactly the two parents of xor_node")
    n = base_dag.node_count
    cards = (2,) * n
    rng = np.random.default_rng(seed)
    eps = XOR_EPSILON
    cpts = []
    for v in range(n):
        q = 2 ** len(base_dag.parents(v))
        if v == xor_node:
            t = np.zeros((4, 2))
            for a in (0, 1):
                for b in (0, 1):
                    t[a * 2 + b, a ^ b] = 1.0
            cpts.append(t)
        elif v in (p1, p2) and not base_dag.parents(v):
            cpts.append(np.full((1, 2), 0.5))
        else:
            draws = rng.exponential(1.0, size=(q, 2))
            rowsum = draws / draws.sum(axis=1, keepdims=True)
            cpts.append(eps + (1.0 - 2 * eps) * rowsum)
    return DiscreteBayesNet(base_dag, cards, cpts)


def xor_adjacent_pair_groups(seed=0):
    """Unfaithful-but-groupwise-faithful fixture with two adjacent size-2 groups.

    Groups W0 = {0, 1} and W1 = {2, 3} with designated nodes 0 and 2; the
    mirrored group arc is 0 -> 2, and node 3 is the XOR of nodes 1 and 2.
    Returns (net, grouping_groups, xor_node).
    """
    dag = Dag(4, [(0, 2), (1, 3), (2, 3)])
    net = xor_fixture(dag, 3, (1, 2), seed=seed)
    return net, [(0, 1), (2, 3)], 3


def xor_inside_triple_group(seed=0):
    """Unfaithful-but-groupwise-faithful fixture with one group of size 3.

    Groups W0 = {0, 1, 2} and W1 = {3}; the mirrored group arc is 0 -> 3 and
    node 1 inside W0 is the XOR of its parents 0 and 2.
    Returns (net, grouping_groups, xor_node).
    """
    dag = Dag(4, [(0, 3), (0, 1), (2, 1)])
    net = xor_fixture(dag, 1, (0, 2), seed=seed)
    return net, [(0, 1, 2), (3,)], 1
