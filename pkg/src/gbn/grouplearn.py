"""Learning group DAGs over known variable groups.

Three learners: direct (groups collapsed to product variables), via a
variable DAG (learn on variables, then read group separations off the
learned graph), and combined (joint score optimization, in search). This
module also houses the groupwise-faithfulness checker, the v-structure
group-cause extraction, and the layered construction showing that strong
group causality cannot be read off group-level independencies.
"""

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import NoConsistentExtensionError
from .graph import Cpdag, Dag, Grouping, consistent_extension, cpdag_of
from .independence import (
    DSeparationOracle,
    G2Oracle,
    GroupOracle,
    encode_group_product,
)
from .scoring import build_score_table
from .search import combined_group_learn, exact_dp_learn, pc_learn

MAX_CHECKER_GROUPS = 16


@dataclass
class GroupLearnResult:
    """Outcome of one group-structure learning run."""

    group_cpdag: Cpdag
    variable_cpdag: Optional[Cpdag]
    method: str
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Batched group-level d-separation tables
#
# One trail search decides d-connection of a source group against every
# other group at once, and the searches for all 2^k conditioning unions run
# together: each conditioning mask occupies one bit lane of a packed uint64
# word, so the per-(node, direction) state is a small word vector and the
# whole table costs a few dozen vectorized sweeps.

_WORD = 64


def _pack_mask_bits(bits):
    """Pack a boolean vector into uint64 words, lane b of word w = bit 64w+b."""
    pad = (-len(bits)) % _WORD
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=bool)])
    powers = np.uint64(1) << np.arange(_WORD, dtype=np.uint64)
    return bits.astype(np.uint64).reshape(-1, _WORD) @ powers


def _unpack_words(words, size):
    lanes = (
        (words[..., None] >> np.arange(_WORD, dtype=np.uint64)) & np.uint64(1)
    ).astype(bool)
    return lanes.reshape(*words.shape[:-1], -1)[..., :size]


def _mask_lane_table(k):
    """Per group g, the packed lanes of masks containing g: shape (k, words)."""
    size = 1 << k
    ms = np.arange(size)
    return np.stack([_pack_mask_bits(((ms >> g) & 1).astype(bool)) for g in range(k)])


def _dsep_table_core(n, children, grouping):
    """group_dsep_table over raw child adjacency (any sequence of iterables)."""
    k = grouping.k
    size = 1 << k
    words = (size + _WORD - 1) // _WORD
    group_of = [grouping.group_of(v) for v in range(n)]
    lanes = _mask_lane_table(k)

    in_z = lanes[group_of]  # (n, words): lane set iff the node's group is conditioned
    not_z = ~in_z
    # desc_z[v]: lanes where v is in Z or has a descendant in Z. Sweeping in
    # descending index order converges in one pass for order-respecting DAGs
    # and the loop repeats until stable for any other labeling.
    desc_z = in_z.copy()
    changed = True
    while changed:
        changed = False
        for v in reversed(range(n)):
            acc = desc_z[v].copy()
            for c in children[v]:
                acc |= desc_z[c]
            if not np.array_equal(acc, desc_z[v]):
                desc_z[v] = acc
                changed = True

    arcs = [(u, v) for u in range(n) for v in children[u]]
    up = np.zeros((k, n, words), dtype=np.uint64)
    for i, members in enumerate(grouping.groups):
        for v in members:
            up[i, v] = ~np.uint64(0)
    down = np.zeros_like(up)
    while True:
        relay_up = (up & not_z) | (down & desc_z)
        relay_dn = (up | down) & not_z
        new_up = up.copy()
        new_dn = down.copy()
        for u, v in arcs:
            new_up[:, u] |= relay_up[:, v]
            new_dn[:, v] |= relay_dn[:, u]
        if np.array_equal(new_up, up) and np.array_equal(new_dn, down):
            break
        up, down = new_up, new_dn

    reached = (up | down) & not_z  # (k, n, words)
    table = np.zeros((k, size), dtype=np.int64)
    for j, members in enumerate(grouping.groups):
        orred = reached[:, members[0], :].copy()
        for v in members[1:]:
            orred |= reached[:, v, :]
        table |= _unpack_words(orred, size).astype(np.int64) << j
    return table


def group_dsep_table(dag, grouping):
    """Dependence table of ``dag`` over whole groups, for every source group
    and every conditioning union of groups.

    Returns an int64 array T of shape (k, 2^k). Bit j of T[i, m] is set iff
    some member of W_j is reachable from the members of W_i along a trail
    that is active given the union of the groups in mask m, i.e. iff W_i
    and W_j are d-connected given that union. Entries are meaningful for
    masks m with bit i clear and for j outside m and distinct from i.
    """
    if dag.node_count != grouping.node_count:
        raise ValueError("grouping does not partition the DAG's nodes")
    children = [dag.children(v) for v in range(dag.node_count)]
    return _dsep_table_core(dag.node_count, children, grouping)


class _TableGroupOracle:
    """Group oracle answering from a precomputed dependence table.

    Same answers as GroupOracle over a d-separation oracle, but each query
    is one bit probe; used where PC would otherwise re-run thousands of
    trail searches against the same DAG.
    """

    def __init__(self, table, k):
        self.table = table
        self.k = k
        self.n_queries = 0

    def query(self, xs, ys, zs):
        self.n_queries += 1
        (i,) = xs
        (j,) = ys
        mask = 0
        for g in zs:
            mask |= 1 << g
        return (int(self.table[i, mask]) >> j) & 1 == 0

    def reset_counters(self):
        self.n_queries = 0


def _valid_bits(k):
    """valid[i, m]: group bits whose table entries are meaningful."""
    size = 1 << k
    masks = np.arange(size, dtype=np.int64)
    full = size - 1
    valid = np.empty((k, size), dtype=np.int64)
    for i in range(k):
        valid[i] = full & ~masks & ~(1 << i)
        valid[i, (masks >> i) & 1 == 1] = 0
    return valid


def group_tables_equal(t1, t2, k):
    """Whether two group dependence tables agree on all meaningful entries."""
    return not np.any((t1 ^ t2) & _valid_bits(k))


def groupwise_markov_equivalent(variable_dag, grouping, group_dag):
    """True iff ``variable_dag`` entails exactly the same independencies over
    whole groups as ``group_dag`` does over its nodes."""
    k = grouping.k
    if group_dag.node_count != k:
        raise ValueError("group DAG node count must equal the number of groups")
    t_var = group_dsep_table(variable_dag, grouping)
    t_grp = group_dsep_table(group_dag, Grouping.singletons(k))
    return group_tables_equal(t_var, t_grp, k)


# ---------------------------------------------------------------------------
# Groupwise faithfulness checking


def check_groupwise_faithfulness(variable_dag, grouping):
    """Decide whether a variable DAG's group-level independencies are exactly
    those of some group DAG.

    Runs PC over the exact group oracle of the variable DAG, extends the
    learned pattern to a DAG, and compares every query (W_i, W_j | union of
    other groups) between the variable DAG and that extension. If the
    learned pattern has no consistent extension, no group DAG can match and
    the answer is already negative.

    Returns (faithful, learned group Cpdag).
    """
    k = grouping.k
    if k > MAX_CHECKER_GROUPS:
        raise ValueError(f"checker supports at most {MAX_CHECKER_GROUPS} groups")
    t_var = group_dsep_table(variable_dag, grouping)
    learned = pc_learn(k, _TableGroupOracle(t_var, k))
    try:
        ext = consistent_extension(learned)
    except NoConsistentExtensionError:
        return False, learned
    t_grp = group_dsep_table(ext, Grouping.singletons(k))
    return group_tables_equal(t_var, t_grp, k), learned


# ---------------------------------------------------------------------------
# The three learners


def find_group_dag_direct(
    data,
    grouping,
    backend="constraint",
    alpha=0.05,
    ess=1.0,
    max_parents=3,
    max_states=None,
):
    """Collapse each group to one product variable and learn over those.

    backend "constraint": PC with the G^2 oracle on the encoded variables.
    backend "score": exact dynamic-programming search over BDeu scores of
    the encoded variables. Groups whose state product exceeds the cap make
    the encoding refuse, mirroring the memory failures this approach hits.
    """
    t0 = time.perf_counter()
    kwargs = {} if max_states is None else {"max_states": max_states}
    encoded = encode_group_product(data, grouping, **kwargs)
    k = grouping.k
    diagnostics = {"backend": backend}
    if backend == "constraint":
        oracle = G2Oracle(encoded, alpha=alpha)
        group_cpdag = pc_learn(k, oracle, diagnostics=diagnostics)
        diagnostics["ci_queries"] = oracle.n_queries
        diagnostics["untestable_queries"] = oracle.n_untestable
        method = "direct-cb"
    elif backend == "score":
        table = build_score_table(encoded, min(max_parents, k - 1), ess)
        dag, score = exact_dp_learn(table)
        group_cpdag = cpdag_of(dag)
        diagnostics["total_score"] = score
        method = "direct-sb"
    else:
        raise ValueError(f"unknown backend {backend!r}")
    diagnostics["runtime_s"] = time.perf_counter() - t0
    return GroupLearnResult(group_cpdag, None, method, diagnostics)


def _exact_group_oracle(variable_dag, grouping):
    """Exact group-level oracle; table-backed when the group count permits."""
    if grouping.k <= MAX_CHECKER_GROUPS:
        return _TableGroupOracle(group_dsep_table(variable_dag, grouping), grouping.k)
    return GroupOracle(DSeparationOracle(variable_dag), grouping)


def find_group_dag_direct_oracle(variable_dag, grouping):
    """Oracle-limit direct learner: PC over the exact group oracle.

    At infinite sample size the product encoding answers exactly the group
    queries of the data-generating DAG, so this is the constraint-based
    direct learner's limit behavior.
    """
    t0 = time.perf_counter()
    oracle = _exact_group_oracle(variable_dag, grouping)
    diagnostics = {"backend": "oracle"}
    group_cpdag = pc_learn(grouping.k, oracle, diagnostics=diagnostics)
    diagnostics["ci_queries"] = oracle.n_queries
    diagnostics["runtime_s"] = time.perf_counter() - t0
    return GroupLearnResult(group_cpdag, None, "direct-cb-oracle", diagnostics)


def _group_stage(variable_dag, grouping, diagnostics):
    goracle = _exact_group_oracle(variable_dag, grouping)
    group_cpdag = pc_learn(grouping.k, goracle, diagnostics=diagnostics)
    diagnostics["group_ci_queries"] = goracle.n_queries
    return group_cpdag


def find_group_dag_via_variable(
    data,
    grouping,
    backend="constraint",
    alpha=0.05,
    ess=1.0,
    max_parents=3,
):
    """Learn a variable DAG first, then learn the group structure with PC
    using d-separation in the learned variable DAG as the oracle.

    The constraint backend learns a pattern with PC and takes a consistent
    extension for the second stage (group-level separation is invariant
    across the class, so any member serves); a pattern with no extension is
    a hard error. The score backend's exact search already yields a DAG.
    """
    t0 = time.perf_counter()
    diagnostics = {"backend": backend}
    if backend == "constraint":
        oracle = G2Oracle(data, alpha=alpha)
        variable_cpdag = pc_learn(data.n_variables, oracle, diagnostics=diagnostics)
        diagnostics["ci_queries"] = oracle.n_queries
        diagnostics["untestable_queries"] = oracle.n_untestable
        variable_dag = consistent_extension(variable_cpdag)
        method = "via-cb"
    elif backend == "score":
        table = build_score_table(data, max_parents, ess)
        variable_dag, score = exact_dp_learn(table)
        variable_cpdag = cpdag_of(variable_dag)
        diagnostics["total_score"] = score
        method = "via-sb"
    else:
        raise ValueError(f"unknown backend {backend!r}")
    group_cpdag = _group_stage(variable_dag, grouping, diagnostics)
    diagnostics["runtime_s"] = time.perf_counter() - t0
    return GroupLearnResult(group_cpdag, variable_cpdag, method, diagnostics)


def find_group_dag_via_variable_oracle(variable_dag, grouping):
    """Oracle-limit via-variable learner: the first stage recovers the true
    class exactly (PC over the exact node oracle), the second stage runs on
    an extension of that class."""
    t0 = time.perf_counter()
    diagnostics = {"backend": "oracle"}
    oracle = DSeparationOracle(variable_dag)
    variable_cpdag = pc_learn(variable_dag.node_count, oracle, diagnostics=diagnostics)
    diagnostics["ci_queries"] = oracle.n_queries
    ext = consistent_extension(variable_cpdag)
    group_cpdag = _group_stage(ext, grouping, diagnostics)
    diagnostics["runtime_s"] = time.perf_counter() - t0
    return GroupLearnResult(group_cpdag, variable_cpdag, "via-cb-oracle", diagnostics)


def find_group_dag_combined(data, grouping, ess=1.0, max_parents=3):
    """Combined learner: jointly optimal group and variable DAGs under
    compatible topological orders, reported as CPDAGs."""
    t0 = time.perf_counter()
    group_dag, variable_dag, score = combined_group_learn(
        data, grouping, max_parents, ess
    )
    diagnostics = {"backend": "score", "total_score": score}
    diagnostics["runtime_s"] = time.perf_counter() - t0
    return GroupLearnResult(
        cpdag_of(group_dag), cpdag_of(variable_dag), "combined", diagnostics
    )


METHOD_NAMES = ("direct-cb", "direct-sb", "via-cb", "via-sb", "combined")


def learn_group_dag(method, data, grouping, alpha=0.05, ess=1.0, max_parents=3):
    """Dispatch one of the five named methods."""
    if method == "direct-cb":
        return find_group_dag_direct(data, grouping, "constraint", alpha=alpha)
    if method == "direct-sb":
        return find_group_dag_direct(
            data, grouping, "score", ess=ess, max_parents=max_parents
        )
    if method == "via-cb":
        return find_group_dag_via_variable(data, grouping, "constraint", alpha=alpha)
    if method == "via-sb":
        return find_group_dag_via_variable(
            data, grouping, "score", ess=ess, max_parents=max_parents
        )
    if method == "combined":
        return find_group_dag_combined(data, grouping, ess=ess, max_parents=max_parents)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Causal statements


def group_causes_from_vstructures(group_cpdag):
    """Cause pairs certified by v-structures in a group CPDAG.

    Every v-structure W_i -> W_j <- W_k contributes (W_i, W_j) and
    (W_k, W_j), and nothing else: arcs directed only by the orientation
    rules do not certify group-level causation.
    """
    parents_of = {}
    for u, v in group_cpdag.directed_edges:
        parents_of.setdefault(v, []).append(u)
    out = set()
    for child, parents in parents_of.items():
        for a, b in combinations(sorted(parents), 2):
            if not group_cpdag.adjacent(a, b):
                out.add((a, child))
                out.add((b, child))
    return out


def strong_causality_counterexample(group_dag, grouping, path):
    """Variable DAG matching ``group_dag``'s group independencies while
    reversing one directed group path at the variable level.

    Each group contributes two designated members: the first mirrors every
    group arc, the second carries the chosen path backwards. The result
    entails exactly the group-level independencies of ``group_dag`` yet
    contains a directed variable path from the path's end group back to its
    start group, so no arc of a group DAG can certify strong causality.

    Parameters
    ----------
    group_dag : Dag over the k groups
    grouping : Grouping with every group of size at least 2
    path : sequence of group indices forming a directed path in group_dag
    """
    k = grouping.k
    if group_dag.node_count != k:
        raise ValueError("group DAG node count must equal the number of groups")
    if any(len(g) < 2 for g in grouping.groups):
        raise ValueError("every group must have at least 2 members")
    path = [int(i) for i in path]
    if len(path) < 2:
        raise ValueError("path must visit at least two groups")
    for a, b in zip(path, path[1:]):
        if not group_dag.has_arc(a, b):
            raise ValueError(f"({a}, {b}) is not an arc of the group DAG")
    first = [g[0] for g in grouping.groups]
    second = [g[1] for g in grouping.groups]
    arcs = {(first[i], first[j]) for i, j in group_dag.arcs}
    for a, b in zip(path, path[1:]):
        arcs.add((second[b], second[a]))
    return Dag(grouping.node_count, arcs)
