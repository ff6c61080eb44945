"""Structure-search engines.

Three engines share the graph and scoring layers: the constraint-based PC
algorithm over any conditional-independence oracle, exact score
maximization by dynamic programming over node subsets (best-sink
recursion), and the combined engine that optimizes the variable DAG and the
group DAG together under the restriction that their topological orders are
compatible.
"""

import logging
from itertools import combinations

import numpy as np

from ._util import ensure_within_budget, iter_bits
from .graph import Cpdag, Dag, _meek_closure, _Pattern
from .scoring import build_score_table

log = logging.getLogger(__name__)

NEG_INF = float("-inf")


def pc_learn(node_count, oracle, max_cond_size=None, diagnostics=None):
    """The PC algorithm over an arbitrary conditional-independence oracle.

    Skeleton phase: edges are removed as soon as some subset of either
    endpoint's current adjacency (tried in increasing size, deterministic
    order) makes the pair independent; the first separating set found is
    recorded. Orientation phase: unshielded triples become v-structures
    when the middle node is outside the recorded separating set, then the
    Meek rules run to a fixpoint. Conflicting orientation demands are
    resolved first-found-wins and counted in ``diagnostics``.

    With a d-separation oracle of a DAG this returns that DAG's CPDAG.
    """
    n = int(node_count)
    adj = [set(range(n)) - {v} for v in range(n)]
    sepset = {}
    level = 0
    while True:
        if max_cond_size is not None and level > max_cond_size:
            break
        enough = any(
            len(adj[x]) - 1 >= level and adj[x]
            for x in range(n)
        )
        if not enough:
            break
        for x in range(n):
            for y in sorted(adj[x]):
                if y < x or y not in adj[x]:
                    continue
                removed = False
                for a, b in ((x, y), (y, x)):
                    cands = sorted(adj[a] - {b})
                    if len(cands) < level:
                        continue
                    for zs in combinations(cands, level):
                        if oracle.query((a,), (b,), zs):
                            adj[x].discard(y)
                            adj[y].discard(x)
                            sepset[(x, y)] = frozenset(zs)
                            removed = True
                            break
                    if removed:
                        break
        level += 1

    arcs = set()
    dir_children = [set() for _ in range(n)]

    def _reaches(a, b):
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            for ch in dir_children[x]:
                if ch == b:
                    return True
                if ch not in seen:
                    seen.add(ch)
                    stack.append(ch)
        return False

    vstructure_conflicts = 0
    for c in range(n):
        for a, b in combinations(sorted(adj[c]), 2):
            if b in adj[a]:
                continue
            sep = sepset.get((min(a, b), max(a, b)), frozenset())
            if c in sep:
                continue
            for u in (a, b):
                # an orientation u -> c that opposes an earlier one or closes
                # a directed cycle is a conflict; first found wins
                if (u, c) not in arcs and ((c, u) in arcs or _reaches(c, u)):
                    vstructure_conflicts += 1
                    continue
                arcs.add((u, c))
                dir_children[u].add(c)
    undirected = set()
    for x in range(n):
        for y in sorted(adj[x]):
            if x < y and (x, y) not in arcs and (y, x) not in arcs:
                undirected.add((x, y))
    pat = _Pattern(Cpdag(n, arcs, undirected))
    meek_conflicts = []
    _meek_closure(pat, strict=False, conflict_log=meek_conflicts)
    if diagnostics is not None:
        diagnostics["vstructure_conflicts"] = vstructure_conflicts
        diagnostics["meek_conflicts"] = len(meek_conflicts)
        diagnostics["max_level"] = level - 1
    if vstructure_conflicts or meek_conflicts:
        log.info(
            "pc_learn resolved %d v-structure and %d rule conflicts first-found",
            vstructure_conflicts,
            len(meek_conflicts),
        )
    return pat.to_cpdag()


def _best_subset_arrays(table):
    """Per node, dense best-parent-set scores over every candidate mask.

    Entry v at mask C (C not containing v) is the best s[v, S] over stored
    sets S inside C; filled by the max-over-subsets sweep.
    """
    n = table.n
    full = 1 << n
    arrays = []
    for v in range(n):
        arr = np.full(full, NEG_INF)
        arr[table.stored_sets(v)] = table.stored_scores(v)
        for u in range(n):
            if u == v:
                continue
            block = arr.reshape(-1, 2, 1 << u)
            block[:, 1, :] = np.maximum(block[:, 1, :], block[:, 0, :])
        arrays.append(arr)
    return arrays


def _walk_parent_mask(arr, rest_mask):
    """Deterministic parent set achieving arr[rest_mask]: greedily drop the
    lowest bit whose removal preserves the value."""
    target = arr[rest_mask]
    cur = rest_mask
    shrunk = True
    while shrunk:
        shrunk = False
        for u in iter_bits(cur):
            if arr[cur ^ (1 << u)] == target:
                cur ^= 1 << u
                shrunk = True
                break
    return cur


def exact_dp_learn(table):
    """Globally optimal DAG for a decomposable score table.

    Best-sink recursion over node subsets: the optimum over a subset T is
    the best choice of sink v in T, scored as the best parent set for v
    inside T minus v plus the optimum over T minus v. Returns the DAG and
    its exact optimal total score. Needs n * 2^n table space; refused when
    that exceeds the memory budget.
    """
    n = table.n
    full = 1 << n
    ensure_within_budget(n * full * 8 + full * 10, "exact search over node subsets")
    bs = _best_subset_arrays(table)
    best = np.full(full, NEG_INF)
    best[0] = 0.0
    sink = np.zeros(full, dtype=np.int8)
    for mask in range(1, full):
        top = NEG_INF
        top_v = -1
        for v in iter_bits(mask):
            rest = mask ^ (1 << v)
            cand = bs[v][rest] + best[rest]
            if cand > top:
                top = cand
                top_v = v
        best[mask] = top
        sink[mask] = top_v
    arcs = set()
    mask = full - 1
    while mask:
        v = int(sink[mask])
        rest = mask ^ (1 << v)
        pmask = _walk_parent_mask(bs[v], rest)
        for p in iter_bits(pmask):
            arcs.add((p, v))
        mask = rest
    return Dag(n, arcs), float(best[full - 1])


class _InnerDp:
    """Best within-group DAG given per-node best scores bss[v, U]."""

    def __init__(self, members, bss_rows):
        self.members = members
        self.bss = bss_rows  # per local node: array over local masks
        t = len(members)
        size = 1 << t
        self.best = np.full(size, NEG_INF)
        self.best[0] = 0.0
        self.sink = np.zeros(size, dtype=np.int8)
        for lm in range(1, size):
            top = NEG_INF
            top_i = -1
            for li in iter_bits(lm):
                rest = lm ^ (1 << li)
                cand = self.bss[li][rest] + self.best[rest]
                if cand > top:
                    top = cand
                    top_i = li
            self.best[lm] = top
            self.sink[lm] = top_i

    @property
    def score(self):
        return float(self.best[-1])

    def peel_order(self):
        """(local index, local predecessor mask) pairs, sinks first."""
        out = []
        lm = len(self.best) - 1
        while lm:
            li = int(self.sink[lm])
            rest = lm ^ (1 << li)
            out.append((li, rest))
            lm = rest
        return out


def _group_bss(table, members, outside_mask):
    """bss rows for one group: entry [local v][local U] is the best stored
    score for v with parents inside U union the outside candidates."""
    rows = []
    t = len(members)
    for li, v in enumerate(members):
        row = np.empty(1 << t)
        for um in range(1 << t):
            if um & (1 << li):
                row[um] = NEG_INF
                continue
            allowed = outside_mask
            for lj in iter_bits(um):
                allowed |= 1 << members[lj]
            row[um] = table.best_over(v, allowed)
        rows.append(row)
    return rows


def combined_group_learn(data, grouping, max_parents, ess, table=None):
    """Jointly optimal (group DAG, variable DAG) with compatible orders.

    Dynamic programming over group subsets: for each subset T and candidate
    sink group W_i, the sink's contribution is the score of the best DAG on
    W_i's members where each member may take parents from within the group
    (respecting the within-group order) and from any node of the other
    groups in T; the best parent set per member is read off the score
    table, capped at ``max_parents``. The group recursion then mirrors the
    best-sink recursion over groups.

    Returns (group_dag, variable_dag, total_score). The group DAG has an
    arc W_j -> W_i exactly when some realized variable arc crosses from
    W_j into W_i.
    """
    k = grouping.k
    if grouping.node_count != data.n_variables:
        raise ValueError("grouping does not partition the dataset's variables")
    for g in grouping.groups:
        if not g:
            raise ValueError("empty group")
    n_max = grouping.max_group_size
    ensure_within_budget(
        (1 << k) * 10 + (1 << (k + n_max)) * 8, "combined search over group subsets"
    )
    if table is None:
        table = build_score_table(data, max_parents, ess)
    node_masks = grouping.node_masks()
    full = 1 << k
    outside = np.zeros(full, dtype=np.int64)
    for m in range(1, full):
        low = m & -m
        outside[m] = outside[m ^ low] | node_masks[low.bit_length() - 1]

    best = np.full(full, NEG_INF)
    best[0] = 0.0
    sink = np.zeros(full, dtype=np.int8)
    for tm in range(1, full):
        top = NEG_INF
        top_i = -1
        for i in iter_bits(tm):
            rest = tm ^ (1 << i)
            members = grouping.groups[i]
            inner = _InnerDp(members, _group_bss(table, members, int(outside[rest])))
            cand = inner.score + best[rest]
            if cand > top:
                top = cand
                top_i = i
        best[tm] = top
        sink[tm] = top_i

    # Reconstruct the variable DAG by re-running the winning inner searches.
    arcs = set()
    tm = full - 1
    while tm:
        i = int(sink[tm])
        rest = tm ^ (1 << i)
        members = grouping.groups[i]
        inner = _InnerDp(members, _group_bss(table, members, int(outside[rest])))
        for li, local_rest in inner.peel_order():
            v = members[li]
            allowed = int(outside[rest])
            for lj in iter_bits(local_rest):
                allowed |= 1 << members[lj]
            pmask, _ = table.best_parent_set_within(v, allowed)
            for p in iter_bits(pmask):
                arcs.add((p, v))
        tm = rest
    variable_dag = Dag(grouping.node_count, arcs)
    group_arcs = set()
    for u, v in arcs:
        gi, gj = grouping.group_of(u), grouping.group_of(v)
        if gi != gj:
            group_arcs.add((gi, gj))
    group_dag = Dag(k, group_arcs)
    return group_dag, variable_dag, float(best[full - 1])
