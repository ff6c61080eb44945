"""Directed acyclic graphs, CPDAGs, groupings, and the structural operations
on them: d-separation, equivalence-class completion (Meek rules), consistent
extensions, random generation, and structural Hamming distance.

Nodes are dense integer indices 0..n-1 throughout; display names live in the
file layer, not here.
"""

import heapq
from itertools import combinations

import numpy as np

from ._util import iter_bits
from .errors import (
    CycleError,
    NoConsistentExtensionError,
    OrientationConflictError,
)

# Edge status codes used by shd().
ABSENT, UNDIRECTED, FORWARD, BACKWARD = 0, 1, 2, 3


class Dag:
    """An immutable directed acyclic graph over nodes 0..n-1.

    Parameters
    ----------
    node_count : int
        Number of nodes, at least 1.
    arcs : iterable of (int, int)
        Directed arcs (u, v) meaning u -> v. Self-arcs are rejected and the
        arc set must be acyclic.
    """

    __slots__ = ("_n", "_arcs", "_parents", "_children", "_topo")

    def __init__(self, node_count, arcs=()):
        if node_count < 1:
            raise ValueError("node_count must be positive")
        self._n = int(node_count)
        arcset = frozenset((int(u), int(v)) for u, v in arcs)
        parents = [[] for _ in range(self._n)]
        children = [[] for _ in range(self._n)]
        for u, v in sorted(arcset):
            if u == v:
                raise ValueError(f"self-arc {u} -> {v}")
            if not (0 <= u < self._n and 0 <= v < self._n):
                raise ValueError(f"arc ({u}, {v}) out of range for n={self._n}")
            parents[v].append(u)
            children[u].append(v)
        self._arcs = arcset
        self._parents = tuple(tuple(p) for p in parents)
        self._children = tuple(tuple(c) for c in children)
        self._topo = self._topological_order()

    def _topological_order(self):
        indeg = [len(p) for p in self._parents]
        ready = sorted(v for v in range(self._n) if indeg[v] == 0)
        order = []
        heapq.heapify(ready)
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != self._n:
            raise CycleError("arc set contains a directed cycle")
        return tuple(order)

    @property
    def node_count(self):
        return self._n

    @property
    def arcs(self):
        return self._arcs

    def parents(self, v):
        return self._parents[v]

    def children(self, v):
        return self._children[v]

    def has_arc(self, u, v):
        return (u, v) in self._arcs

    def adjacent(self, u, v):
        return (u, v) in self._arcs or (v, u) in self._arcs

    def topological_order(self):
        """A topological order, deterministic (lowest index first among ties)."""
        return self._topo

    def skeleton(self):
        """Unordered adjacent pairs, each as (min, max)."""
        return frozenset((u, v) if u < v else (v, u) for u, v in self._arcs)

    def v_structures(self):
        """Triples (a, c, b) with a -> c <- b, a < b, and a, b nonadjacent."""
        out = set()
        for c in range(self._n):
            for a, b in combinations(self._parents[c], 2):
                if not self.adjacent(a, b):
                    out.add((min(a, b), c, max(a, b)))
        return frozenset(out)

    def with_arc(self, u, v):
        return Dag(self._n, self._arcs | {(u, v)})

    def without_arc(self, u, v):
        return Dag(self._n, self._arcs - {(u, v)})

    def reverse_reachable(self, targets):
        """Bitmask of targets plus all their ancestors."""
        seen = 0
        stack = list(targets)
        for t in targets:
            seen |= 1 << t
        while stack:
            v = stack.pop()
            for p in self._parents[v]:
                bit = 1 << p
                if not seen & bit:
                    seen |= bit
                    stack.append(p)
        return seen

    def __eq__(self, other):
        return (
            isinstance(other, Dag)
            and self._n == other._n
            and self._arcs == other._arcs
        )

    def __hash__(self):
        return hash((self._n, self._arcs))

    def __repr__(self):
        arcs = ", ".join(f"{u}->{v}" for u, v in sorted(self._arcs))
        return f"Dag(n={self._n}, [{arcs}])"


class Cpdag:
    """A partially directed graph: directed arcs plus undirected edges.

    Used both for completed patterns (CPDAGs, one per Markov equivalence
    class) and for the intermediate patterns that Meek-rule application
    operates on. Directed and undirected parts may not overlap on the same
    node pair.
    """

    __slots__ = ("_n", "_directed", "_undirected")

    def __init__(self, node_count, directed=(), undirected=()):
        if node_count < 1:
            raise ValueError("node_count must be positive")
        self._n = int(node_count)
        dirset = frozenset((int(u), int(v)) for u, v in directed)
        undset = frozenset(
            (min(int(u), int(v)), max(int(u), int(v))) for u, v in undirected
        )
        pairs = set()
        for u, v in dirset:
            if u == v:
                raise ValueError(f"self-edge at {u}")
            if not (0 <= u < self._n and 0 <= v < self._n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in pairs:
                raise ValueError(f"both directions present between {u} and {v}")
            pairs.add(key)
        for u, v in undset:
            if u == v:
                raise ValueError(f"self-edge at {u}")
            if not (0 <= u < self._n and 0 <= v < self._n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if (u, v) in pairs:
                raise ValueError(f"edge {u}-{v} both directed and undirected")
        self._directed = dirset
        self._undirected = undset

    @property
    def node_count(self):
        return self._n

    @property
    def directed_edges(self):
        return self._directed

    @property
    def undirected_edges(self):
        return self._undirected

    @classmethod
    def from_dag(cls, dag):
        """The fully directed pattern with the same arcs as ``dag``."""
        return cls(dag.node_count, dag.arcs, ())

    def adjacent(self, u, v):
        key = (min(u, v), max(u, v))
        return key in self._undirected or (u, v) in self._directed or (v, u) in self._directed

    def skeleton(self):
        dir_pairs = frozenset((min(u, v), max(u, v)) for u, v in self._directed)
        return dir_pairs | self._undirected

    def edge_status(self, u, v):
        """Status of the ordered pair (u, v): ABSENT, UNDIRECTED, FORWARD, BACKWARD."""
        if (min(u, v), max(u, v)) in self._undirected:
            return UNDIRECTED
        if (u, v) in self._directed:
            return FORWARD
        if (v, u) in self._directed:
            return BACKWARD
        return ABSENT

    def edge_count(self):
        return len(self._directed) + len(self._undirected)

    def __eq__(self, other):
        return (
            isinstance(other, Cpdag)
            and self._n == other._n
            and self._directed == other._directed
            and self._undirected == other._undirected
        )

    def __hash__(self):
        return hash((self._n, self._directed, self._undirected))

    def __repr__(self):
        parts = [f"{u}->{v}" for u, v in sorted(self._directed)]
        parts += [f"{u}-{v}" for u, v in sorted(self._undirected)]
        return f"Cpdag(n={self._n}, [{', '.join(parts)}])"


class Grouping:
    """A partition of the nodes 0..n-1 into k non-empty groups.

    Parameters
    ----------
    groups : iterable of iterables of int
        The groups; must be disjoint, non-empty, and jointly cover 0..n-1.
    names : sequence of str, optional
        Display names, one per group.
    """

    __slots__ = ("_groups", "_names", "_n", "_group_of", "_masks")

    def __init__(self, groups, names=None):
        gs = tuple(tuple(sorted(int(x) for x in g)) for g in groups)
        if not gs:
            raise ValueError("grouping must contain at least one group")
        seen = {}
        for i, g in enumerate(gs):
            if not g:
                raise ValueError(f"group {i} is empty")
            for x in g:
                if x in seen:
                    raise ValueError(f"node {x} appears in groups {seen[x]} and {i}")
                seen[x] = i
        n = len(seen)
        if set(seen) != set(range(n)):
            raise ValueError("groups must cover exactly the nodes 0..n-1")
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != len(gs):
                raise ValueError("one name per group required")
        self._groups = gs
        self._names = names
        self._n = n
        self._group_of = tuple(seen[x] for x in range(n))
        self._masks = tuple(sum(1 << x for x in g) for g in gs)

    @property
    def groups(self):
        return self._groups

    @property
    def names(self):
        if self._names is not None:
            return self._names
        return tuple(f"W{i}" for i in range(len(self._groups)))

    @property
    def k(self):
        return len(self._groups)

    @property
    def node_count(self):
        return self._n

    @property
    def max_group_size(self):
        return max(len(g) for g in self._groups)

    def group_of(self, node):
        return self._group_of[node]

    def node_masks(self):
        """Per-group bitmask over nodes."""
        return self._masks

    def union(self, group_indices):
        """Sorted tuple of the nodes in the given groups."""
        out = []
        for i in group_indices:
            out.extend(self._groups[i])
        return tuple(sorted(out))

    @classmethod
    def singletons(cls, n, names=None):
        return cls([(i,) for i in range(n)], names=names)

    @classmethod
    def chunked(cls, order, group_size):
        """Chunk a node permutation into consecutive groups of ``group_size``.

        The last group is smaller when the node count is not divisible.
        """
        order = list(order)
        groups = [order[i : i + group_size] for i in range(0, len(order), group_size)]
        return cls(groups)

    def is_all_singletons(self):
        return all(len(g) == 1 for g in self._groups)

    def __eq__(self, other):
        return isinstance(other, Grouping) and self._groups == other._groups

    def __hash__(self):
        return hash(self._groups)

    def __repr__(self):
        return f"Grouping({list(map(list, self._groups))})"


# ---------------------------------------------------------------------------
# d-separation


def _ancestral_mask(dag, z_mask):
    """Bitmask of the nodes in Z together with all ancestors of Z."""
    seen = z_mask
    stack = list(iter_bits(z_mask))
    while stack:
        v = stack.pop()
        for p in dag.parents(v):
            bit = 1 << p
            if not seen & bit:
                seen |= bit
                stack.append(p)
    return seen


def reachable_mask_lists(parents, children, sources, z_mask, anc_z_mask=None):
    """Bitmask of nodes reachable from ``sources`` along trails active
    given Z, over parent/child adjacency sequences.

    Reachability over (node, arrival direction) states: a trail may pass
    through a non-collider only when the node is outside Z, and through a
    collider only when the node is in Z or has a descendant in Z. The
    returned mask excludes Z and includes the sources themselves.
    """
    if anc_z_mask is None:
        anc_z_mask = z_mask
        stack = list(iter_bits(z_mask))
        while stack:
            v = stack.pop()
            for p in parents[v]:
                bit = 1 << p
                if not anc_z_mask & bit:
                    anc_z_mask |= bit
                    stack.append(p)
    up = 0  # visited arriving from a child
    down = 0  # visited arriving from a parent
    reached = 0
    stack = [(s, True) for s in sources]
    while stack:
        v, from_child = stack.pop()
        bit = 1 << v
        if from_child:
            if up & bit:
                continue
            up |= bit
        else:
            if down & bit:
                continue
            down |= bit
        blocked = z_mask & bit
        if not blocked:
            reached |= bit
        if from_child:
            if not blocked:
                for p in parents[v]:
                    if not up & (1 << p):
                        stack.append((p, True))
                for c in children[v]:
                    if not down & (1 << c):
                        stack.append((c, False))
        else:
            if not blocked:
                for c in children[v]:
                    if not down & (1 << c):
                        stack.append((c, False))
            if anc_z_mask & bit:
                for p in parents[v]:
                    if not up & (1 << p):
                        stack.append((p, True))
    return reached


def reachable_mask(dag, sources, z_mask, anc_z_mask=None):
    """reachable_mask_lists over a Dag's adjacency."""
    if anc_z_mask is None:
        anc_z_mask = _ancestral_mask(dag, z_mask)
    return reachable_mask_lists(
        dag._parents, dag._children, sources, z_mask, anc_z_mask
    )


def d_separated(dag, xs, ys, zs):
    """Decide whether node sets X and Y are d-separated by Z in ``dag``.

    Set semantics: true iff every pair (x, y) with x in X, y in Y is
    d-separated given Z. Computed exactly by reachability over active
    trails, one search from the whole set X.

    Parameters
    ----------
    dag : Dag
    xs, ys : non-empty collections of node indices
    zs : collection of node indices, may be empty

    Raises
    ------
    ValueError
        If X or Y is empty, an index is out of range, or the three sets
        overlap.
    """
    xs = frozenset(int(x) for x in xs)
    ys = frozenset(int(y) for y in ys)
    zs = frozenset(int(z) for z in zs)
    if not xs or not ys:
        raise ValueError("X and Y must be non-empty")
    n = dag.node_count
    for v in xs | ys | zs:
        if not 0 <= v < n:
            raise ValueError(f"node {v} out of range for n={n}")
    if xs & ys or xs & zs or ys & zs:
        raise ValueError("X, Y, Z must be pairwise disjoint")
    z_mask = sum(1 << z for z in zs)
    y_mask = sum(1 << y for y in ys)
    reached = reachable_mask(dag, sorted(xs), z_mask)
    return reached & y_mask == 0


# ---------------------------------------------------------------------------
# Meek rules and equivalence-class machinery


class _Pattern:
    """Mutable working copy of a partially directed graph."""

    def __init__(self, cpdag):
        self.n = cpdag.node_count
        self.dir = set(cpdag.directed_edges)
        self.und = set(cpdag.undirected_edges)
        self.frozen = set()  # undirected edges exempt from further rules
        self.adj = [set() for _ in range(self.n)]
        self.dir_children = [set() for _ in range(self.n)]
        for u, v in self.dir:
            self.adj[u].add(v)
            self.adj[v].add(u)
            self.dir_children[u].add(v)
        for u, v in self.und:
            self.adj[u].add(v)
            self.adj[v].add(u)

    def adjacent(self, u, v):
        return v in self.adj[u]

    def orient(self, u, v):
        self.und.discard((min(u, v), max(u, v)))
        self.dir.add((u, v))
        self.dir_children[u].add(v)

    def directed_reaches(self, a, b):
        """Whether a directed path a -> ... -> b exists among oriented arcs."""
        if a == b:
            return True
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            for c in self.dir_children[x]:
                if c == b:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def to_cpdag(self):
        return Cpdag(self.n, self.dir, self.und)


def _meek_demands(pat):
    """All orientations compelled by rules R1-R4 in the current pattern.

    Returns a list of (u, v) demands in deterministic scan order; an edge
    may be demanded in both directions, which the caller resolves.
    """
    demands = []
    dirset = pat.dir
    for a, b in sorted(pat.und - pat.frozen):
        for u, v in ((a, b), (b, a)):
            # R1: w -> u, w and v nonadjacent  =>  u -> v
            fired = False
            for w in sorted(pat.adj[u]):
                if (w, u) in dirset and not pat.adjacent(w, v) and w != v:
                    demands.append((u, v))
                    fired = True
                    break
            if fired:
                continue
            # R2: u -> s -> v  =>  u -> v
            for s in sorted(pat.adj[u]):
                if (u, s) in dirset and (s, v) in dirset:
                    demands.append((u, v))
                    fired = True
                    break
            if fired:
                continue
            # R3: u - s -> v and u - t -> v with s, t nonadjacent  =>  u -> v
            spouses = [
                s
                for s in sorted(pat.adj[u])
                if (min(u, s), max(u, s)) in pat.und and (s, v) in dirset
            ]
            for s, t in combinations(spouses, 2):
                if not pat.adjacent(s, t):
                    demands.append((u, v))
                    fired = True
                    break
            if fired:
                continue
            # R4: u - s, s -> t, t -> v, s and v nonadjacent, u and t adjacent
            for s in sorted(pat.adj[u]):
                if (min(u, s), max(u, s)) not in pat.und or pat.adjacent(s, v):
                    continue
                for t in sorted(pat.adj[u]):
                    if (s, t) in dirset and (t, v) in dirset:
                        demands.append((u, v))
                        fired = True
                        break
                if fired:
                    break
    return demands


def _meek_closure(pat, strict, conflict_log=None):
    """Apply R1-R4 to a fixpoint, one batch of demands per pass.

    In strict mode a pass demanding both directions of one edge raises
    OrientationConflictError; otherwise the first demand in scan order wins
    and the conflict is counted. Lenient mode also refuses an orientation
    that would close a directed cycle (possible only when the input pattern
    itself is inconsistent, e.g. from noisy tests).
    """
    while True:
        demands = _meek_demands(pat)
        if not demands:
            return pat
        chosen = {}
        for u, v in demands:
            key = (min(u, v), max(u, v))
            prev = chosen.get(key)
            if prev is None:
                chosen[key] = (u, v)
            elif prev != (u, v):
                if strict:
                    raise OrientationConflictError(
                        f"rules compel both directions between {u} and {v}"
                    )
                if conflict_log is not None:
                    conflict_log.append(key)
        for u, v in chosen.values():
            if not strict and pat.directed_reaches(v, u):
                # orienting u -> v would close a directed cycle; keep the
                # edge undirected and exempt it from further rule scans
                if conflict_log is not None:
                    conflict_log.append((min(u, v), max(u, v)))
                pat.frozen.add((min(u, v), max(u, v)))
                continue
            pat.orient(u, v)


def apply_meek_rules(pdag):
    """Close a partially directed graph under Meek rules R1-R4.

    Returns a new Cpdag at the fixpoint: no undirected edge satisfying any
    rule's antecedent remains.

    Raises
    ------
    OrientationConflictError
        If some pass compels both directions of one edge, which signals an
        inconsistent input pattern.
    """
    pat = _Pattern(pdag)
    _meek_closure(pat, strict=True)
    return pat.to_cpdag()


def cpdag_of(dag):
    """The completed pattern (CPDAG) of the Markov equivalence class of ``dag``.

    Keeps the skeleton, directs the v-structure arcs, and closes under the
    Meek rules; every other edge is left undirected.
    """
    directed = set()
    for a, c, b in dag.v_structures():
        directed.add((a, c))
        directed.add((b, c))
    undirected = set()
    for u, v in dag.skeleton():
        if (u, v) not in directed and (v, u) not in directed:
            undirected.add((u, v))
    pat = _Pattern(Cpdag(dag.node_count, directed, undirected))
    _meek_closure(pat, strict=True)
    return pat.to_cpdag()


def markov_equivalent(d1, d2):
    """True iff the two DAGs have the same skeleton and the same v-structures."""
    if d1.node_count != d2.node_count:
        raise ValueError("node counts differ")
    return d1.skeleton() == d2.skeleton() and d1.v_structures() == d2.v_structures()


def consistent_extension(cpdag):
    """Orient all undirected edges of ``cpdag`` into a DAG in its class.

    Repeatedly removes a sink-compatible node (no outgoing directed arcs,
    every undirected neighbor adjacent to all of the node's other
    neighbors), always the lowest-indexed eligible one, orienting its
    undirected edges inward. For a proper CPDAG the result has the same
    skeleton and v-structures, and cpdag_of(result) round-trips.

    Raises
    ------
    NoConsistentExtensionError
        If the pattern admits no consistent DAG extension.
    """
    n = cpdag.node_count
    dir_out = [set() for _ in range(n)]
    und_nbr = [set() for _ in range(n)]
    adj = [set() for _ in range(n)]
    for u, v in cpdag.directed_edges:
        dir_out[u].add(v)
        adj[u].add(v)
        adj[v].add(u)
    for u, v in cpdag.undirected_edges:
        und_nbr[u].add(v)
        und_nbr[v].add(u)
        adj[u].add(v)
        adj[v].add(u)
    arcs = set(cpdag.directed_edges)
    alive = set(range(n))
    while alive:
        for x in sorted(alive):
            if dir_out[x]:
                continue
            ok = all(
                adj[y] >= (adj[x] & alive) - {y} for y in und_nbr[x]
            )
            if not ok:
                continue
            for y in und_nbr[x]:
                arcs.add((y, x))
            for y in adj[x] & alive:
                dir_out[y].discard(x)
                und_nbr[y].discard(x)
                adj[y].discard(x)
            alive.discard(x)
            break
        else:
            raise NoConsistentExtensionError(
                "pattern admits no consistent DAG extension"
            )
    return Dag(n, arcs)


def random_dag(n, p, seed):
    """Random DAG with nodes ordered 0..n-1; arc i -> j (i < j) kept with
    probability ``p`` independently. Deterministic for a fixed seed."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    arcs = [
        (i, j) for i in range(n) for j in range(i + 1, n) if draws[i, j] < p
    ]
    return Dag(n, arcs)


def shd(a, b):
    """Structural Hamming distance between two patterns.

    Each unordered node pair has one of four statuses (absent, undirected,
    directed one way, directed the other); any status mismatch costs 1.
    """
    if a.node_count != b.node_count:
        raise ValueError("node counts differ")
    n = a.node_count
    dist = 0
    for u in range(n):
        for v in range(u + 1, n):
            if a.edge_status(u, v) != b.edge_status(u, v):
                dist += 1
    return dist
