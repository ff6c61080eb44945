"""Conditional-independence oracles.

Four query routes share one interface: exact d-separation in a DAG, the
same lifted to whole groups, the data-driven G^2 likelihood-ratio test, and
the Cartesian-product encoding that turns each group into a single variable
so that group-level questions become ordinary single-variable ones.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .bayesnet import DiscreteDataset
from .errors import EncodingOverflowError
from .graph import d_separated

DEFAULT_STATE_CAP = 2**20
# Below this many rows per nominal degree of freedom a G^2 query is
# reported untestable instead of tested.
MIN_ROWS_PER_DF = 10


class CiOracle:
    """Answers conditional-independence queries over disjoint node sets.

    ``query(xs, ys, zs)`` returns True when X and Y are judged independent
    given Z. Implementations are symmetric in X and Y and behave as pure
    functions of their construction inputs.
    """

    def query(self, xs, ys, zs):
        raise NotImplementedError

    def reset_counters(self):
        pass


class DSeparationOracle(CiOracle):
    """Exact oracle: independence iff d-separation in a fixed DAG."""

    def __init__(self, dag):
        self.dag = dag
        self.n_queries = 0

    def query(self, xs, ys, zs):
        self.n_queries += 1
        return d_separated(self.dag, xs, ys, zs)

    def reset_counters(self):
        self.n_queries = 0


class GroupOracle(CiOracle):
    """Lift a node-level oracle to group indices.

    A query about group indices (i, j | S) is answered by the base oracle
    on the node sets (W_i, W_j | union of the groups in S); conditioning
    sets are always unions of whole groups.
    """

    def __init__(self, base, grouping):
        self.base = base
        self.grouping = grouping
        self.n_queries = 0

    def query(self, xs, ys, zs):
        self.n_queries += 1
        k = self.grouping.k
        for i in set(xs) | set(ys) | set(zs):
            if not 0 <= i < k:
                raise ValueError(f"group index {i} out of range for k={k}")
        gx = self.grouping.union(xs)
        gy = self.grouping.union(ys)
        gz = self.grouping.union(zs)
        return self.base.query(gx, gy, gz)

    def reset_counters(self):
        self.n_queries = 0
        self.base.reset_counters()


@dataclass
class G2Result:
    untestable: bool
    statistic: float
    dof: int
    p_value: float

    def independent_at(self, alpha):
        """Untestable queries count as independent."""
        return self.untestable or self.p_value > alpha


def _column_codes(data, cols):
    """Mixed-radix code of the given columns, ascending index order,
    first column most significant; also returns the radix product."""
    code = np.zeros(data.n_rows, dtype=np.int64)
    total = 1
    for j in cols:
        code = code * data.cardinalities[j] + data.column(j)
        total *= data.cardinalities[j]
    return code, total


def g2_statistic(data, x, y, zs, min_rows_per_df=MIN_ROWS_PER_DF):
    """G^2 test of x independent of y given Z on a discrete dataset.

    The statistic is 2 * sum O * ln(O / E) over the contingency table of
    (x, y) stratified by the joint configuration of Z, with E the usual
    within-stratum product of margins. Degrees of freedom are
    (r_x - 1)(r_y - 1) per non-empty stratum. Queries with fewer than
    ``min_rows_per_df`` rows per nominal degree of freedom (the full
    product over Z) are flagged untestable and reported independent.
    """
    zs = sorted(set(int(z) for z in zs))
    x, y = int(x), int(y)
    if x == y or x in zs or y in zs:
        raise ValueError("x, y, Z must be distinct")
    m = data.n_rows
    rx = data.cardinalities[x]
    ry = data.cardinalities[y]
    nominal_strata = 1
    for z in zs:
        nominal_strata *= data.cardinalities[z]
    nominal_dof = (rx - 1) * (ry - 1) * nominal_strata
    if nominal_dof <= 0 or m < min_rows_per_df * nominal_dof:
        return G2Result(True, 0.0, 0, 1.0)

    zcode, _ = _column_codes(data, zs)
    # Strata are renumbered densely so the count cube only covers observed Z
    # configurations; empty strata contribute neither statistic nor dof.
    _, zdense = np.unique(zcode, return_inverse=True)
    n_strata = int(zdense.max()) + 1 if m else 0
    joint = (zdense * rx + data.column(x)) * ry + data.column(y)
    counts = np.bincount(joint, minlength=n_strata * rx * ry).reshape(
        n_strata, rx, ry
    )
    row = counts.sum(axis=2, keepdims=True)
    col = counts.sum(axis=1, keepdims=True)
    tot = counts.sum(axis=(1, 2), keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = row * col / tot
        ratio = np.where(counts > 0, counts / expected, 1.0)
        g2 = 2.0 * float(np.sum(counts * np.log(ratio)))
    dof = (rx - 1) * (ry - 1) * n_strata
    if dof <= 0:
        return G2Result(True, 0.0, 0, 1.0)
    p = float(chi2.sf(g2, dof))
    return G2Result(False, g2, dof, p)


def g2_test(data, x, y, zs, alpha, min_rows_per_df=MIN_ROWS_PER_DF):
    """True when x and y look independent given Z at level ``alpha``.

    Untestable queries (too little data for the nominal degrees of
    freedom) also return True; use g2_statistic for the flag.
    """
    res = g2_statistic(data, x, y, zs, min_rows_per_df=min_rows_per_df)
    return res.independent_at(alpha)


class G2Oracle(CiOracle):
    """Data-driven oracle using the G^2 test on singleton X and Y.

    Memoizes answers; tracks how many queries were run and how many were
    untestable (those default to independent). The memo is a plain dict of
    immutable keys, so concurrent readers observe pure-function behavior
    (at worst a duplicated computation).
    """

    def __init__(self, data, alpha=0.05, min_rows_per_df=MIN_ROWS_PER_DF):
        self.data = data
        self.alpha = float(alpha)
        self.min_rows_per_df = min_rows_per_df
        self.n_queries = 0
        self.n_untestable = 0
        self._cache = {}

    def query(self, xs, ys, zs):
        xs, ys, zs = list(xs), list(ys), list(zs)
        if len(xs) != 1 or len(ys) != 1:
            raise ValueError("data-based oracle answers singleton queries only")
        x, y = xs[0], ys[0]
        key = (min(x, y), max(x, y), frozenset(zs))
        hit = self._cache.get(key)
        if hit is not None:
            return hit[0]
        self.n_queries += 1
        res = g2_statistic(
            self.data, x, y, zs, min_rows_per_df=self.min_rows_per_df
        )
        if res.untestable:
            self.n_untestable += 1
        verdict = res.independent_at(self.alpha)
        self._cache[key] = (verdict, res)
        return verdict

    def reset_counters(self):
        self.n_queries = 0
        self.n_untestable = 0


def dsep_oracle(dag):
    """Exact conditional-independence oracle backed by d-separation."""
    return DSeparationOracle(dag)


def group_oracle(base, grouping):
    """Oracle over group indices that forwards to ``base`` on node unions."""
    return GroupOracle(base, grouping)


def encode_group_product(data, grouping, max_states=DEFAULT_STATE_CAP):
    """Collapse each group into one variable over the Cartesian product of
    its members' states.

    The code of a group's variable is the mixed-radix value of the member
    columns in ascending node-index order, first member most significant;
    the encoding is bijective per group. Refuses with a diagnostic when a
    group would need more than ``max_states`` states.
    """
    if data.n_variables != grouping.node_count:
        raise ValueError("grouping does not partition the dataset's variables")
    cols = []
    cards = []
    for i, members in enumerate(grouping.groups):
        states = 1
        for v in members:
            states *= data.cardinalities[v]
            if states > max_states:
                raise EncodingOverflowError(
                    f"group {grouping.names[i]} needs {states}+ states, "
                    f"cap is {max_states}",
                    group=grouping.names[i],
                    states_needed=states,
                    cap=max_states,
                )
        code, _ = _column_codes(data, members)
        cols.append(code)
        cards.append(states)
    rows = np.stack(cols, axis=1) if cols else np.zeros((data.n_rows, 0))
    return DiscreteDataset(grouping.names, cards, rows)


def decode_group_product(encoded, grouping, cardinalities):
    """Invert encode_group_product given the original per-node cardinalities."""
    m = encoded.n_rows
    rows = np.zeros((m, grouping.node_count), dtype=np.int64)
    for i, members in enumerate(grouping.groups):
        code = encoded.column(i).copy()
        for v in reversed(members):
            rows[:, v] = code % cardinalities[v]
            code //= cardinalities[v]
    names = [f"x{v}" for v in range(grouping.node_count)]
    return DiscreteDataset(names, cardinalities, rows)
