"""BDeu local scores and the subset-maximum tables consumed by exact search.

Scores are log marginal likelihoods under a Dirichlet prior whose
pseudo-counts split one equivalent sample size uniformly over the joint
(parent configuration, state) space, which is what makes Markov-equivalent
structures score identically.
"""

import hashlib
import json
from itertools import combinations

import numpy as np
from scipy.special import gammaln

from ._util import ensure_within_budget, iter_bits

# Switch from dense bincount to sort-based counting when the contingency
# space gets much larger than the sample.
_DENSE_COUNT_FACTOR = 4


def bdeu_local(data, v, parents, ess):
    """BDeu log marginal likelihood of node ``v`` with parent set ``parents``.

    With q the number of parent configurations, r the cardinality of v,
    alpha_j = ess/q and alpha_jk = ess/(q*r), the score is the sum over
    parent configurations j of

        lnG(alpha_j) - lnG(alpha_j + N_j)
        + sum_k [ lnG(alpha_jk + N_jk) - lnG(alpha_jk) ]

    Unobserved configurations and states contribute zero, so only observed
    counts are touched; an empty dataset scores 0 for any (v, S).
    """
    if ess <= 0:
        raise ValueError("ess must be positive")
    parents = sorted(set(int(p) for p in parents))
    v = int(v)
    if v in parents:
        raise ValueError("v may not be its own parent")
    m = data.n_rows
    if m == 0:
        return 0.0
    r = data.cardinalities[v]
    q = 1
    for p in parents:
        q *= data.cardinalities[p]
    alpha_j = ess / q
    alpha_jk = ess / (q * r)

    cfg = np.zeros(m, dtype=np.int64)
    for p in parents:
        cfg = cfg * data.cardinalities[p] + data.column(p)
    joint = cfg * r + data.column(v)
    if q * r <= max(_DENSE_COUNT_FACTOR * m, 1024):
        cells = np.bincount(joint, minlength=q * r)
        nj = cells.reshape(q, r).sum(axis=1)
        cells = cells[cells > 0]
        nj = nj[nj > 0]
    else:
        _, cells = np.unique(joint, return_counts=True)
        _, nj = np.unique(cfg, return_counts=True)
    score = len(nj) * gammaln(alpha_j) - gammaln(alpha_j + nj).sum()
    score += gammaln(alpha_jk + cells).sum() - len(cells) * gammaln(alpha_jk)
    return float(score)


class ScoreTable:
    """Local scores s[v, S] and best-subset scores bs[v, S] for |S| <= c.

    Parent sets are bitmasks. bs[v, S] is the maximum of s[v, U] over all
    U that are subsets of S, so it is monotone under set inclusion and at
    least s[v, S].
    """

    def __init__(self, n, max_parents, ess, masks, scores, best, data_digest=None):
        self.n = n
        self.max_parents = max_parents
        self.ess = ess
        self._masks = masks  # per node: int64 array of parent-set bitmasks
        self._scores = scores  # per node: float64 array aligned with _masks
        self._best = best  # per node: float64 array aligned with _masks
        self._index = [
            {int(mk): pos for pos, mk in enumerate(masks[v])} for v in range(n)
        ]
        self.data_digest = data_digest

    def local_score(self, v, parents):
        mask = 0
        for p in parents:
            mask |= 1 << p
        return float(self._scores[v][self._index[v][mask]])

    def best_subset_score(self, v, parents):
        mask = 0
        for p in parents:
            mask |= 1 << p
        return float(self._best[v][self._index[v][mask]])

    def stored_sets(self, v):
        return self._masks[v]

    def stored_scores(self, v):
        return self._scores[v]

    def best_over(self, v, allowed_mask):
        """Max of s[v, S] over stored sets S contained in ``allowed_mask``."""
        sel = (self._masks[v] & ~allowed_mask) == 0
        return float(self._scores[v][sel].max())

    def best_parent_set_within(self, v, allowed_mask):
        """Argmax parent set within ``allowed_mask``; ties break to the
        lexicographically smallest sorted node tuple. Returns (mask, score)."""
        sel = (self._masks[v] & ~allowed_mask) == 0
        masks = self._masks[v][sel]
        scores = self._scores[v][sel]
        top = scores.max()
        cands = masks[scores == top]
        best = min(tuple(iter_bits(int(mk))) for mk in cands)
        mask = 0
        for b in best:
            mask |= 1 << b
        return mask, float(top)

    def save(self, path):
        payload = {
            "format": "gbn.scoretable",
            "version": 1,
            "n": self.n,
            "max_parents": self.max_parents,
            "ess": self.ess,
            "data_digest": self.data_digest,
            "entries": [
                [
                    [int(mk), float(s), float(b)]
                    for mk, s, b in zip(self._masks[v], self._scores[v], self._best[v])
                ]
                for v in range(self.n)
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "gbn.scoretable":
            raise ValueError(f"{path} is not a score-table file")
        n = payload["n"]
        masks, scores, best = [], [], []
        for v in range(n):
            entries = payload["entries"][v]
            masks.append(np.array([e[0] for e in entries], dtype=np.int64))
            scores.append(np.array([e[1] for e in entries]))
            best.append(np.array([e[2] for e in entries]))
        return cls(
            n,
            payload["max_parents"],
            payload["ess"],
            masks,
            scores,
            best,
            data_digest=payload.get("data_digest"),
        )


def dataset_digest(data):
    h = hashlib.sha256()
    h.update(np.asarray(data.cardinalities, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(data.rows).tobytes())
    return h.hexdigest()


def _count_subsets(n_other, c):
    total = 0
    binom = 1
    for i in range(c + 1):
        total += binom
        binom = binom * (n_other - i) // (i + 1)
    return total


def build_score_table(data, max_parents, ess):
    """Score every (node, parent set) with |S| <= max_parents.

    Sets are visited in increasing cardinality so the best-subset table
    follows the one-step recurrence
    bs[v, S] = max(s[v, S], max over u in S of bs[v, S minus u]).
    """
    if max_parents < 0:
        raise ValueError("max_parents must be non-negative")
    n = data.n_variables
    c = min(max_parents, n - 1)
    per_node = _count_subsets(n - 1, c)
    ensure_within_budget(n * per_node * 40, "score table")
    all_masks, all_scores, all_best = [], [], []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        masks = np.empty(per_node, dtype=np.int64)
        scores = np.empty(per_node)
        best = np.empty(per_node)
        index = {}
        pos = 0
        for size in range(c + 1):
            for subset in combinations(others, size):
                mask = 0
                for u in subset:
                    mask |= 1 << u
                s = bdeu_local(data, v, subset, ess)
                b = s
                for u in subset:
                    b = max(b, best[index[mask ^ (1 << u)]])
                masks[pos] = mask
                scores[pos] = s
                best[pos] = b
                index[mask] = pos
                pos += 1
        all_masks.append(masks)
        all_scores.append(scores)
        all_best.append(best)
    return ScoreTable(
        n, c, ess, all_masks, all_scores, all_best, data_digest=dataset_digest(data)
    )
