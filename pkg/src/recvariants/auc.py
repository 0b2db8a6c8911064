"""AUC family for recommendation: per-user, stacked, ratio-of-sums, group, GAUC@k, LAUC@k.

Pair counts are kept as exact integers (twice the number of correctly
ordered pairs, ties worth one half), so pooled reductions are exact and
independent of evaluation order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Tuple

import numpy as np

from .core import (
    DegenerateError,
    GroundTruth,
    RankedPredictions,
    UserId,
    check_cutoff,
    id_sort_key,
)
from .topk import mean_over_users


class GaucWeighting(str, enum.Enum):
    UNIFORM_ZERO_ON_DEGENERATE = "uniform_zero_on_degenerate"
    BY_RATED_COUNT_SKIP_DEGENERATE = "by_rated_count_skip_degenerate"


@dataclass(frozen=True, eq=False)
class ScoredLabels:
    """One user's candidate items as parallel score / label arrays, sorted by descending score."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        labels = np.asarray(self.labels, dtype=bool).ravel()
        if scores.shape != labels.shape:
            raise ValueError("scores and labels must have the same length")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        order = np.argsort(-scores, kind="stable")
        object.__setattr__(self, "scores", scores[order])
        object.__setattr__(self, "labels", labels[order])

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, bool]]) -> "ScoredLabels":
        pairs = list(pairs)
        return cls(np.array([s for s, _ in pairs], dtype=np.float64), np.array([l for _, l in pairs], dtype=bool))

    @property
    def n_pos(self) -> int:
        return int(self.labels.sum())

    @property
    def n_neg(self) -> int:
        return int(self.labels.size - self.labels.sum())

    def __len__(self) -> int:
        return int(self.labels.size)


class PairCounts(NamedTuple):
    twice_correct: int
    n_pos: int
    n_neg: int

    @property
    def pairs(self) -> int:
        return self.n_pos * self.n_neg


def pair_counts(scores: np.ndarray, labels: np.ndarray) -> PairCounts:
    """Count (pos, neg) pairs ordered correctly, in half-pair units."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = int(labels.size) - n_pos
    if n_pos == 0 or n_neg == 0:
        return PairCounts(0, n_pos, n_neg)
    _, group = np.unique(scores, return_inverse=True)
    n_groups = int(group.max()) + 1
    pos = np.bincount(group[labels], minlength=n_groups).astype(np.int64)
    neg = np.bincount(group[~labels], minlength=n_groups).astype(np.int64)
    # groups ascend in score, so negatives strictly below group g are cumsum - neg
    neg_below = np.cumsum(neg) - neg
    return PairCounts(int(np.sum(pos * (2 * neg_below + neg))), n_pos, n_neg)


def user_pairwise_auc(items: ScoredLabels) -> float:
    counts = pair_counts(items.scores, items.labels)
    if counts.pairs == 0:
        raise DegenerateError("degenerate user")
    return counts.twice_correct / (2 * counts.pairs)


def _ordered(all_users: Mapping[UserId, ScoredLabels]):
    return [all_users[u] for u in sorted(all_users, key=id_sort_key)]


def stacked_auc(all_users: Mapping[UserId, ScoredLabels]) -> float:
    """Pool every user's (score, label) pairs into one ranking."""
    users = _ordered(all_users)
    if not users:
        raise DegenerateError("degenerate pool")
    scores = np.concatenate([x.scores for x in users])
    labels = np.concatenate([x.labels for x in users])
    counts = pair_counts(scores, labels)
    if counts.pairs == 0:
        raise DegenerateError("degenerate pool")
    return counts.twice_correct / (2 * counts.pairs)


def ratio_of_averages_auc(all_users: Mapping[UserId, ScoredLabels]) -> float:
    """Sum of per-user correctly ordered pairs over sum of per-user P*N."""
    twice_correct = 0
    pairs = 0
    for x in _ordered(all_users):
        c = pair_counts(x.scores, x.labels)
        twice_correct += c.twice_correct
        pairs += c.pairs
    if pairs == 0:
        raise DegenerateError("degenerate pool")
    return twice_correct / (2 * pairs)


def group_auc(
    all_users: Mapping[UserId, ScoredLabels],
    w: GaucWeighting = GaucWeighting.UNIFORM_ZERO_ON_DEGENERATE,
) -> float:
    """Per-user AUC averaged over users.

    UNIFORM scores degenerate users 0 and averages over everyone. The
    weighted form skips degenerate users and weights each remaining user's
    AUC by its number of rated (positive) items.
    """
    if not all_users:
        raise DegenerateError("no users")
    counts = {u: pair_counts(x.scores, x.labels) for u, x in all_users.items()}
    counts = {u: c for u, c in counts.items() if c.pairs}
    if GaucWeighting(w) is GaucWeighting.UNIFORM_ZERO_ON_DEGENERATE:
        per_user = {u: c.twice_correct / (2 * c.pairs) for u, c in counts.items()}
        return mean_over_users(per_user, all_users)
    if not counts:
        raise DegenerateError("degenerate pool")
    # sum_u P_u * AUC_u / sum_u P_u, evaluated exactly: P_u * AUC_u = twice_correct / (2 N_u)
    num = sum((Fraction(c.twice_correct, 2 * c.n_neg) for c in counts.values()), Fraction(0))
    return float(num / sum(c.n_pos for c in counts.values()))


def truncated_user_labels(
    preds: RankedPredictions, truth: GroundTruth, k: int, user: UserId
) -> ScoredLabels:
    rows = preds.get(user, ())[:k]
    rel = truth[user]
    return ScoredLabels(
        np.array([s for _, s in rows], dtype=np.float64),
        np.array([i in rel for i, _ in rows], dtype=bool),
    )


def truncated_group_auc(preds: RankedPredictions, truth: GroundTruth, k: int) -> float:
    """GAUC with the cut-off applied first: pairs are formed inside each top-k list only."""
    check_cutoff(k)
    per_user = {}
    for u in truth:
        x = truncated_user_labels(preds, truth, k, u)
        c = pair_counts(x.scores, x.labels)
        if c.pairs:
            per_user[u] = c.twice_correct / (2 * c.pairs)
    return mean_over_users(per_user, truth)


def limited_user_auc(hits: Iterable[bool], n_pos: int, n_neg: int) -> float:
    """Area under the top-k ROC step curve closed by a straight line to (1, 1).

    Each hit moves up by 1/n_pos, each miss right by 1/n_neg. Returns 0 for a
    degenerate user (no positives or no negatives among the candidates).
    """
    if n_pos < 1 or n_neg < 1:
        return 0.0
    tp = 0
    fp = 0
    twice_area = 0  # in units of 1 / (n_pos * n_neg)
    for hit in hits:
        if hit:
            tp += 1
        else:
            fp += 1
            twice_area += 2 * tp
    if tp > n_pos or fp > n_neg:
        raise ValueError("more hits or misses than positives or negatives")
    # closing segment from (fp, tp) to (n_neg, n_pos): width * (tp + n_pos)
    twice_area += (n_neg - fp) * (tp + n_pos)
    return twice_area / (2 * n_pos * n_neg)


def limited_auc(
    preds: RankedPredictions,
    truth: GroundTruth,
    k: int,
    catalog_size: Mapping[UserId, int],
) -> float:
    """LAUC@k averaged uniformly over ground-truth users.

    ``catalog_size[u]`` is the number of candidate items for ``u`` (catalog
    minus the user's training items), so N = catalog_size[u] - |rel(u)|.
    Users without predictions score 0.
    """
    check_cutoff(k)
    per_user = {}
    for u in truth:
        if u not in preds:
            continue
        rel = truth[u]
        hits = [item in rel for item in preds.items_for(u)[:k]]
        per_user[u] = limited_user_auc(hits, len(rel), catalog_size[u] - len(rel))
    return mean_over_users(per_user, truth)
