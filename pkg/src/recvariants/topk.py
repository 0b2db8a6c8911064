"""Per-user top-k ranking metrics with every variant dimension made explicit.

All functions take ``rec``, an already truncated ranked sequence of item ids
(length at most ``k``), and ``rel``, the user's relevant items (any container
supporting ``in`` and ``len``; a mapping item -> rating for weighted NDCG).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Collection, Iterable, Mapping, Optional, Sequence

from .core import ConfigurationError, EvaluationError, UserId, check_cutoff, id_sort_key


class RecallDenominator(str, enum.Enum):
    TOTAL_RELEVANT = "total_relevant"
    MIN_OF_K_AND_RELEVANT = "min_k_r"


class HitRateVariant(str, enum.Enum):
    INDICATOR = "indicator"
    HIT_COUNT = "hit_count"


class RrVariant(str, enum.Enum):
    FIRST_HIT = "first_hit"
    SUM_OF_HITS = "sum_of_hits"


class ApDenominator(str, enum.Enum):
    BY_K = "by_k"
    BY_RELEVANT = "by_relevant"
    BY_MIN = "by_min"


@dataclass(frozen=True)
class ApAveraging:
    denominator: ApDenominator = ApDenominator.BY_MIN
    drop_hit_indicator: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "denominator", ApDenominator(self.denominator))
        if self.drop_hit_indicator and self.denominator is not ApDenominator.BY_K:
            raise ConfigurationError("drop_hit_indicator is only valid with BY_K averaging")


class Gain(str, enum.Enum):
    BINARY = "binary"
    EXPONENTIAL = "exponential"


class IdealTruncation(str, enum.Enum):
    AT_K = "at_k"
    FULL_TEST = "full_test"


@dataclass(frozen=True)
class NdcgParams:
    gain: Gain = Gain.BINARY
    log_base: float = 2.0
    normalize: bool = True
    ideal_truncation: IdealTruncation = IdealTruncation.AT_K

    def __post_init__(self) -> None:
        object.__setattr__(self, "gain", Gain(self.gain))
        object.__setattr__(self, "ideal_truncation", IdealTruncation(self.ideal_truncation))
        if not (self.log_base > 1.0 and math.isfinite(self.log_base)):
            raise ConfigurationError(f"log_base must be > 1, got {self.log_base}")


def _checked(rec: Sequence, k: int) -> Sequence:
    check_cutoff(k)
    if len(rec) > k:
        raise EvaluationError(f"recommendation list of length {len(rec)} exceeds k={k}; truncate first")
    return rec


def _hit_ranks(rec: Sequence, rel: Collection) -> list:
    return [pos for pos, item in enumerate(rec, start=1) if item in rel]


def precision_at_k(rec: Sequence, rel: Collection, k: int) -> float:
    _checked(rec, k)
    return len(_hit_ranks(rec, rel)) / k


def recall_at_k(
    rec: Sequence,
    rel: Collection,
    k: int,
    denom: RecallDenominator = RecallDenominator.TOTAL_RELEVANT,
) -> float:
    _checked(rec, k)
    r = len(rel)
    if r < 1:
        raise EvaluationError("recall needs at least one relevant item")
    hits = len(_hit_ranks(rec, rel))
    if RecallDenominator(denom) is RecallDenominator.MIN_OF_K_AND_RELEVANT:
        return hits / min(k, r)
    return hits / r


def hit_rate_at_k(
    rec: Sequence,
    rel: Collection,
    k: int,
    variant: HitRateVariant = HitRateVariant.INDICATOR,
) -> float:
    _checked(rec, k)
    hits = len(_hit_ranks(rec, rel))
    if HitRateVariant(variant) is HitRateVariant.HIT_COUNT:
        return float(hits)
    return 1.0 if hits > 0 else 0.0


def reciprocal_rank_at_k(
    rec: Sequence,
    rel: Collection,
    k: int,
    variant: RrVariant = RrVariant.FIRST_HIT,
) -> float:
    _checked(rec, k)
    ranks = _hit_ranks(rec, rel)
    if not ranks:
        return 0.0
    if RrVariant(variant) is RrVariant.SUM_OF_HITS:
        return math.fsum(1.0 / pos for pos in ranks)
    return 1.0 / ranks[0]


def average_precision_at_k(
    rec: Sequence,
    rel: Collection,
    k: int,
    avg: ApAveraging = ApAveraging(),
) -> float:
    """Average precision with averaging term k, r or min(k, r).

    With ``drop_hit_indicator`` the sum runs over Precision@j for every
    j = 1..k, hit or not.
    """
    _checked(rec, k)
    r = len(rel)
    if r < 1:
        raise EvaluationError("average precision needs at least one relevant item")
    terms = []
    hits = 0
    for pos in range(1, k + 1):
        is_hit = pos <= len(rec) and rec[pos - 1] in rel
        hits += is_hit
        if is_hit or avg.drop_hit_indicator:
            terms.append(hits / pos)
    x = {ApDenominator.BY_K: k, ApDenominator.BY_RELEVANT: r, ApDenominator.BY_MIN: min(k, r)}[
        avg.denominator
    ]
    return math.fsum(terms) / x


def _gain(rating: Optional[float], gain: Gain) -> float:
    if gain is Gain.BINARY:
        return 1.0
    if rating is None:
        raise EvaluationError("exponential gain needs a rating for every relevant item")
    return 2.0**rating - 1.0


def _discount(rank: int, base: float) -> float:
    return math.log2(rank + 1) / math.log2(base)


def ndcg_at_k(rec: Sequence, rel: Mapping, k: int, p: NdcgParams = NdcgParams()) -> float:
    """DCG over ranked hits divided by the DCG of the rating-sorted relevant list.

    ``rel`` maps relevant item -> rating (ratings may be None for binary gain).
    The ideal list is cut at k (AT_K) or keeps all relevant items (FULL_TEST).
    """
    _checked(rec, k)
    if not isinstance(rel, Mapping):
        rel = dict.fromkeys(rel)
    gains = {item: _gain(rating, p.gain) for item, rating in rel.items()}
    dcg = math.fsum(
        gains[item] / _discount(pos, p.log_base)
        for pos, item in enumerate(rec, start=1)
        if item in gains
    )
    if not p.normalize:
        return dcg
    ideal = sorted(gains.values(), reverse=True)
    if p.ideal_truncation is IdealTruncation.AT_K:
        ideal = ideal[:k]
    idcg = math.fsum(g / _discount(pos, p.log_base) for pos, g in enumerate(ideal, start=1))
    if idcg <= 0.0:
        return 0.0
    return dcg / idcg


def mean_over_users(per_user: Mapping[UserId, float], universe: Iterable[UserId]) -> float:
    """Mean over ``universe``; users without a value count as 0.

    Summation runs in ascending user order through ``math.fsum`` (exactly
    rounded), so the result does not depend on how per-user values were produced.
    """
    users = sorted(set(universe), key=id_sort_key)
    if not users:
        raise EvaluationError("no users to evaluate")
    return math.fsum(per_user.get(u, 0.0) for u in users) / len(users)
