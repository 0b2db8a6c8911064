"""Brute-force reference implementations for differential testing.

Nothing here reuses arithmetic from ``topk`` or ``auc``; only their variant
enums are imported so both paths can be driven by the same descriptors.
Speed is irrelevant: pair enumeration is O(P*N), AP recomputes every prefix.
"""

from __future__ import annotations

from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from .core import DegenerateError, EvaluationError
from .topk import (
    ApAveraging,
    ApDenominator,
    Gain,
    HitRateVariant,
    IdealTruncation,
    NdcgParams,
    RecallDenominator,
    RrVariant,
)


class RocPoint(NamedTuple):
    false_positive_rate: float
    true_positive_rate: float


def _pairs(items) -> List[Tuple[float, bool]]:
    if hasattr(items, "scores") and hasattr(items, "labels"):
        return [(float(s), bool(l)) for s, l in zip(items.scores, items.labels)]
    return [(float(s), bool(l)) for s, l in items]


def pair_enumeration_auc(items) -> float:
    pairs = _pairs(items)
    positives = [s for s, l in pairs if l]
    negatives = [s for s, l in pairs if not l]
    if not positives or not negatives:
        raise DegenerateError("degenerate user")
    credit = 0.0
    for p in positives:
        for n in negatives:
            if p > n:
                credit += 1.0
            elif p == n:
                credit += 0.5
    return credit / (len(positives) * len(negatives))


def roc_curve(items) -> List[RocPoint]:
    """Threshold sweep from the highest score down; a tied group moves diagonally."""
    pairs = _pairs(items)
    n_pos = sum(1 for _, l in pairs if l)
    n_neg = len(pairs) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateError("degenerate user")
    curve = [RocPoint(0.0, 0.0)]
    tp = fp = 0
    for threshold in sorted({s for s, _ in pairs}, reverse=True):
        tp += sum(1 for s, l in pairs if s == threshold and l)
        fp += sum(1 for s, l in pairs if s == threshold and not l)
        curve.append(RocPoint(fp / n_neg, tp / n_pos))
    return curve


def trapezoid_area(curve: Sequence[Tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        if x1 < x0 or y1 < y0:
            raise EvaluationError("curve is not monotone")
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def limited_roc_curve(hits: Iterable[bool], n_pos: int, n_neg: int) -> List[RocPoint]:
    """Step curve over a top-k list, closed with a straight segment to (1, 1)."""
    curve = [RocPoint(0.0, 0.0)]
    tp = fp = 0
    for hit in hits:
        if hit:
            tp += 1
        else:
            fp += 1
        curve.append(RocPoint(fp / n_neg, tp / n_pos))
    if curve[-1] != (1.0, 1.0):
        curve.append(RocPoint(1.0, 1.0))
    return curve


def _precision_at(rec: Sequence, rel, j: int) -> float:
    return len(set(rec[:j]) & set(rel)) / j


def direct_metric_recompute(rec: Sequence, rel, k: int, variant="precision") -> float:
    """Re-evaluate one metric formula literally.

    ``variant`` selects the metric: ``"precision"``, a ``RecallDenominator``,
    ``HitRateVariant``, ``RrVariant``, ``ApAveraging`` or ``NdcgParams``.
    """
    rec = list(rec)[:k]
    relevant = set(rel)
    ranks = {item: pos for pos, item in enumerate(rec, start=1)}
    hit_ranks = [ranks[i] for i in relevant if i in ranks]

    if isinstance(variant, str) and variant == "precision":
        return len(relevant & set(rec)) / k

    if isinstance(variant, RecallDenominator):
        if variant is RecallDenominator.TOTAL_RELEVANT:
            return len(hit_ranks) / len(relevant)
        return len(hit_ranks) / min(len(relevant), k)

    if isinstance(variant, HitRateVariant):
        if variant is HitRateVariant.INDICATOR:
            return float(len(hit_ranks) > 0)
        return float(len(hit_ranks))

    if isinstance(variant, RrVariant):
        if not hit_ranks:
            return 0.0
        if variant is RrVariant.FIRST_HIT:
            return 1.0 / min(hit_ranks)
        return sum(1.0 / r for r in sorted(hit_ranks))

    if isinstance(variant, ApAveraging):
        x = {
            ApDenominator.BY_K: k,
            ApDenominator.BY_RELEVANT: len(relevant),
            ApDenominator.BY_MIN: min(k, len(relevant)),
        }[variant.denominator]
        if variant.drop_hit_indicator:
            total = sum(_precision_at(rec, relevant, j) for j in range(1, k + 1))
        else:
            total = sum(
                (1.0 if i in relevant else 0.0) * _precision_at(rec, relevant, ranks[i]) for i in rec
            )
        return total / x

    if isinstance(variant, NdcgParams):
        ratings = dict(rel) if hasattr(rel, "items") else dict.fromkeys(rel)
        if variant.gain is Gain.BINARY:
            gain = {i: 1.0 for i in ratings}
        else:
            gain = {i: float(np.power(2.0, r)) - 1.0 for i, r in ratings.items()}
        log_base = np.log(variant.log_base)
        dcg = sum(gain[i] / (np.log(ranks[i] + 1) / log_base) for i in rec if i in gain)
        if not variant.normalize:
            return float(dcg)
        ideal = sorted(gain.values(), reverse=True)
        if variant.ideal_truncation is IdealTruncation.AT_K:
            ideal = ideal[:k]
        idcg = sum(g / (np.log(pos + 1) / log_base) for pos, g in enumerate(ideal, start=1))
        return float(dcg / idcg) if idcg > 0 else 0.0

    raise EvaluationError(f"unknown variant {variant!r}")
