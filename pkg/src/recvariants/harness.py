"""Variant registry, matrix evaluation, report rendering and fingerprinting."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import auc as auc_ops
from . import topk
from .auc import GaucWeighting, ScoredLabels
from .core import (
    ConfigurationError,
    DegenerateError,
    EmptyInputError,
    GroundTruth,
    InteractionLog,
    RankedPredictions,
    UserId,
    check_cutoff,
    id_sort_key,
)

DEFAULT_TOLERANCE = 0.0005


class Family(str, enum.Enum):
    PRECISION = "precision"
    RECALL = "recall"
    HITRATE = "hitrate"
    MRR = "mrr"
    MAP = "map"
    NDCG = "ndcg"
    AUC = "auc"


class AucMode(str, enum.Enum):
    STACKED = "stacked"
    RATIO_OF_AVERAGES = "ratio_of_averages"
    GROUP = "group"
    GROUP_AT_K = "group_at_k"
    LIMITED_AT_K = "limited_at_k"


_ALLOWED = {
    Family.PRECISION: set(),
    Family.RECALL: {"denominator"},
    Family.HITRATE: {"variant"},
    Family.MRR: {"variant"},
    Family.MAP: {"averaging", "drop_hit_indicator"},
    Family.NDCG: {"gain", "log_base", "normalize", "ideal_truncation"},
    Family.AUC: {"mode", "weighting"},
}


def _parse_option(family: Family, params: Mapping[str, Any]):
    unknown = set(params) - _ALLOWED[family]
    if unknown:
        raise ConfigurationError(f"unknown parameter(s) for {family.value}: {sorted(unknown)}")
    try:
        if family is Family.PRECISION:
            return "precision"
        if family is Family.RECALL:
            return topk.RecallDenominator(params.get("denominator", "total_relevant"))
        if family is Family.HITRATE:
            return topk.HitRateVariant(params.get("variant", "indicator"))
        if family is Family.MRR:
            return topk.RrVariant(params.get("variant", "first_hit"))
        if family is Family.MAP:
            return topk.ApAveraging(
                topk.ApDenominator(params.get("averaging", "by_min")),
                bool(params.get("drop_hit_indicator", False)),
            )
        if family is Family.NDCG:
            return topk.NdcgParams(
                gain=topk.Gain(params.get("gain", "binary")),
                log_base=float(params.get("log_base", 2.0)),
                normalize=bool(params.get("normalize", True)),
                ideal_truncation=topk.IdealTruncation(params.get("ideal_truncation", "at_k")),
            )
        mode = AucMode(params["mode"])
        weighting = GaucWeighting(params.get("weighting", "uniform_zero_on_degenerate"))
        return mode, weighting
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid parameters for {family.value}: {exc}") from None


@dataclass(frozen=True, eq=False)
class VariantSpec:
    """A named, fully parameterised metric variant.

    ``params`` holds JSON-compatible values so a registry can be loaded from
    a file. ``cutoff`` of None means "use the run's k" for top-k families.
    """

    name: str
    family: Family
    params: Mapping[str, Any] = field(default_factory=dict)
    cutoff: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        if not self.name:
            raise ConfigurationError("variant needs a canonical name")
        if self.cutoff is not None:
            check_cutoff(self.cutoff)
        object.__setattr__(self, "_option", _parse_option(self.family, self.params))

    @property
    def option(self):
        return self._option

    @property
    def is_topk(self) -> bool:
        return self.family is not Family.AUC

    def k_for(self, run_k: int) -> int:
        return self.cutoff if self.cutoff is not None else run_k

    def to_dict(self) -> Dict[str, Any]:
        out = {"name": self.name, "family": self.family.value, "params": dict(self.params)}
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VariantSpec":
        try:
            return cls(data["name"], data["family"], data.get("params", {}), data.get("cutoff"))
        except KeyError as exc:
            raise ConfigurationError(f"variant definition missing {exc}") from None
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from None


def _ndcg(gain, normalize=True, ideal="at_k", log_base=2.0):
    return {"gain": gain, "log_base": log_base, "normalize": normalize, "ideal_truncation": ideal}


_DEFAULT = [
    ("precision@k", Family.PRECISION, {}),
    ("recall@k/total_relevant", Family.RECALL, {"denominator": "total_relevant"}),
    ("recall@k/min_k_r", Family.RECALL, {"denominator": "min_k_r"}),
    ("hitrate@k/indicator", Family.HITRATE, {"variant": "indicator"}),
    ("hitrate@k/hit_count", Family.HITRATE, {"variant": "hit_count"}),
    ("mrr@k/first_hit", Family.MRR, {"variant": "first_hit"}),
    ("mrr@k/sum_of_hits", Family.MRR, {"variant": "sum_of_hits"}),
    ("map@k/by_k", Family.MAP, {"averaging": "by_k", "drop_hit_indicator": False}),
    ("map@k/by_relevant", Family.MAP, {"averaging": "by_relevant", "drop_hit_indicator": False}),
    ("map@k/by_min", Family.MAP, {"averaging": "by_min", "drop_hit_indicator": False}),
    ("map@k/by_k_all_positions", Family.MAP, {"averaging": "by_k", "drop_hit_indicator": True}),
    ("ndcg@k/binary", Family.NDCG, _ndcg("binary")),
    ("ndcg@k/weighted", Family.NDCG, _ndcg("exponential")),
    ("ndcg@k/weighted_full_ideal", Family.NDCG, _ndcg("exponential", ideal="full_test")),
    ("ndcg@k/binary_unnormalized", Family.NDCG, _ndcg("binary", normalize=False)),
    ("auc/stacked", Family.AUC, {"mode": "stacked"}),
    ("auc/ratio_of_averages", Family.AUC, {"mode": "ratio_of_averages"}),
    ("auc/gauc_uniform", Family.AUC, {"mode": "group", "weighting": "uniform_zero_on_degenerate"}),
    ("auc/gauc_weighted", Family.AUC, {"mode": "group", "weighting": "by_rated_count_skip_degenerate"}),
    ("auc/gauc@k", Family.AUC, {"mode": "group_at_k"}),
    ("auc/lauc@k", Family.AUC, {"mode": "limited_at_k"}),
]


def registry_default() -> List[VariantSpec]:
    return [VariantSpec(name, family, params) for name, family, params in _DEFAULT]


def registry_extended() -> List[VariantSpec]:
    """Default registry plus weighted NDCG with natural-log discount.

    Normalised NDCG does not depend on the log base, so the extra variant
    always coincides with ``ndcg@k/weighted``; it is kept for completeness.
    """
    extra = VariantSpec("ndcg@k/weighted_ln", Family.NDCG, _ndcg("exponential", log_base=math.e))
    return registry_default() + [extra]


def load_registry(data: Union[str, bytes, Sequence[Mapping[str, Any]]]) -> List[VariantSpec]:
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    specs = [VariantSpec.from_dict(d) for d in data]
    check_registry(specs)
    return specs


def check_registry(specs: Sequence[VariantSpec]) -> None:
    names = [s.name for s in specs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ConfigurationError(f"duplicate canonical name(s): {dupes}")


def select_variants(registry: Sequence[VariantSpec], names: Union[str, Sequence[str]]) -> List[VariantSpec]:
    """Filter a registry by canonical names; ``"all"`` keeps everything."""
    if isinstance(names, str):
        if names.strip() == "all":
            return list(registry)
        names = [n.strip() for n in names.split(",") if n.strip()]
    by_name = {s.name: s for s in registry}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise ConfigurationError(f"unknown variant(s): {', '.join(missing)}")
    return [by_name[n] for n in names]


@dataclass(frozen=True)
class Cell:
    spec: VariantSpec
    value: float
    users: int


@dataclass
class EvaluationReport:
    dataset: str
    k: int
    cells: List[Cell]
    per_user: Optional[Dict[str, Dict[UserId, float]]] = None

    def value(self, name: str) -> float:
        for cell in self.cells:
            if cell.spec.name == name:
                return cell.value
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "k": self.k,
            "cells": [
                {
                    "name": c.spec.name,
                    "family": c.spec.family.value,
                    "params": dict(c.spec.params),
                    "value": _round6(c.value),
                    "users": c.users,
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvaluationReport":
        try:
            cells = [
                Cell(VariantSpec(c["name"], c["family"], c.get("params", {})), float(c["value"]), int(c["users"]))
                for c in data["cells"]
            ]
            return cls(str(data["dataset"]), int(data["k"]), cells)
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed report: {exc}") from None


def _round6(value: float) -> float:
    return float(f"{value:.6f}")


# -- evaluation ---------------------------------------------------------------


def _chunks(seq: Sequence, n: int) -> List[Sequence]:
    n = max(1, min(n, len(seq)))
    size = math.ceil(len(seq) / n)
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def _parallel_map(fn: Callable, users: Sequence, workers: int) -> Dict:
    """Apply ``fn`` to chunks of users; merge results keyed by user."""
    out: Dict = {}
    parts = _chunks(users, workers)
    if workers <= 1 or len(parts) == 1:
        results = [fn(p) for p in parts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, parts))
    for r in results:
        out.update(r)
    return out


_TOPK_FN = {
    Family.PRECISION: lambda rec, rel, k, opt: topk.precision_at_k(rec, rel, k),
    Family.RECALL: topk.recall_at_k,
    Family.HITRATE: topk.hit_rate_at_k,
    Family.MRR: topk.reciprocal_rank_at_k,
    Family.MAP: topk.average_precision_at_k,
    Family.NDCG: topk.ndcg_at_k,
}


class _Candidates:
    """Per-user candidate sets: training-log catalog minus the user's training items."""

    def __init__(self, train: InteractionLog, truth: GroundTruth):
        self.catalog = sorted({x.item for x in train}, key=id_sort_key)
        self.index = {item: i for i, item in enumerate(self.catalog)}
        self.seen: Dict[UserId, set] = {}
        for x in train:
            self.seen.setdefault(x.user, set()).add(x.item)
        self.truth = truth

    def is_candidate(self, user: UserId, item) -> bool:
        if item in self.truth[user]:
            return True
        return item in self.index and item not in self.seen.get(user, ())

    def size(self, user: UserId) -> int:
        seen = self.seen.get(user, set())
        extra = sum(1 for i in self.truth[user] if i not in self.index or i in seen)
        return len(self.catalog) - len(seen & self.index.keys()) + extra

    def full_ranking(self, user: UserId, rows) -> Optional[ScoredLabels]:
        """Scores for every candidate; unranked candidates tie below all ranked ones."""
        rows = [(i, s) for i, s in rows if self.is_candidate(user, i)]
        if not rows:
            return None
        rel = self.truth[user]
        n = len(self.catalog)
        floor = min(s for _, s in rows) - 1.0
        scores = np.full(n, floor)
        labels = np.zeros(n, dtype=bool)
        mask = np.ones(n, dtype=bool)
        for item in self.seen.get(user, ()):
            if item in self.index:
                mask[self.index[item]] = False
        extra_scores, extra_labels = [], []
        ranked = dict(rows)
        for item in rel:
            j = self.index.get(item)
            if j is None or not mask[j]:
                extra_scores.append(ranked.get(item, floor))
                extra_labels.append(True)
            else:
                labels[j] = True
        for item, s in rows:
            j = self.index.get(item)
            if j is not None and mask[j]:
                scores[j] = s
        return ScoredLabels(
            np.concatenate([scores[mask], np.asarray(extra_scores, dtype=np.float64)]),
            np.concatenate([labels[mask], np.asarray(extra_labels, dtype=bool)]),
        )


def evaluate_matrix(
    preds: RankedPredictions,
    truth: GroundTruth,
    train: InteractionLog,
    registry: Optional[Sequence[VariantSpec]] = None,
    k: int = 20,
    *,
    workers: int = 1,
    dataset: str = "",
    keep_per_user: bool = False,
) -> EvaluationReport:
    """Evaluate every variant in ``registry`` on fixed predictions and test data.

    Top-k variants are averaged over all ground-truth users (missing users
    score 0). Full-ranking AUC variants rank every candidate item, i.e. the
    training catalog minus the user's own training items; candidates absent
    from the prediction list tie below every ranked item. Results do not
    depend on ``workers``.
    """
    registry = registry_default() if registry is None else list(registry)
    check_registry(registry)
    check_cutoff(k)
    if not truth:
        raise EmptyInputError("no users")
    if any(s.family is Family.NDCG and s.option.gain is topk.Gain.EXPONENTIAL for s in registry):
        if not truth.has_ratings():
            raise ConfigurationError("exponential-gain NDCG requested but ground truth has no ratings")
    users = sorted(truth, key=id_sort_key)
    topk_specs = [s for s in registry if s.is_topk]

    def topk_chunk(chunk):
        out = {}
        for u in chunk:
            ranked = preds.items_for(u)
            rel = truth[u]
            out[u] = [
                _TOPK_FN[s.family](ranked[: s.k_for(k)], rel, s.k_for(k), s.option) for s in topk_specs
            ]
        return out

    per_user: Dict[str, Dict[UserId, float]] = {}
    cells: Dict[str, Cell] = {}
    if topk_specs:
        values = _parallel_map(topk_chunk, users, workers)
        for j, spec in enumerate(topk_specs):
            per_user[spec.name] = {u: values[u][j] for u in users}
            cells[spec.name] = Cell(spec, topk.mean_over_users(per_user[spec.name], users), len(users))

    auc_specs = [s for s in registry if not s.is_topk]
    if auc_specs:
        cand = _Candidates(train, truth)
        modes = {s.option[0] for s in auc_specs}
        full: Dict[UserId, ScoredLabels] = {}
        if modes & {AucMode.STACKED, AucMode.RATIO_OF_AVERAGES, AucMode.GROUP}:
            built = _parallel_map(
                lambda chunk: {u: cand.full_ranking(u, preds.get(u, ())) for u in chunk}, users, workers
            )
            full = {u: built[u] for u in users if built[u] is not None}
        candidate_preds = None
        if AucMode.LIMITED_AT_K in modes:
            candidate_preds = RankedPredictions(
                {u: [(i, s) for i, s in preds[u] if cand.is_candidate(u, i)] for u in users if u in preds}
            )
        for spec in auc_specs:
            cells[spec.name] = _evaluate_auc(spec, k, preds, truth, full, cand, candidate_preds, per_user)

    report = EvaluationReport(dataset, k, [cells[s.name] for s in registry])
    if keep_per_user:
        report.per_user = per_user
    return report


def _evaluate_auc(spec, k, preds, truth, full, cand, candidate_preds, per_user) -> Cell:
    mode, weighting = spec.option
    cut = spec.k_for(k)
    n_users = len(truth)
    non_degenerate = [u for u, x in full.items() if x.n_pos and x.n_neg]
    if mode is AucMode.STACKED:
        return Cell(spec, auc_ops.stacked_auc(full), len(full))
    if mode is AucMode.RATIO_OF_AVERAGES:
        return Cell(spec, auc_ops.ratio_of_averages_auc(full), len(non_degenerate))
    if mode is AucMode.GROUP:
        if weighting is GaucWeighting.UNIFORM_ZERO_ON_DEGENERATE:
            # users with no usable ranking are degenerate and count as 0
            padded = dict(full)
            for u in truth:
                padded.setdefault(u, ScoredLabels(np.zeros(0), np.zeros(0, dtype=bool)))
            per_user[spec.name] = {
                u: (auc_ops.user_pairwise_auc(x) if x.n_pos and x.n_neg else 0.0) for u, x in padded.items()
            }
            return Cell(spec, auc_ops.group_auc(padded, weighting), n_users)
        return Cell(spec, auc_ops.group_auc(full, weighting), len(non_degenerate))
    if mode is AucMode.GROUP_AT_K:
        return Cell(spec, auc_ops.truncated_group_auc(preds, truth, cut), n_users)
    sizes = {u: cand.size(u) for u in truth}
    return Cell(spec, auc_ops.limited_auc(candidate_preds, truth, cut, sizes), n_users)


# -- rendering -----------------------------------------------------------------


class ReportFormat(str, enum.Enum):
    JSON = "json"
    MARKDOWN = "markdown"
    CSV = "csv"


def render_report(report: EvaluationReport, fmt: Union[ReportFormat, str] = ReportFormat.JSON) -> bytes:
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        return (json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8")
    if fmt is ReportFormat.MARKDOWN:
        names = [c.spec.name for c in report.cells]
        lines = [
            "| " + " | ".join(["dataset", "k"] + names) + " |",
            "|" + "---|" * (2 + len(names)),
            "| " + " | ".join([report.dataset, str(report.k)] + [f"{c.value:.6f}" for c in report.cells]) + " |",
        ]
        return ("\n".join(lines) + "\n").encode("utf-8")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "family", "value", "users"])
    for c in report.cells:
        writer.writerow([c.spec.name, c.spec.family.value, f"{c.value:.6f}", c.users])
    return buf.getvalue().encode("utf-8")


def render_per_user(report: EvaluationReport) -> bytes:
    """CSV of per-user values, one row per (variant, user)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "user_id", "value"])
    for name, values in (report.per_user or {}).items():
        for u in sorted(values, key=id_sort_key):
            writer.writerow([name, u, repr(values[u])])
    return buf.getvalue().encode("utf-8")


# -- fingerprinting ---------------------------------------------------------------

_LABEL_ALIASES = {
    "precision": Family.PRECISION,
    "prec": Family.PRECISION,
    "p": Family.PRECISION,
    "recall": Family.RECALL,
    "hitrate": Family.HITRATE,
    "hr": Family.HITRATE,
    "hit": Family.HITRATE,
    "hits": Family.HITRATE,
    "mrr": Family.MRR,
    "rr": Family.MRR,
    "arhr": Family.MRR,
    "map": Family.MAP,
    "ap": Family.MAP,
    "meanaverageprecision": Family.MAP,
    "ndcg": Family.NDCG,
    "dcg": Family.NDCG,
    "bndcg": Family.NDCG,
    "wndcg": Family.NDCG,
    "bdcg": Family.NDCG,
    "auc": Family.AUC,
    "rocauc": Family.AUC,
    "sauc": Family.AUC,
    "gauc": Family.AUC,
    "lauc": Family.AUC,
}


def family_of_label(label: str) -> Optional[Family]:
    """Map labels such as ``"MAP@20"``, ``"HitRate"`` or ``"map@k/by_min"`` to a family."""
    stem = re.split(r"[@/]", label.strip().lower(), maxsplit=1)[0]
    stem = re.sub(r"[^a-z0-9]", "", stem)
    return _LABEL_ALIASES.get(stem)


@dataclass(frozen=True)
class Match:
    label: str
    observed: float
    candidates: Tuple[Tuple[str, float], ...]


@dataclass(frozen=True)
class FingerprintResult:
    matches: Tuple[Match, ...]
    unmatched: Tuple[str, ...]

    def best(self, label: str) -> Optional[str]:
        for m in self.matches:
            if m.label == label:
                return m.candidates[0][0] if m.candidates else None
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matches": [
                {
                    "label": m.label,
                    "observed": m.observed,
                    "candidates": [{"name": n, "deviation": float(f"{d:.9f}")} for n, d in m.candidates],
                }
                for m in self.matches
            ],
            "unmatched": list(self.unmatched),
        }


def fingerprint(
    observed: Union[Mapping[str, float], Iterable[Tuple[str, float]]],
    report: EvaluationReport,
    tolerance: float = DEFAULT_TOLERANCE,
) -> FingerprintResult:
    """Attribute externally reported metric values to variants in ``report``.

    For each observed value, every variant of the same family whose aggregate
    lies within ``tolerance`` is listed, closest first. Labels whose family
    cannot be recognised are returned in ``unmatched``.
    """
    if not tolerance > 0:
        raise ConfigurationError("tolerance must be positive")
    items = observed.items() if isinstance(observed, Mapping) else observed
    matches, unmatched = [], []
    for label, value in items:
        family = family_of_label(label)
        if family is None:
            unmatched.append(label)
            continue
        value = float(value)
        found = sorted(
            ((c.spec.name, abs(c.value - value)) for c in report.cells if c.spec.family is family),
            key=lambda t: (t[1], t[0]),
        )
        matches.append(Match(label, value, tuple((n, d) for n, d in found if d <= tolerance)))
    return FingerprintResult(tuple(matches), tuple(unmatched))


def render_fingerprint(result: FingerprintResult, fmt: str = "text") -> bytes:
    if fmt == "json":
        return (json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8")
    lines = ["| label | observed | variant | deviation |", "|---|---|---|---|"]
    for m in result.matches:
        if not m.candidates:
            lines.append(f"| {m.label} | {m.observed:.6f} | (no match) | |")
        for name, dev in m.candidates:
            lines.append(f"| {m.label} | {m.observed:.6f} | {name} | {dev:.6f} |")
    for label in result.unmatched:
        lines.append(f"| {label} | | (unknown metric) | |")
    return ("\n".join(lines) + "\n").encode("utf-8")
