"""Interaction-log parsing and the positive-filter / global-timestamp split protocol."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Optional, Tuple, Union

from .core import (
    DuplicateError,
    EmptyInputError,
    EvaluationError,
    GroundTruth,
    Interaction,
    InteractionLog,
    RankedPredictions,
    RowError,
    SchemaError,
)

INTERACTION_COLUMNS = ("user_id", "item_id", "rating", "timestamp")
PREDICTION_COLUMNS = ("user_id", "item_id", "score")

Source = Union[bytes, str, BinaryIO, io.TextIOBase]


@dataclass(frozen=True)
class SplitConfig:
    positive_threshold: float = 4.5
    test_fraction: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise EvaluationError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if not math.isfinite(self.positive_threshold) and self.positive_threshold != -math.inf:
            raise EvaluationError("positive_threshold must be finite")


def _text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data.lstrip("﻿")


def detect_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def _read_table(source: Source, required: Tuple[str, ...], delimiter: Optional[str]):
    text = _text(source)
    lines = text.splitlines()
    if not lines:
        raise SchemaError("missing header row")
    delimiter = delimiter or detect_delimiter(lines[0])
    reader = csv.reader(lines, delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")
    index = {c: header.index(c) for c in required}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise RowError(lineno, f"expected {len(header)} fields, got {len(row)}")
        yield lineno, {c: row[i].strip() for c, i in index.items()}


def parse_interactions(source: Source, delimiter: Optional[str] = None) -> InteractionLog:
    """Parse delimited text with columns user_id, item_id, rating, timestamp.

    The delimiter is auto-detected from the header (tab or comma) unless given.
    Identifiers are kept as strings.
    """
    out = []
    for lineno, row in _read_table(source, INTERACTION_COLUMNS, delimiter):
        try:
            rating = float(row["rating"])
        except ValueError:
            raise RowError(lineno, f"unparseable rating {row['rating']!r}") from None
        try:
            timestamp = int(row["timestamp"])
        except ValueError:
            raise RowError(lineno, f"unparseable timestamp {row['timestamp']!r}") from None
        if not row["user_id"] or not row["item_id"]:
            raise RowError(lineno, "empty identifier")
        try:
            out.append(Interaction(row["user_id"], row["item_id"], rating, timestamp))
        except EvaluationError as exc:
            raise RowError(lineno, str(exc)) from None
    return tuple(out)


def parse_predictions(source: Source, delimiter: Optional[str] = None) -> RankedPredictions:
    """Parse user_id, item_id, score rows grouped per user in descending score.

    Rank is the row order within a user; it is never read from the file.
    """
    rows = []
    for lineno, row in _read_table(source, PREDICTION_COLUMNS, delimiter):
        try:
            score = float(row["score"])
        except ValueError:
            raise RowError(lineno, f"unparseable score {row['score']!r}") from None
        if not math.isfinite(score):
            raise RowError(lineno, f"score must be finite, got {row['score']!r}")
        rows.append((row["user_id"], row["item_id"], score))
    return RankedPredictions.from_rows(rows)


def format_interactions(log: Iterable[Interaction], delimiter: str = ",") -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(INTERACTION_COLUMNS)
    for x in log:
        writer.writerow([x.user, x.item, repr(float(x.rating)), x.timestamp])
    return buf.getvalue().encode("utf-8")


def filter_positive(log: InteractionLog, threshold: float) -> InteractionLog:
    """Keep interactions with ``rating >= threshold``; everything else is dropped."""
    return tuple(x for x in log if x.rating >= threshold)


def temporal_split(log: InteractionLog, test_fraction: float) -> Tuple[InteractionLog, InteractionLog]:
    """Global timestamp split: the latest ``ceil(test_fraction * n)`` rows go to test.

    Ties in timestamp keep their original row order (stable sort).
    """
    if not log:
        raise EmptyInputError("empty input")
    if not 0.0 < test_fraction < 1.0:
        raise EvaluationError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    ordered = sorted(log, key=lambda x: x.timestamp)
    n_test = math.ceil(test_fraction * len(ordered))
    cut = len(ordered) - n_test
    return tuple(ordered[:cut]), tuple(ordered[cut:])


def drop_cold(train: InteractionLog, test: InteractionLog) -> InteractionLog:
    """Restrict test to users and items that also occur in train."""
    users = {x.user for x in train}
    items = {x.item for x in train}
    return tuple(x for x in test if x.user in users and x.item in items)


def extract_ground_truth(test: InteractionLog) -> GroundTruth:
    relevant: dict = {}
    for x in test:
        items = relevant.setdefault(x.user, {})
        if x.item in items:
            raise DuplicateError(f"duplicate relevance ({x.user!r}, {x.item!r})")
        items[x.item] = x.rating
    return GroundTruth(relevant)


def split_protocol(log: InteractionLog, config: SplitConfig) -> Tuple[InteractionLog, InteractionLog]:
    """Threshold filter, then global timestamp split, then cold-start removal."""
    positive = filter_positive(log, config.positive_threshold)
    train, test = temporal_split(positive, config.test_fraction)
    return train, drop_cold(train, test)
