"""Domain types shared by the splitting, metric and harness modules.

User and item identifiers are opaque hashable tokens (``int`` or ``str``),
kept exactly as they came in. Ranks are 1-based everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Hashable, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

UserId = Hashable
ItemId = Hashable


class EvaluationError(ValueError):
    """Base class for every data or configuration error raised by the package."""


class SchemaError(EvaluationError):
    pass


class RowError(EvaluationError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateError(EvaluationError):
    pass


class EmptyInputError(EvaluationError):
    pass


class ConfigurationError(EvaluationError):
    pass


class DegenerateError(EvaluationError):
    """Per-user AUC is undefined: no positives or no negatives."""


class UnknownUserError(EvaluationError, KeyError):
    def __str__(self) -> str:
        return ValueError.__str__(self)


def id_sort_key(token: Hashable):
    """Total order over mixed int/str identifiers (ints first, then strings)."""
    if isinstance(token, (int, float)) and not isinstance(token, bool):
        return (0, token, "")
    return (1, 0, str(token))


@dataclass(frozen=True)
class Interaction:
    user: UserId
    item: ItemId
    rating: float
    timestamp: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.rating):
            raise EvaluationError(f"rating must be finite, got {self.rating!r}")
        if self.timestamp < 0:
            raise EvaluationError(f"timestamp must be >= 0, got {self.timestamp}")


InteractionLog = Tuple[Interaction, ...]


def check_cutoff(k: int) -> int:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ConfigurationError(f"cut-off must be a positive integer, got {k!r}")
    return k


class RankedPredictions(Mapping):
    """Per-user ranked lists of ``(item, score)``.

    Position in the list is the rank; scores must be non-increasing and items
    distinct within a user. Ties are kept in the given order.
    """

    def __init__(self, lists: Mapping[UserId, Iterable[Tuple[ItemId, float]]]):
        data = {}
        for user, rows in lists.items():
            rows = tuple((item, float(score)) for item, score in rows)
            seen = set()
            prev = math.inf
            for item, score in rows:
                if item in seen:
                    raise DuplicateError(f"duplicate prediction ({user!r}, {item!r})")
                seen.add(item)
                if math.isnan(score) or score > prev:
                    raise EvaluationError(
                        f"scores for user {user!r} must be non-increasing"
                    )
                prev = score
            data[user] = rows
        self._data = MappingProxyType(data)

    @classmethod
    def from_rows(cls, rows: Iterable[Tuple[UserId, ItemId, float]]) -> "RankedPredictions":
        """Build from ``(user, item, score)`` rows already ordered per user."""
        lists: dict = {}
        for user, item, score in rows:
            lists.setdefault(user, []).append((item, score))
        return cls(lists)

    def __getitem__(self, user: UserId) -> Tuple[Tuple[ItemId, float], ...]:
        return self._data[user]

    def __iter__(self) -> Iterator[UserId]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def items_for(self, user: UserId) -> Tuple[ItemId, ...]:
        """Ranked item ids for ``user``; empty when the user has no predictions."""
        return tuple(item for item, _ in self._data.get(user, ()))

    def __repr__(self) -> str:
        return f"RankedPredictions({len(self)} users)"


class GroundTruth(Mapping):
    """Per-user relevant items, each mapped to its rating (or ``None``)."""

    def __init__(self, relevant: Mapping[UserId, Mapping[ItemId, Optional[float]]]):
        data = {}
        for user, items in relevant.items():
            if not isinstance(items, Mapping):
                items = {item: None for item in _distinct(user, items)}
            if len(items) == 0:
                raise EvaluationError(f"user {user!r} has no relevant items")
            data[user] = MappingProxyType(
                {i: (None if r is None else float(r)) for i, r in items.items()}
            )
        self._data = MappingProxyType(data)

    def __getitem__(self, user: UserId) -> Mapping[ItemId, Optional[float]]:
        return self._data[user]

    def __iter__(self) -> Iterator[UserId]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def has_ratings(self) -> bool:
        return all(r is not None for rel in self._data.values() for r in rel.values())

    def __repr__(self) -> str:
        return f"GroundTruth({len(self)} users)"


def _distinct(user, items: Sequence) -> list:
    items = list(items)
    if len(set(items)) != len(items):
        raise DuplicateError(f"duplicate relevant item for user {user!r}")
    return items


def truncate(preds: RankedPredictions, k: int) -> RankedPredictions:
    """Keep the first ``k`` entries of every user's list."""
    check_cutoff(k)
    return RankedPredictions({u: rows[:k] for u, rows in preds.items()})


def rank_of(preds: RankedPredictions, user: UserId, item: ItemId) -> Optional[int]:
    if user not in preds:
        raise UnknownUserError(f"user not in predictions: {user!r}")
    for pos, (candidate, _) in enumerate(preds[user], start=1):
        if candidate == item:
            return pos
    return None
