"""Synthetic corpora for tests, benchmarks and the demo scripts.

A low-rank latent model drives both the interaction log and the
predictions, so rankings carry real signal and AUC variants separate.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from .core import GroundTruth, Interaction, InteractionLog, RankedPredictions


def user_id(n: int) -> str:
    return f"u{n:05d}"


def item_id(n: int) -> str:
    return f"i{n:05d}"


class LatentModel:
    def __init__(self, n_users: int, n_items: int, dim: int = 8, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.n_users = n_users
        self.n_items = n_items
        self.users = rng.normal(size=(n_users, dim)) / np.sqrt(dim)
        self.items = rng.normal(size=(n_items, dim)) / np.sqrt(dim)
        self.popularity = rng.normal(scale=0.7, size=n_items)

    def affinity(self) -> np.ndarray:
        return self.users @ self.items.T + self.popularity


def interaction_log(model: LatentModel, n_rows: int, seed: int = 0, activity_skew: float = 0.0) -> InteractionLog:
    """About ``n_rows`` unique (user, item) interactions with half-star ratings.

    ``activity_skew`` is the sigma of lognormal per-user activity weights;
    0 gives every user the same expected number of rows.
    """
    rng = np.random.default_rng(seed)
    aff = model.affinity()
    weights = rng.lognormal(sigma=activity_skew, size=model.n_users) if activity_skew > 0 else np.ones(model.n_users)
    per_user = rng.multinomial(n_rows, weights / weights.sum())
    rows = []
    for u in range(model.n_users):
        n = int(min(per_user[u], model.n_items))
        if n == 0:
            continue
        logits = 2.0 * aff[u]
        p = np.exp(logits - logits.max())
        p /= p.sum()
        items = rng.choice(model.n_items, size=n, replace=False, p=p)
        raw = 3.5 + 1.2 * aff[u, items] + rng.normal(scale=0.6, size=n)
        ratings = np.clip(np.round(raw * 2) / 2, 0.5, 5.0)
        times = rng.integers(0, 1_000_000, size=n)
        for i, r, t in zip(items, ratings, times):
            rows.append(Interaction(user_id(u), item_id(int(i)), float(r), int(t)))
    order = rng.permutation(len(rows))
    return tuple(rows[j] for j in order)


def predictions(
    model: LatentModel,
    train: InteractionLog,
    users,
    depth: int = 100,
    noise: float = 0.5,
    seed: int = 0,
) -> RankedPredictions:
    """Top-``depth`` lists from noisy affinities, training items excluded."""
    rng = np.random.default_rng(seed)
    seen: Dict[str, set] = {}
    for x in train:
        seen.setdefault(x.user, set()).add(int(x.item[1:]))
    aff = model.affinity()
    out = {}
    for u in sorted(users):
        idx = int(u[1:])
        scores = aff[idx] + rng.normal(scale=noise, size=model.n_items)
        if seen.get(u):
            scores[list(seen[u])] = -np.inf
        top = np.argsort(-scores, kind="stable")[:depth]
        top = top[np.isfinite(scores[top])]
        out[u] = [(item_id(int(i)), float(np.round(scores[i], 9))) for i in top]
    return RankedPredictions(out)


def random_instance(
    rng: np.random.Generator,
    max_users: int = 50,
    max_items: int = 100,
    k: int = 20,
    ties: bool = False,
    r_range: Optional[Tuple[int, int]] = None,
) -> Tuple[RankedPredictions, GroundTruth]:
    """Small random predictions / ground truth pair with heterogeneous r(u).

    Lists are at most ``max_items`` long; ratings are drawn from {1.0, ..., 5.0}
    in half steps so weighted NDCG is exercised.
    """
    n_users = int(rng.integers(1, max_users + 1))
    n_items = int(rng.integers(2, max_items + 1))
    preds, truth = {}, {}
    for u in range(n_users):
        length = int(rng.integers(0, n_items + 1))
        ranked = rng.permutation(n_items)[:length]
        if ties:
            scores = np.sort(rng.integers(0, 5, size=length))[::-1].astype(float)
        else:
            scores = np.linspace(1.0, 0.0, num=length + 1)[:length]
        preds[user_id(u)] = [(item_id(int(i)), float(s)) for i, s in zip(ranked, scores)]
        lo, hi = r_range or (1, n_items)
        r = int(rng.integers(lo, min(hi, n_items) + 1))
        rel = rng.permutation(n_items)[:r]
        truth[user_id(u)] = {item_id(int(i)): float(rng.integers(2, 11)) / 2 for i in rel}
    return RankedPredictions(preds), GroundTruth(truth)
