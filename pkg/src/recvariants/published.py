"""Published MovieLens-20m / EASE values (k=20) keyed by canonical variant name.

Only usable with user-supplied predictions for that exact setup; values
are reported to three decimals (``ndcg@k/weighted`` to two).
"""

ML20M_EASE_K = 20
ML20M_EASE_TOLERANCE = 0.001

ML20M_EASE = {
    "precision@k": 0.058,
    "recall@k/total_relevant": 0.096,
    "hitrate@k/indicator": 0.475,
    "hitrate@k/hit_count": 1.15,
    "mrr@k/first_hit": 0.186,
    "mrr@k/sum_of_hits": 0.275,
    "map@k/by_k": 0.023,
    "map@k/by_relevant": 0.032,
    "map@k/by_min": 0.039,
    "map@k/by_k_all_positions": 0.073,
    "ndcg@k/binary": 0.093,
    "ndcg@k/weighted": 0.09,
    "ndcg@k/binary_unnormalized": 0.463,
    "auc/stacked": 0.687,
    "auc/ratio_of_averages": 0.688,
    "auc/gauc_uniform": 0.705,
    "auc/gauc_weighted": 0.858,
    "auc/gauc@k": 0.283,
    "auc/lauc@k": 0.112,
}


def compare(report, tolerance: float = ML20M_EASE_TOLERANCE):
    """Rows of (name, published, computed, ok) for every published variant in ``report``."""
    rows = []
    for cell in report.cells:
        if cell.spec.name in ML20M_EASE:
            ref = ML20M_EASE[cell.spec.name]
            rows.append((cell.spec.name, ref, cell.value, abs(cell.value - ref) <= tolerance))
    return rows
