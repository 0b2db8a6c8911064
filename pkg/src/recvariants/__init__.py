"""Variant-explicit offline evaluation for top-k recommenders."""

from .auc import (
    GaucWeighting,
    ScoredLabels,
    group_auc,
    limited_auc,
    ratio_of_averages_auc,
    stacked_auc,
    truncated_group_auc,
    user_pairwise_auc,
)
from .core import (
    ConfigurationError,
    DegenerateError,
    EvaluationError,
    GroundTruth,
    Interaction,
    RankedPredictions,
    rank_of,
    truncate,
)
from .harness import (
    EvaluationReport,
    VariantSpec,
    evaluate_matrix,
    fingerprint,
    registry_default,
    render_report,
)
from .ingest import (
    SplitConfig,
    drop_cold,
    extract_ground_truth,
    filter_positive,
    parse_interactions,
    parse_predictions,
    temporal_split,
)
from .topk import (
    ApAveraging,
    ApDenominator,
    Gain,
    HitRateVariant,
    IdealTruncation,
    NdcgParams,
    RecallDenominator,
    RrVariant,
    average_precision_at_k,
    hit_rate_at_k,
    mean_over_users,
    ndcg_at_k,
    precision_at_k,
    recall_at_k,
    reciprocal_rank_at_k,
)

__version__ = "0.1.0"
