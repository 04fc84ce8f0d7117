from .features import FeatureDataset, FeatureExtractor, fuse
from .classifier import FusionClassifier, TrainConfig, TrainResult, train
from .metrics import (
    Metrics,
    Prediction,
    evaluate,
    format_metrics_table,
    metrics_to_tsv,
    parse_predictions_tsv,
    predictions_to_tsv,
    select_top_k,
)
from .baselines import baseline_ext, baseline_pacsum, baseline_textrank

__all__ = [
    "FeatureDataset",
    "FeatureExtractor",
    "FusionClassifier",
    "Metrics",
    "Prediction",
    "TrainConfig",
    "TrainResult",
    "baseline_ext",
    "baseline_pacsum",
    "baseline_textrank",
    "evaluate",
    "format_metrics_table",
    "fuse",
    "metrics_to_tsv",
    "parse_predictions_tsv",
    "predictions_to_tsv",
    "select_top_k",
    "train",
]
