"""Audio deepfake detection benchmark: metrics, features, models and reports."""

from ._core import (
    MODELS,
    build_report,
    compute_eer,
    compute_tdcf,
    expand_grid,
    extract_features,
    feature_effect,
    apply_length_policy,
    generate_synthetic_corpus,
    import_published,
    load_audio,
    parameter_count,
    score_model,
)

__all__ = [
    "MODELS",
    "apply_length_policy",
    "build_report",
    "compute_eer",
    "compute_tdcf",
    "expand_grid",
    "extract_features",
    "feature_effect",
    "generate_synthetic_corpus",
    "import_published",
    "load_audio",
    "parameter_count",
    "score_model",
]
