"""Movie genre prediction from rating indicators with a multivariate Bernoulli naive Bayes model."""
from .correlation import GenreCorrelationMatrix, compute_correlation, is_similar
from .dataset import (
    Dataset,
    FeatureVector,
    GenreAssignment,
    IndicatorMatrix,
    RatingEvents,
    ValidationReport,
    build_indicator_matrix,
    load_movielens,
    load_movielens_dir,
    parse_items,
    parse_ratings,
    read_dataset,
    validate_dataset,
    write_dataset,
)
from .evaluation import (
    AccuracyPair,
    EvalOptions,
    EvaluationReport,
    SplitSpec,
    evaluate_once,
    learning_curve,
    split,
)
from .model import (
    PosteriorDistribution,
    PreferenceModel,
    estimate_priors,
    genre_weights,
    load_model,
    log_likelihood,
    posterior,
    predict,
    save_model,
    train_preference_model,
)

__version__ = "0.1.0"

__all__ = [
    "GenreCorrelationMatrix",
    "compute_correlation",
    "is_similar",
    "Dataset",
    "FeatureVector",
    "GenreAssignment",
    "IndicatorMatrix",
    "RatingEvents",
    "ValidationReport",
    "build_indicator_matrix",
    "load_movielens",
    "load_movielens_dir",
    "parse_items",
    "parse_ratings",
    "read_dataset",
    "validate_dataset",
    "write_dataset",
    "AccuracyPair",
    "EvalOptions",
    "EvaluationReport",
    "SplitSpec",
    "evaluate_once",
    "learning_curve",
    "split",
    "PosteriorDistribution",
    "PreferenceModel",
    "estimate_priors",
    "genre_weights",
    "load_model",
    "log_likelihood",
    "posterior",
    "predict",
    "save_model",
    "train_preference_model",
]
