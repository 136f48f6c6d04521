"""Joint caption+molecule models and head-to-head error tables."""

from .pairs import (
    EmptySplit,
    PairErrorTable,
    SingleSourceScores,
    head_to_head,
    pair_seed,
    per_molecule_error,
    sigmoid,
    single_source_scores,
)
from .standardize import (
    EmptyInput,
    FeatureStandardizer,
    NonFiniteFeature,
    standardize_fit,
)
from .svm import (
    LinearEpsilonSVR,
    LinearHingeSVC,
    LinearModel,
    SingleClassInput,
    SvmHyperparams,
    predict,
    predict_many,
    train_classifier,
    train_regressor,
)

__all__ = [
    "EmptyInput",
    "EmptySplit",
    "FeatureStandardizer",
    "LinearEpsilonSVR",
    "LinearHingeSVC",
    "LinearModel",
    "NonFiniteFeature",
    "PairErrorTable",
    "SingleClassInput",
    "SingleSourceScores",
    "SvmHyperparams",
    "head_to_head",
    "pair_seed",
    "per_molecule_error",
    "predict",
    "predict_many",
    "sigmoid",
    "single_source_scores",
    "standardize_fit",
    "train_classifier",
    "train_regressor",
]
