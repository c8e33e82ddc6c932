"""Sentence readability regression with transformer ensembles."""

from ._core import (
    ConfigError,
    Error,
    FormatError,
    Lexicon,
    Model,
    bootstrap_study,
    cv_splits,
    ensemble_predict,
    extract_features,
    feature_names,
    load_corpus,
    load_embeddings,
    load_model,
    mapped_rmse,
    rmse,
    run,
    write_embeddings,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "Lexicon",
    "Model",
    "bootstrap_study",
    "cv_splits",
    "ensemble_predict",
    "extract_features",
    "feature_names",
    "load_corpus",
    "load_embeddings",
    "load_model",
    "mapped_rmse",
    "rmse",
    "run",
    "write_embeddings",
]
