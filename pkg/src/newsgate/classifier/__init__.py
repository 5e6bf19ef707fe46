"""Machine analyzer: text preprocessing and a linear fake/real classifier."""

from .model import (
    DEFAULT_DIMS,
    FeatureVector,
    LabeledText,
    TrainedModel,
    accuracy,
    classify_and_rate,
    featurize,
    hash_token,
    logistic_gradient,
    logistic_loss,
    rating_from_probability,
    read_corpus,
    stance_score,
    train,
    write_corpus,
)
from .text import Document, DocumentFrequency, preprocess, stem, tokenize

__all__ = [
    "DEFAULT_DIMS",
    "Document",
    "DocumentFrequency",
    "FeatureVector",
    "LabeledText",
    "TrainedModel",
    "accuracy",
    "classify_and_rate",
    "featurize",
    "hash_token",
    "logistic_gradient",
    "logistic_loss",
    "preprocess",
    "rating_from_probability",
    "read_corpus",
    "stance_score",
    "stem",
    "tokenize",
    "train",
    "write_corpus",
]
