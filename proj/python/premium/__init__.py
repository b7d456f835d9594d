"""Ensemble regression models with exact Shapley and ICE explanations."""

import json

from ._core import (
    Error,
    IoError,
    Model,
    NumericError,
    UsageError,
    ValidationError,
    evaluate,
    explain,
    ice,
    ingest,
    load_csv,
    metrics,
    reproduce,
    shap,
)
from ._core import train as _train
from ._core import tune as _tune


def train(dataset, out, model="rf", params=None, seed=42, jobs=1):
    """Fit one model on the training split; returns the training R^2."""
    return _train(str(dataset), str(out), model, json.dumps(params or {}), seed, jobs)


def tune(dataset, out, model="rf", grid=None, folds=5, seed=42, jobs=1):
    """Grid search; returns (best_params, best_mean_r2)."""
    best, score = _tune(str(dataset), str(out), model, None if grid is None else str(grid),
                        folds, seed, jobs)
    return json.loads(best), score


def fit(variant, x, y, feature_names=(), params=None, seed=42, jobs=1):
    return Model.fit(variant, x, y, list(feature_names), json.dumps(params or {}), seed, jobs)


__all__ = [
    "Error",
    "IoError",
    "Model",
    "NumericError",
    "UsageError",
    "ValidationError",
    "evaluate",
    "explain",
    "fit",
    "ice",
    "ingest",
    "load_csv",
    "metrics",
    "reproduce",
    "shap",
    "train",
    "tune",
]
