"""Per-feature standardization fit on training rows only."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin


class EmptyInput(ValueError):
    pass


class NonFiniteFeature(ValueError):
    pass


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    out = np.asarray(X, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={out.ndim}")
    if not np.isfinite(out).all():
        raise NonFiniteFeature(f"{name} contains non-finite values")
    return out


def as_float_vector(y, name: str = "y") -> np.ndarray:
    out = np.asarray(y, dtype=np.float64)
    if out.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={out.ndim}")
    if not np.isfinite(out).all():
        raise NonFiniteFeature(f"{name} contains non-finite values")
    return out


class FeatureStandardizer(BaseEstimator, TransformerMixin):
    """Center by mean and divide by population std; zero-variance gets scale 1."""

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        if X.shape[0] < 1:
            raise EmptyInput("standardizer needs at least one row")
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)  # population std, ddof=0
        self.scale_ = np.where(std > 0.0, std, 1.0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return (X - self.mean_) / self.scale_


def standardize_fit(rows) -> FeatureStandardizer:
    return FeatureStandardizer().fit(rows)
