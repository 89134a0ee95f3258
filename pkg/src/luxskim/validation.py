"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

__all__ = ["as_matrix", "as_vector", "as_labels", "check_fitted"]


def as_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"{name} must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_vector(x, dim: int, name: str = "x") -> np.ndarray:
    """Coerce to a finite 1-D float64 array of the expected length."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if x.shape[0] != dim:
        raise ValueError(f"{name} has {x.shape[0]} features, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def as_labels(y, n_rows: int) -> np.ndarray:
    """Coerce labels to a string array matching the row count."""
    y = np.asarray(y, dtype=object)
    if y.ndim != 1:
        raise ValueError(f"y must be 1-D, got shape {y.shape}")
    if y.shape[0] != n_rows:
        raise ValueError(f"y has {y.shape[0]} entries for {n_rows} rows")
    return np.array([str(v) for v in y], dtype=object)


def check_fitted(estimator, attribute: str = "classes_") -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
