"""Input validation helpers shared across estimators and functions."""

from __future__ import annotations

import numpy as np
from scipy import sparse


def check_matrix(X, *, allow_sparse: bool = True, name: str = "X"):
    """Validate a 2-D numeric matrix: finite entries, float dtype.

    Accepts dense arrays and, when allowed, scipy CSR/CSC matrices.
    Returns the validated matrix (dense as float64 ndarray, sparse as CSR).
    """
    if sparse.issparse(X):
        if not allow_sparse:
            raise TypeError(f"{name} must be dense for this operation")
        X = X.tocsr().astype(np.float64)
        if X.nnz and not np.isfinite(X.data).all():
            raise ValueError(f"{name} contains NaN or Inf")
        return X
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def as_dense_rows(X) -> np.ndarray:
    """Return X as a dense float64 array, densifying sparse input."""
    if sparse.issparse(X):
        return np.asarray(X.todense(), dtype=np.float64)
    return np.asarray(X, dtype=np.float64)


def row_norms(X) -> np.ndarray:
    """Euclidean norm of every row, dense or sparse."""
    if sparse.issparse(X):
        return np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    return np.linalg.norm(X, axis=1)


def check_random_seed(seed) -> int:
    """Normalize a seed argument to a plain non-negative int."""
    if seed is None:
        return 0
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return seed
