"""Principal component analysis on feature matrices.

Fit uses the singular value decomposition of the centered data; eigenvalues
of the sample covariance (divisor N-1) are recovered from the singular
values. Component signs follow a fixed convention so repeated fits and
cross-implementation comparisons are stable: the largest-magnitude entry of
each component is made positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import textio
from .data import validate_feature_matrix
from .errors import DimensionError, InsufficientDataError

__all__ = ["PcaModel", "pca_fit", "pca_transform", "pca_inverse",
           "save_pca", "load_pca"]


@dataclass(frozen=True)
class PcaModel:
    """Orthonormal projection onto the leading covariance eigenvectors."""

    mean: np.ndarray                 # (M,)
    components: np.ndarray           # (K, M), rows orthonormal
    explained_variance: np.ndarray   # (K,), non-increasing
    notes: tuple = field(default=(), compare=False)

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def n_features(self) -> int:
        return self.components.shape[1]


def _apply_sign_convention(components: np.ndarray) -> np.ndarray:
    fixed = components.copy()
    for row in fixed:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return fixed


def pca_fit(X, retain=0.95) -> PcaModel:
    """Fit a PCA model retaining `retain` components (int) or enough
    components to cover a `retain` fraction of the variance (float in (0,1]).

    A float of exactly 1.0 keeps the numerical rank of the centered data.
    Integer counts above min(N-1, M) are clamped, with a note recorded on
    the model.
    """
    X = validate_feature_matrix(X)
    n, m = X.shape
    if n < 2:
        raise InsufficientDataError(
            f"need at least 2 samples to fit a covariance, got {n}")

    mean = X.mean(axis=0)
    centered = X - mean
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)
    eigenvalues = sing ** 2 / (n - 1)
    max_rank = min(n - 1, m)
    rank_tol = sing[0] * max(n, m) * np.finfo(np.float64).eps if sing.size else 0.0
    rank = int(np.sum(sing > rank_tol))

    notes = []
    if isinstance(retain, (int, np.integer)) and not isinstance(retain, bool):
        k = int(retain)
        if k < 1:
            raise DimensionError(f"component count must be >= 1, got {k}")
        if k > max_rank:
            notes.append(
                f"requested {k} components clamped to min(N-1, M) = {max_rank}")
            k = max_rank
    else:
        fraction = float(retain)
        if not 0.0 < fraction <= 1.0:
            raise DimensionError(
                f"variance fraction must be in (0, 1], got {fraction}")
        if fraction == 1.0 or eigenvalues.sum() <= 0.0:
            k = rank
        else:
            cumulative = np.cumsum(eigenvalues) / eigenvalues.sum()
            k = int(np.searchsorted(cumulative, fraction - 1e-12) + 1)
            k = min(k, max_rank)

    components = _apply_sign_convention(vt[:k])
    return PcaModel(mean=mean,
                    components=components,
                    explained_variance=eigenvalues[:k].copy(),
                    notes=tuple(notes))


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = validate_feature_matrix(X)
    if X.shape[1] != model.n_features:
        raise DimensionError(
            f"data has {X.shape[1]} columns, model expects {model.n_features}")
    return (X - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != model.n_components:
        raise DimensionError(
            f"projection has shape {Z.shape}, model expects (*, {model.n_components})")
    return Z @ model.components + model.mean


def save_pca(path, model: PcaModel) -> None:
    textio.write_blocks(path, {
        "mean": model.mean,
        "components": model.components,
        "explained_variance": model.explained_variance,
    })


def load_pca(path) -> PcaModel:
    blocks = textio.read_blocks(path)
    components = np.atleast_2d(blocks["components"])
    return PcaModel(mean=blocks["mean"],
                    components=components,
                    explained_variance=np.atleast_1d(blocks["explained_variance"]))
