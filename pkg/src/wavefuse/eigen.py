"""Eigenface feature extraction by principal component analysis.

Training images are flattened to vectors, mean-centered, and an orthonormal
eigenbasis of their covariance (1/N convention) is computed via the snapshot
method: eigendecompose the N x N Gram matrix (1/N) A A^T instead of the
D x D covariance, then map each Gram eigenvector u back to image space as
A^T u and normalize. That keeps the cost O(N^2 D) for N images of D pixels,
which matters because D is the pixel count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

AUTO = "auto"

_ENERGY_FRACTION = 0.95


@dataclass
class EigenspaceModel:
    """Mean image, eigenvalues, and row-stacked orthonormal basis (k x D)."""

    input_dims: tuple[int, int]
    mean: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray

    @property
    def k(self) -> int:
        return self.basis.shape[0]


def _flatten_stack(images) -> tuple[np.ndarray, tuple[int, int]]:
    if len(images) == 0:
        raise DataError("no training images")
    dims = np.asarray(images[0]).shape
    rows = []
    for i, img in enumerate(images):
        img = np.asarray(img, dtype=np.float64)
        if img.shape != dims:
            raise DataError(f"image {i} dims {img.shape} differ from {dims}")
        rows.append(img.reshape(-1))
    return np.stack(rows), dims


def fit_eigenspace(images, k=AUTO) -> EigenspaceModel:
    """Fit an eigenface basis from same-shape images.

    ``k`` is the number of components: a positive int, or ``"auto"`` to keep
    the smallest number of components capturing at least 95% of the total
    eigenvalue mass (capped at N - 1). Requesting more components than the
    data's rank supports is an error.
    """
    stack, dims = _flatten_stack(images)
    n = stack.shape[0]
    if n < 2:
        raise DataError(f"need at least 2 training images, got {n}")
    mean = stack.mean(axis=0)
    centered = stack - mean
    gram = (centered @ centered.T) / n
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals = np.maximum(evals[order], 0.0)
    evecs = evecs[:, order]

    rank = int(np.count_nonzero(evals > evals[0] * 1e-9 + 1e-18))
    if k == AUTO:
        limit = min(n - 1, rank)
        if limit == 0:
            raise DataError("training images are all identical; eigenspace is empty")
        total = evals.sum()
        cum = np.cumsum(evals[:limit])
        keep = int(np.searchsorted(cum, _ENERGY_FRACTION * total) + 1)
        keep = min(keep, limit)
    else:
        keep = int(k)
        if keep < 1:
            raise DataError(f"component count must be >= 1, got {k}")
        if keep > rank:
            raise DataError(
                f"requested {keep} components but data rank is only {rank}"
            )

    basis = centered.T @ evecs[:, :keep]
    norms = np.linalg.norm(basis, axis=0)
    basis = (basis / norms).T
    # Sign convention: first entry of largest magnitude made positive, so a
    # fitted model is reproducible rather than solver-dependent.
    mags = np.abs(basis)
    lead = np.argmax(mags == mags.max(axis=1, keepdims=True), axis=1)
    flips = np.where(basis[np.arange(keep), lead] < 0, -1.0, 1.0)
    basis = basis * flips[:, None]
    return EigenspaceModel(
        input_dims=dims, mean=mean, eigenvalues=evals[:keep], basis=basis
    )


def project(model: EigenspaceModel, img: np.ndarray) -> np.ndarray:
    """Project one image onto the basis, returning its k feature weights."""
    img = np.asarray(img, dtype=np.float64)
    if img.shape != model.input_dims:
        raise DataError(f"image dims {img.shape} differ from model {model.input_dims}")
    return model.basis @ (img.reshape(-1) - model.mean)


def reconstruct_from_features(model: EigenspaceModel, features: np.ndarray) -> np.ndarray:
    """Synthesize the image the features encode: mean + weighted eigenfaces."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.k,):
        raise DataError(f"expected {model.k} features, got shape {features.shape}")
    flat = model.mean + model.basis.T @ features
    return flat.reshape(model.input_dims)
