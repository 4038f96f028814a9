"""One classification stage: optional standardizer, optional projection, classifier."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classify import ClassifierSpec, ConstantModel, TrainedClassifier, fit_classifier
from .dataset import Standardizer, standardize_apply, standardize_fit
from .dimred import ProjectionModel, lda_fit, pca_fit, project
from .errors import DimensionMismatch, NonFiniteInput

log = logging.getLogger(__name__)

DEFAULT_DIMS = 10


@dataclass(frozen=True)
class FeatureSpec:
    """Feature extraction choice; ``dims=None`` means the kind's default."""

    kind: str = "lda"  # "none", "pca" or "lda"
    dims: int | None = DEFAULT_DIMS

    def __post_init__(self):
        if self.kind not in ("none", "pca", "lda"):
            raise ValueError(f"unknown feature kind {self.kind!r}")

    @property
    def label(self) -> str:
        return {"none": "Original features", "pca": "PCA features", "lda": "LDA features"}[self.kind]

    def describe(self) -> dict:
        if self.kind == "none":
            return {"features": "none"}
        return {"features": self.kind, "dims": "auto" if self.dims is None else self.dims}


@dataclass(frozen=True, eq=False)
class StageModel:
    projection: ProjectionModel | None
    classifier: TrainedClassifier
    standardizer: Standardizer | None = None

    @property
    def classes(self) -> tuple:
        return self.classifier.classes

    def features(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if self.standardizer is not None:
            if X.shape[1] != len(self.standardizer.mean):
                raise DimensionMismatch(f"expected {len(self.standardizer.mean)} bands, got {X.shape[1]}")
            X = standardize_apply(self.standardizer, X)
        if self.projection is not None:
            X = project(self.projection, X)
        return X

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if not np.isfinite(X).all():
            raise NonFiniteInput("input spectra contain non-finite values")
        return self.classifier.predict(self.features(X))


def resolve_dims(features: FeatureSpec, n_classes: int, n: int, p: int) -> int:
    """Component count actually used; LDA caps at C - 1 and defaults to it."""
    if features.kind == "lda":
        cap = max(1, n_classes - 1)
        if features.dims is None:
            return cap
        return min(features.dims, cap, p)
    dims = DEFAULT_DIMS if features.dims is None else features.dims
    return min(dims, p, max(1, n - 1))


def fit_projection(X: np.ndarray, y: np.ndarray, features: FeatureSpec) -> ProjectionModel | None:
    if features.kind == "none":
        return None
    n_classes = len(set(np.asarray(y).tolist()))
    d = resolve_dims(features, n_classes, X.shape[0], X.shape[1])
    if features.kind == "pca":
        return pca_fit(X, d)
    return lda_fit(X, y, d)


def fit_stage(
    X,
    y,
    features: FeatureSpec,
    classifier: ClassifierSpec,
    classes=None,
    standardize: bool = False,
    standardizer: Standardizer | None = None,
) -> StageModel:
    """Fit standardizer (unless one is supplied), projection and classifier on ``X, y`` only.

    A single-class ``y`` yields a :class:`ConstantModel` with no projection.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if standardizer is None and standardize:
        standardizer = standardize_fit(X)
    Z = standardize_apply(standardizer, X) if standardizer is not None else X
    present = set(y.tolist())
    if len(present) == 1:
        only = next(iter(present))
        return StageModel(None, ConstantModel(classes=(only,), d=Z.shape[1]), standardizer)
    projection = fit_projection(Z, y, features)
    F = project(projection, Z) if projection is not None else Z
    model = fit_classifier(F, y, classifier, classes=classes)
    return StageModel(projection, model, standardizer)
