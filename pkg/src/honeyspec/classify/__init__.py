"""KNN and SVM classifiers behind a shared ``fit_classifier`` / ``.predict`` contract."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from ._labels import label_array, vocabulary
from .knn import DEFAULT_K, KnnModel, knn_fit, knn_predict
from .svm import (
    DEFAULT_C,
    DEFAULT_MAX_PASSES,
    DEFAULT_TOL,
    KernelSpec,
    SvmModel,
    kernel_matrix,
    svm_decision,
    svm_fit,
    svm_predict,
)


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"  # "knn" or "svm"
    k: int = DEFAULT_K
    kernel: str = "linear"
    C: float = DEFAULT_C
    gamma: float | None = None
    tol: float = DEFAULT_TOL
    max_passes: int = DEFAULT_MAX_PASSES

    def __post_init__(self):
        if self.kind not in ("knn", "svm"):
            raise ValueError(f"unknown classifier {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "knn":
            return "KNN"
        return "Linear SVM" if self.kernel == "linear" else "RBF SVM"

    def describe(self) -> dict:
        if self.kind == "knn":
            return {"classifier": "knn", "k": self.k}
        out = {"classifier": "svm", "kernel": self.kernel, "C": self.C, "tol": self.tol}
        if self.kernel == "rbf":
            out["gamma"] = "auto" if self.gamma is None else self.gamma
        return out


@dataclass(frozen=True, eq=False)
class ConstantModel:
    """Predicts one label everywhere; used when training data holds a single class."""

    classes: tuple
    d: int

    kind = "constant"

    def predict(self, Q) -> np.ndarray:
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim == 1:
            Q = Q[None, :]
        if Q.shape[1] != self.d:
            raise DimensionMismatch(f"expected {self.d} columns, got {Q.shape[1]}")
        return label_array(self.classes, np.zeros(Q.shape[0], dtype=np.int64))


TrainedClassifier = KnnModel | SvmModel | ConstantModel


def fit_classifier(X, y, spec: ClassifierSpec, classes=None) -> TrainedClassifier:
    """Fit the classifier described by ``spec``; ``classes`` fixes the label vocabulary order."""
    if spec.kind == "knn":
        return knn_fit(X, y, spec.k, classes=classes)
    return svm_fit(
        X,
        y,
        KernelSpec(spec.kernel, spec.gamma),
        C=spec.C,
        tol=spec.tol,
        max_passes=spec.max_passes,
        classes=classes,
    )


__all__ = [
    "ClassifierSpec",
    "ConstantModel",
    "KernelSpec",
    "KnnModel",
    "SvmModel",
    "TrainedClassifier",
    "fit_classifier",
    "kernel_matrix",
    "knn_fit",
    "knn_predict",
    "svm_decision",
    "svm_fit",
    "svm_predict",
    "vocabulary",
]
