"""Brute-force Euclidean k-nearest-neighbour classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, EmptyTrainingSet, KOutOfRange, NonFiniteInput
from ._labels import encode, label_array, vocabulary

DEFAULT_K = 5
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True, eq=False)
class KnnModel:
    train_X: np.ndarray
    train_y: np.ndarray  # indices into ``classes``
    k: int
    classes: tuple

    kind = "knn"

    def predict(self, Q) -> np.ndarray:
        return knn_predict(self, Q)


def knn_fit(X, y, k: int = DEFAULT_K, classes=None) -> KnnModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("KNN needs at least one training row")
    if len(y) != X.shape[0]:
        raise DimensionMismatch("X and y lengths differ")
    if not 1 <= k <= X.shape[0]:
        raise KOutOfRange(f"k={k} outside [1, {X.shape[0]}]")
    if not np.isfinite(X).all():
        raise NonFiniteInput("training matrix has non-finite entries")
    vocab = vocabulary(y) if classes is None else tuple(classes)
    codes = encode(y, vocab)
    Xs = X.copy()
    Xs.flags.writeable = False
    codes.flags.writeable = False
    return KnnModel(train_X=Xs, train_y=codes, k=int(k), classes=vocab)


def _sq_distances(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    diff = Q[:, None, :] - X[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def vote(codes: np.ndarray, dists: np.ndarray, n_classes: int) -> int:
    """Majority vote; ties go to the smaller summed distance, then the earlier class."""
    counts = np.bincount(codes, minlength=n_classes)
    best = counts.max()
    tied = np.flatnonzero(counts == best)
    if len(tied) == 1:
        return int(tied[0])
    sums = np.bincount(codes, weights=dists, minlength=n_classes)[tied]
    return int(tied[np.flatnonzero(sums == sums.min())[0]])


def knn_predict(model: KnnModel, Q) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    n, d = model.train_X.shape
    if Q.shape[1] != d:
        raise DimensionMismatch(f"expected {d} columns, got {Q.shape[1]}")
    C = len(model.classes)
    out = np.empty(Q.shape[0], dtype=np.int64)
    step = max(1, _CHUNK_ELEMENTS // max(1, n * d))
    for start in range(0, Q.shape[0], step):
        D2 = _sq_distances(Q[start : start + step], model.train_X)
        # stable sort: equal distances keep training-row order
        nearest = np.argsort(D2, axis=1, kind="stable")[:, : model.k]
        for r in range(D2.shape[0]):
            idx = nearest[r]
            out[start + r] = vote(model.train_y[idx], np.sqrt(D2[r, idx]), C)
    return label_array(model.classes, out)
