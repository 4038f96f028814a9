"""PCA and LDA projections.

Both fits return a :class:`ProjectionModel`; :func:`project` applies either
kind as ``(X - mean) @ basis``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidComponentCount, SingleClass, TooFewSamples

SW_RIDGE = 1e-8
SW_RIDGE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectionModel:
    kind: str  # "pca" or "lda"
    mean: np.ndarray
    basis: np.ndarray  # p x d, columns are components
    component_scores: np.ndarray

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def p(self) -> int:
        return self.basis.shape[0]


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {X.shape}")
    return X


def pca_fit(X, d: int) -> ProjectionModel:
    X = _as_matrix(X)
    n, p = X.shape
    if n < 2:
        raise TooFewSamples("PCA needs at least 2 samples")
    if not 1 <= d <= min(n - 1, p):
        raise InvalidComponentCount(f"d={d} outside [1, {min(n - 1, p)}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:d]
    scores = np.clip(evals[order], 0.0, None)
    basis = _fix_signs(evecs[:, order])
    return ProjectionModel("pca", _frozen(mean), _frozen(basis), _frozen(scores))


def scatter_matrices(X, y) -> tuple[np.ndarray, np.ndarray, np.ndarray, list]:
    """Return (S_W, S_B, overall mean, class list) with unnormalized sums."""
    X = _as_matrix(X)
    y = np.asarray(y)
    classes = list(dict.fromkeys(y.tolist()))
    mu = X.mean(axis=0)
    p = X.shape[1]
    S_W = np.zeros((p, p))
    S_B = np.zeros((p, p))
    for c in classes:
        Xc = X[y == c]
        mc = Xc.mean(axis=0)
        D = Xc - mc
        S_W += D.T @ D
        dm = (mc - mu)[:, None]
        S_B += len(Xc) * (dm @ dm.T)
    return S_W, S_B, mu, classes


def regularize_within(S_W: np.ndarray) -> np.ndarray:
    p = S_W.shape[0]
    tr = np.trace(S_W)
    eps = SW_RIDGE * tr / p if tr > 0 else SW_RIDGE_FLOOR
    return S_W + eps * np.eye(p)


def lda_fit(X, y, d: int) -> ProjectionModel:
    """Fisher discriminant directions from ``S_B v = lambda S_W v``.

    ``S_W`` gets a trace-scaled ridge, is Cholesky-factored as ``L L^T`` and
    the problem is reduced to the symmetric ``L^-1 S_B L^-T w = lambda w``.
    At most ``C - 1`` components are returned; each is rescaled to unit norm.
    """
    X = _as_matrix(X)
    y = np.asarray(y)
    if len(y) != X.shape[0]:
        raise DimensionMismatch("X and y lengths differ")
    n, p = X.shape
    S_W, S_B, mu, classes = scatter_matrices(X, y)
    C = len(classes)
    if C < 2:
        raise SingleClass("LDA needs at least 2 classes")
    if n < C:
        raise TooFewSamples(f"{n} samples for {C} classes")
    if d < 1:
        raise InvalidComponentCount("d must be >= 1")
    k = min(d, C - 1, p)

    L = np.linalg.cholesky(regularize_within(S_W))
    A = scipy.linalg.solve_triangular(L, S_B, lower=True)
    M = scipy.linalg.solve_triangular(L, A.T, lower=True)
    M = (M + M.T) / 2
    evals, W = np.linalg.eigh(M)
    order = np.argsort(evals, kind="stable")[::-1][:k]
    V = scipy.linalg.solve_triangular(L.T, W[:, order], lower=False)
    V = V / np.linalg.norm(V, axis=0)
    scores = np.clip(evals[order], 0.0, None)
    return ProjectionModel("lda", _frozen(mu), _frozen(_fix_signs(V)), _frozen(scores))


def project(model: ProjectionModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.p:
        raise DimensionMismatch(f"expected {model.p} columns, got {X.shape[1]}")
    return (X - model.mean) @ model.basis
