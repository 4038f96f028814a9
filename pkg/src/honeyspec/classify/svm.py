"""Soft-margin kernel SVM trained one-vs-rest with a pairwise dual solver.

Each binary problem minimises ``0.5 a'Qa - sum(a)`` with ``0 <= a <= C`` and
``y'a = 0`` (``Q_ij = y_i y_j K(x_i, x_j)``). Every step picks the maximal
violating pair (second-order choice for the second index), solves the
two-variable subproblem in closed form and updates the gradient. The loop
stops once ``max(-y G | up) - min(-y G | low) <= tol``.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateLabels, DimensionMismatch, NonFiniteInput
from ._labels import encode, label_array, vocabulary

log = logging.getLogger(__name__)

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-3
DEFAULT_MAX_PASSES = 200
_TAU = 1e-12
_MIN_PASS_LENGTH = 1000
_FULL_KERNEL_MAX_N = 4000
_CACHE_BYTES = 256 * 2**20
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"  # "linear" or "rbf"
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and self.gamma is not None and not self.gamma > 0:
            raise ValueError("rbf gamma must be > 0")


def default_gamma(X: np.ndarray) -> float:
    """``1 / (d * mean column variance)``, or 1 when the data has no spread."""
    spread = float(np.mean(np.var(X, axis=0)))
    if not spread > 0:
        return 1.0
    return 1.0 / (X.shape[1] * spread)


def kernel_matrix(kernel: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kernel.kind == "linear":
        return A @ B.T
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, _CHUNK_ELEMENTS // max(1, B.shape[0] * B.shape[1]))
    for s in range(0, A.shape[0], step):
        diff = A[s : s + step, None, :] - B[None, :, :]
        out[s : s + step] = np.exp(-kernel.gamma * np.einsum("ijk,ijk->ij", diff, diff))
    return out


@dataclass(frozen=True, eq=False)
class BinaryProblem:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    kkt_violation: float
    iterations: int
    # full-length dual vector and +-1 labels; only present on freshly fitted models
    alpha: np.ndarray | None = None
    y: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class SvmModel:
    kernel: KernelSpec
    C: float
    classes: tuple
    problems: tuple[BinaryProblem, ...]
    tol: float

    kind = "svm"

    def decision(self, Q) -> np.ndarray:
        return svm_decision(self, Q)

    def predict(self, Q) -> np.ndarray:
        return svm_predict(self, Q)


class _KernelColumns:
    """Kernel columns of the training matrix, precomputed when small and LRU-cached otherwise."""

    def __init__(self, kernel: KernelSpec, X: np.ndarray):
        self.kernel = kernel
        self.X = X
        n = X.shape[0]
        self.full = kernel_matrix(kernel, X, X) if n <= _FULL_KERNEL_MAX_N else None
        if self.full is None:
            self.diag = np.ones(n) if kernel.kind == "rbf" else np.einsum("ij,ij->i", X, X)
        else:
            self.diag = np.diag(self.full).copy()
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self.capacity = max(2, _CACHE_BYTES // (8 * n))

    def column(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[:, i]
        col = self.cache.get(i)
        if col is not None:
            self.cache.move_to_end(i)
            return col
        col = kernel_matrix(self.kernel, self.X, self.X[i : i + 1])[:, 0]
        self.cache[i] = col
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return col


def solve_dual(cols: _KernelColumns, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Return (alpha, bias, final violation, iterations) for labels ``y`` in {-1, +1}."""
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0
    neg = ~pos
    it = 0
    while True:
        yG = -y * G
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (neg & (alpha < C)) | (pos & (alpha > 0))
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = int(up_idx[np.argmax(yG[up_idx])])
        m = yG[i]
        M = yG[low_idx].min()
        gap = m - M
        if gap <= tol or it >= max_iter:
            break
        Ki = cols.column(i)
        cand = low_idx[yG[low_idx] < m]
        b = m - yG[cand]
        a = cols.diag[i] + cols.diag[cand] - 2.0 * Ki[cand]
        a = np.where(a > 0, a, _TAU)
        j = int(cand[np.argmax(b * b / a)])
        Kj = cols.column(j)

        curv = cols.diag[i] + cols.diag[j] - 2.0 * Ki[j]
        lam = (m - yG[j]) / (curv if curv > 0 else _TAU)
        bound_i = C - alpha[i] if y[i] > 0 else alpha[i]
        bound_j = alpha[j] if y[j] > 0 else C - alpha[j]
        lam = min(lam, bound_i, bound_j)

        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        if lam == bound_i:
            alpha[i] = C if y[i] > 0 else 0.0
        if lam == bound_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        G += lam * y * (Ki - Kj)
        it += 1

    yG = -y * G
    free = (alpha > 0) & (alpha < C)
    bias = float(yG[free].mean()) if free.any() else float((m + M) / 2)
    return alpha, bias, float(gap), it


def svm_fit(
    X,
    y,
    kernel: KernelSpec | None = None,
    C: float = DEFAULT_C,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    classes=None,
) -> SvmModel:
    """Fit one binary soft-margin SVM per class against the rest.

    ``max_passes`` bounds the solver at ``max_passes * max(n, 1000)`` pair
    updates per binary problem (small, badly conditioned problems can need
    many more updates than rows). For a two-class vocabulary both problems are still solved
    so every class owns a decision column.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise DimensionMismatch("X must be n x d with len(y) == n")
    if not np.isfinite(X).all():
        raise NonFiniteInput("training matrix has non-finite entries")
    if not C > 0 or not tol > 0:
        raise ValueError("C and tol must be > 0")
    vocab = vocabulary(y) if classes is None else tuple(classes)
    codes = encode(y, vocab)
    if len(np.unique(codes)) < 2 or X.shape[0] < 2:
        raise DegenerateLabels("SVM needs at least two distinct labels")
    kernel = kernel or KernelSpec()
    if kernel.kind == "rbf" and kernel.gamma is None:
        kernel = KernelSpec("rbf", default_gamma(X))

    cols = _KernelColumns(kernel, X)
    max_iter = max_passes * max(X.shape[0], _MIN_PASS_LENGTH)
    problems = []
    for c in range(len(vocab)):
        yb = np.where(codes == c, 1.0, -1.0)
        if (yb > 0).all() or (yb < 0).all():
            # class absent from training data: constant "never this class"
            problems.append(
                BinaryProblem(np.zeros((0, X.shape[1])), np.zeros(0), -np.inf, 0.0, 0, np.zeros(len(yb)), yb)
            )
            continue
        alpha, bias, gap, iters = solve_dual(cols, yb, float(C), float(tol), max_iter)
        if gap > tol:
            log.warning("SVM class %r stopped after %d updates with violation %.3g", vocab[c], iters, gap)
        sv = alpha > 0
        problems.append(
            BinaryProblem(
                support_vectors=X[sv].copy(),
                dual_coef=(alpha * yb)[sv],
                bias=bias,
                kkt_violation=gap,
                iterations=iters,
                alpha=alpha,
                y=yb,
            )
        )
    return SvmModel(kernel=kernel, C=float(C), classes=vocab, problems=tuple(problems), tol=float(tol))


def svm_decision(model: SvmModel, Q) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    d = next((p.support_vectors.shape[1] for p in model.problems), Q.shape[1])
    if Q.shape[1] != d:
        raise DimensionMismatch(f"expected {d} columns, got {Q.shape[1]}")
    out = np.empty((Q.shape[0], len(model.problems)))
    for c, prob in enumerate(model.problems):
        if len(prob.dual_coef) == 0:
            out[:, c] = prob.bias
        else:
            out[:, c] = kernel_matrix(model.kernel, Q, prob.support_vectors) @ prob.dual_coef + prob.bias
    return out


def svm_predict(model: SvmModel, Q) -> np.ndarray:
    # np.argmax returns the first maximum: ties go to the earliest class
    return label_array(model.classes, np.argmax(svm_decision(model, Q), axis=1))
