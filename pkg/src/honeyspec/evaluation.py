"""Balanced accuracy, group-aware fold planning and the cross-validation runner."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .classify import ClassifierSpec
from .dataset import SpectralDataset
from .errors import (
    EmptyMatrix,
    FoldDegenerate,
    InsufficientGroups,
    LengthMismatch,
    SingleClass,
    UnknownLabel,
)
from .stage import FeatureSpec, StageModel, fit_stage

DEFAULT_FOLDS = 20
DEFAULT_SEED = 42
THREADS_ENV = "HONEYSPEC_THREADS"


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # rows: true class, columns: predicted class

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def recalls(self) -> np.ndarray:
        """Per-class recall; NaN for classes with no true instances."""
        rows = self.counts.sum(axis=1)
        diag = np.diag(self.counts).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(rows > 0, diag / rows, np.nan)


def confusion(y_true, y_pred, classes: Sequence) -> ConfusionMatrix:
    y_true = list(np.asarray(y_true).tolist())
    y_pred = list(np.asarray(y_pred).tolist())
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    classes = tuple(classes)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index or p not in index:
            raise UnknownLabel(f"label {t if t not in index else p!r} not in classes")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes, counts)


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean recall over the classes present in the true labels.

    The binary case reduces to ``(TP/(TP+FN) + TN/(TN+FP)) / 2``.
    """
    rows = cm.counts.sum(axis=1)
    present = rows > 0
    if not present.any():
        raise EmptyMatrix("confusion matrix has no scored instances")
    recalls = np.diag(cm.counts)[present] / rows[present]
    return float(np.mean(recalls))


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[frozenset, frozenset], ...]  # (train_groups, test_groups)

    @property
    def n_folds(self) -> int:
        return len(self.folds)


def make_group_folds(
    dataset: SpectralDataset, n_folds: int = DEFAULT_FOLDS, seed: int = DEFAULT_SEED, mode: str = "group"
) -> FoldPlan:
    """Assign whole fold units to test sets.

    ``mode="group"`` uses images (``group_id``) as units; ``mode="acquisition"``
    uses acquisition ids, each unit carrying every group captured in it.
    Units are shuffled by ``seed`` within each (origin, level) stratum, the
    strata are concatenated, and the sequence is dealt round-robin to folds,
    so fold sizes differ by at most one unit and every stratum is spread.
    """
    if n_folds < 2:
        raise InsufficientGroups("need at least 2 folds")
    groups = dataset.unique_groups()
    first_row = {}
    for i, g in enumerate(dataset.group_ids):
        first_row.setdefault(g, i)

    if mode == "group":
        units = {g: (g,) for g in groups}
        unit_of = {g: g for g in groups}
    elif mode == "acquisition":
        unit_of = {}
        for g, a in zip(dataset.group_ids, dataset.acquisition_ids):
            a = int(a)
            if a < 0:
                raise InsufficientGroups(f"group {g} has no acquisition_id")
            if unit_of.setdefault(g, a) != a:
                raise InsufficientGroups(f"group {g} spans several acquisitions")
        units = {}
        for g in groups:
            units.setdefault(unit_of[g], []).append(g)
        units = {u: tuple(v) for u, v in units.items()}
    else:
        raise ValueError(f"unknown fold mode {mode!r}")

    if len(units) < n_folds:
        raise InsufficientGroups(f"{len(units)} fold units for {n_folds} folds")

    def stratum(unit):
        i = first_row[units[unit][0]]
        return (str(dataset.origins[i]), int(dataset.levels[i]))

    strata: dict[tuple, list] = {}
    for u in sorted(units, key=str):
        strata.setdefault(stratum(u), []).append(u)
    rng = np.random.default_rng(seed)
    order = []
    for key in sorted(strata):
        members = strata[key]
        order.extend(members[i] for i in rng.permutation(len(members)))

    tests: list[set] = [set() for _ in range(n_folds)]
    for pos, u in enumerate(order):
        tests[pos % n_folds].update(units[u])
    all_groups = frozenset(groups)
    return FoldPlan(tuple((all_groups - frozenset(t), frozenset(t)) for t in tests))


@dataclass(frozen=True)
class CvReport:
    per_fold_scores: tuple[float, ...]
    mean: float
    std: float
    config: dict = field(default_factory=dict)

    @classmethod
    def from_scores(cls, scores: Sequence[float], config: dict | None = None) -> "CvReport":
        scores = tuple(float(s) for s in scores)
        mean = math.fsum(scores) / len(scores)
        std = sample_std(scores)
        return cls(scores, mean, std, dict(config or {}))


def sample_std(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - m) ** 2 for v in values) / (len(values) - 1))


def worker_count(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if raw:
        try:
            limit = max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(limit, n_tasks))


def map_ordered(fn: Callable, items: Sequence) -> list:
    """``[fn(x) for x in items]`` across worker threads, output in input order."""
    workers = worker_count(len(items))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fold_masks(dataset: SpectralDataset, plan: FoldPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for train_groups, test_groups in plan.folds:
        test = np.isin(dataset.group_ids, list(test_groups))
        out.append((~test, test))
    return out


def cross_validate(
    dataset: SpectralDataset,
    target: str = "origin",
    features: FeatureSpec = FeatureSpec(),
    classifier: ClassifierSpec = ClassifierSpec(),
    n_folds: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
    standardize: bool = False,
    fold_mode: str = "group",
    on_fold: Callable[[int, StageModel], None] | None = None,
) -> CvReport:
    """Grouped k-fold balanced accuracy of one feature/classifier configuration.

    Every fit in a fold (standardizer, projection, classifier) sees training
    records only. ``on_fold(i, model)`` receives each fold's fitted stage.
    """
    plan = make_group_folds(dataset, n_folds, seed, fold_mode)
    labels = dataset.labels(target)
    vocab = dataset.origin_vocabulary if target == "origin" else dataset.level_set
    masks = fold_masks(dataset, plan)

    def run(i):
        train, test = masks[i]
        y_train = labels[train]
        if len(set(y_train.tolist())) < 2:
            raise FoldDegenerate(i)
        try:
            model = fit_stage(dataset.bands[train], y_train, features, classifier, vocab, standardize)
        except SingleClass as exc:
            raise FoldDegenerate(i, str(exc)) from exc
        pred = model.predict(dataset.bands[test])
        return model, balanced_accuracy(confusion(labels[test], pred, vocab))

    results = map_ordered(run, range(plan.n_folds))
    if on_fold is not None:
        for i, (model, _) in enumerate(results):
            on_fold(i, model)
    config = {
        "target": target,
        **features.describe(),
        **classifier.describe(),
        "folds": n_folds,
        "seed": seed,
        "standardize": standardize,
        "fold_mode": fold_mode,
    }
    return CvReport.from_scores([s for _, s in results], config)


def component_sweep(
    dataset: SpectralDataset,
    dims: Sequence[int],
    classifiers: Sequence[ClassifierSpec],
    target: str = "origin",
    kind: str = "lda",
    n_folds: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
    standardize: bool = False,
) -> dict[str, list[tuple[int, CvReport]]]:
    """CV score per component count for each classifier, keyed by classifier label."""
    out = {}
    for spec in classifiers:
        out[spec.label] = [
            (d, cross_validate(dataset, target, FeatureSpec(kind, d), spec, n_folds, seed, standardize))
            for d in dims
        ]
    return out
