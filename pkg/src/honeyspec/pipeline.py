"""Two-stage detector: botanical origin first, then a per-origin adulteration level model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import ClassifierSpec
from .dataset import SpectralDataset, WavelengthGrid, split_by_origin, standardize_apply, standardize_fit
from .dataset import Standardizer
from .errors import DimensionMismatch, NonFiniteInput, SingleOrigin, UnknownOrigin
from .evaluation import (
    DEFAULT_FOLDS,
    DEFAULT_SEED,
    CvReport,
    balanced_accuracy,
    component_sweep,
    confusion,
    cross_validate,
    fold_masks,
    make_group_folds,
    map_ordered,
)
from .stage import FeatureSpec, StageModel, fit_stage

FORMAT_VERSION = 1


@dataclass(frozen=True)
class HierarchicalConfig:
    origin_features: FeatureSpec = FeatureSpec("lda", 10)
    origin_classifier: ClassifierSpec = ClassifierSpec("knn", k=5)
    adulteration_features: FeatureSpec = FeatureSpec("lda", None)
    adulteration_classifier: ClassifierSpec = ClassifierSpec("knn", k=5)
    standardize: bool = False


@dataclass(frozen=True, eq=False)
class HierarchicalModel:
    grid: WavelengthGrid
    origin_stage: StageModel
    adulteration_bank: dict[str, StageModel]  # insertion order = origin vocabulary order
    standardizer: Standardizer | None = None
    format_version: int = FORMAT_VERSION

    @property
    def origins(self) -> tuple:
        return self.origin_stage.classes

    def levels_for(self, origin: str) -> tuple:
        return self.adulteration_bank[origin].classes


@dataclass(frozen=True)
class Prediction:
    origin: str
    level: int
    origin_was_oracle: bool = False

    @property
    def is_pure(self) -> bool:
        return self.level == 0


def train_hierarchical(dataset: SpectralDataset, config: HierarchicalConfig = HierarchicalConfig()) -> HierarchicalModel:
    """Fit the origin stage on all records and one level model per origin.

    A shared standardizer (when enabled) is fitted once on ``dataset``. Origins
    whose records carry a single level get a constant predictor.
    """
    if len(dataset.origin_vocabulary) < 2:
        raise SingleOrigin("need at least two origins")
    standardizer = standardize_fit(dataset.bands) if config.standardize else None
    Z = standardize_apply(standardizer, dataset.bands) if standardizer is not None else dataset.bands
    origin_stage = fit_stage(
        Z, dataset.origins, config.origin_features, config.origin_classifier, classes=dataset.origin_vocabulary
    )

    subsets = [(o, dataset.origins == o) for o in dataset.origin_vocabulary]

    def fit_bank(item):
        origin, mask = item
        y = dataset.levels[mask]
        levels = tuple(l for l in dataset.level_set if l in set(y.tolist()))
        return fit_stage(Z[mask], y, config.adulteration_features, config.adulteration_classifier, classes=levels)

    bank_models = map_ordered(fit_bank, subsets)
    bank = {o: m for (o, _), m in zip(subsets, bank_models)}
    return HierarchicalModel(dataset.grid, origin_stage, bank, standardizer)


def _prepare(model: HierarchicalModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.grid.band_count:
        raise DimensionMismatch(f"expected {model.grid.band_count} bands, got {X.shape[1]}")
    if not np.isfinite(X).all():
        raise NonFiniteInput("spectrum contains non-finite values")
    if model.standardizer is not None:
        X = standardize_apply(model.standardizer, X)
    return X


def predict_batch(model: HierarchicalModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Origins and levels for each row of ``X``, routing through the predicted origin."""
    Z = _prepare(model, X)
    origins = model.origin_stage.predict(Z)
    levels = np.zeros(len(origins), dtype=np.int64)
    for o in model.adulteration_bank:
        rows = np.flatnonzero(origins == o)
        if len(rows):
            levels[rows] = model.adulteration_bank[o].predict(Z[rows])
    return origins, levels


def predict(model: HierarchicalModel, spectrum) -> Prediction:
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.ndim != 1:
        raise DimensionMismatch("predict takes a single spectrum; use predict_batch for matrices")
    origins, levels = predict_batch(model, spectrum)
    return Prediction(str(origins[0]), int(levels[0]), False)


def predict_with_oracle_origin(model: HierarchicalModel, spectrum, origin: str) -> Prediction:
    if origin not in model.adulteration_bank:
        raise UnknownOrigin(f"origin {origin!r} has no adulteration model")
    Z = _prepare(model, spectrum)
    level = model.adulteration_bank[origin].predict(Z)[0]
    return Prediction(origin, int(level), True)


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class TablesConfig:
    features: tuple[str, ...] = ("none", "pca", "lda")
    classifiers: tuple[ClassifierSpec, ...] = (
        ClassifierSpec("knn", k=5),
        ClassifierSpec("svm", kernel="linear"),
        ClassifierSpec("svm", kernel="rbf"),
    )
    origin_dims: int = 10
    pca_dims: int = 10
    adulteration_dims: int | None = None  # None: C - 1 per origin
    standardize: bool = False
    fold_mode: str = "group"
    end_to_end: HierarchicalConfig = HierarchicalConfig()
    sweep_dims: tuple[int, ...] = ()

    def origin_feature(self, kind: str) -> FeatureSpec:
        if kind == "none":
            return FeatureSpec("none", None)
        return FeatureSpec(kind, self.origin_dims if kind == "lda" else self.pca_dims)

    def adulteration_feature(self, kind: str) -> FeatureSpec:
        if kind == "none":
            return FeatureSpec("none", None)
        return FeatureSpec(kind, self.adulteration_dims if kind == "lda" else self.pca_dims)


@dataclass(frozen=True)
class AdulterationTable:
    """Per-origin mean/std rows plus the unweighted Average row."""

    feature: str
    rows: dict[str, dict[str, CvReport]]  # origin -> classifier label -> report
    classifiers: tuple[str, ...]
    skipped: tuple[str, ...] = ()  # single-level origins, no CV possible

    def average(self, classifier: str) -> tuple[float, float]:
        reports = [self.rows[o][classifier] for o in self.rows]
        return (
            float(np.mean([r.mean for r in reports])),
            float(np.mean([r.std for r in reports])),
        )


@dataclass(frozen=True)
class TablesBundle:
    feature_labels: tuple[str, ...]
    classifier_labels: tuple[str, ...]
    origin_table: dict[tuple[str, str], CvReport]  # (feature label, classifier label)
    adulteration_tables: dict[str, AdulterationTable]  # feature label -> table
    end_to_end: dict[str, CvReport]
    sweep: dict[str, list[tuple[int, CvReport]]] = field(default_factory=dict)
    n_folds: int = DEFAULT_FOLDS
    seed: int = DEFAULT_SEED


def end_to_end_reports(
    dataset: SpectralDataset,
    config: HierarchicalConfig,
    n_folds: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
    fold_mode: str = "group",
) -> dict[str, CvReport]:
    """Hierarchical model retrained per fold; stage 2 consumes stage-1 predictions.

    Returns reports for the origin, the level (via predicted origin), and the
    joint (origin, level) label.
    """
    plan = make_group_folds(dataset, n_folds, seed, fold_mode)
    masks = fold_masks(dataset, plan)
    joint_vocab = tuple(f"{o}|{l}" for o in dataset.origin_vocabulary for l in dataset.level_set)

    def run(i):
        train, test = masks[i]
        model = train_hierarchical(dataset.subset(train), config)
        origins, levels = predict_batch(model, dataset.bands[test])
        t_o = dataset.origins[test]
        t_l = dataset.levels[test]
        return (
            balanced_accuracy(confusion(t_o, origins, dataset.origin_vocabulary)),
            balanced_accuracy(confusion(t_l, levels, dataset.level_set)),
            balanced_accuracy(
                confusion(
                    [f"{o}|{l}" for o, l in zip(t_o, t_l)],
                    [f"{o}|{l}" for o, l in zip(origins, levels)],
                    joint_vocab,
                )
            ),
        )

    scores = map_ordered(run, range(plan.n_folds))
    base = {"folds": n_folds, "seed": seed, "fold_mode": fold_mode, "routing": "predicted origin"}
    return {
        name: CvReport.from_scores([s[k] for s in scores], {**base, "target": name})
        for k, name in enumerate(("origin", "level", "origin+level"))
    }


def evaluate_tables(
    dataset: SpectralDataset,
    config: TablesConfig = TablesConfig(),
    n_folds: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
) -> TablesBundle:
    """Origin-stage grid, per-origin adulteration tables (oracle routing) and end-to-end scores."""
    clf_labels = tuple(c.label for c in config.classifiers)
    feat_labels = tuple(FeatureSpec(k, None).label for k in config.features)

    origin_table = {}
    for kind, flabel in zip(config.features, feat_labels):
        for spec in config.classifiers:
            origin_table[(flabel, spec.label)] = cross_validate(
                dataset,
                "origin",
                config.origin_feature(kind),
                spec,
                n_folds,
                seed,
                config.standardize,
                config.fold_mode,
            )

    by_origin = split_by_origin(dataset)
    adulteration = {}
    for kind, flabel in zip(config.features, feat_labels):
        rows: dict[str, dict[str, CvReport]] = {}
        skipped = []
        for origin, sub in by_origin.items():
            if len(sub.level_set) < 2:
                skipped.append(origin)
                continue
            rows[origin] = {
                spec.label: cross_validate(
                    sub,
                    "level",
                    config.adulteration_feature(kind),
                    spec,
                    n_folds,
                    seed,
                    config.standardize,
                    config.fold_mode,
                )
                for spec in config.classifiers
            }
        adulteration[flabel] = AdulterationTable(flabel, rows, clf_labels, tuple(skipped))

    e2e = end_to_end_reports(dataset, config.end_to_end, n_folds, seed, config.fold_mode)
    sweep = {}
    if config.sweep_dims:
        sweep = component_sweep(
            dataset, config.sweep_dims, config.classifiers, "origin", "lda", n_folds, seed, config.standardize
        )
    return TablesBundle(feat_labels, clf_labels, origin_table, adulteration, e2e, sweep, n_folds, seed)
