"""Hyperspectral honey classification: botanical origin, then adulteration level.

Typical use::

    from honeyspec import load_dataset, train_hierarchical, predict
    ds = load_dataset("honey.csv")
    model = train_hierarchical(ds)
    predict(model, ds.bands[0])
"""

from .classify import ClassifierSpec, KernelSpec, fit_classifier, knn_fit, knn_predict, svm_fit, svm_predict
from .dataset import (
    GeneratorSpec,
    SpectralDataset,
    WavelengthGrid,
    load_dataset,
    split_by_origin,
    standardize_apply,
    standardize_fit,
    synth_generate,
    validate,
    write_dataset,
)
from .dimred import ProjectionModel, lda_fit, pca_fit, project
from .evaluation import (
    ConfusionMatrix,
    CvReport,
    FoldPlan,
    balanced_accuracy,
    confusion,
    cross_validate,
    make_group_folds,
)
from .persist import load_model, save_model
from .pipeline import (
    HierarchicalConfig,
    HierarchicalModel,
    Prediction,
    TablesConfig,
    evaluate_tables,
    predict,
    predict_with_oracle_origin,
    train_hierarchical,
)
from .report import emit_report
from .stage import FeatureSpec

__version__ = "0.1.0"
