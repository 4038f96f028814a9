"""Command-line entry point: validate, synth, train, cv, tables, predict."""

from __future__ import annotations

import argparse
import logging
import pathlib
import re
import sys

from . import plots
from .classify import ClassifierSpec
from .dataset import (
    DEFAULT_LEVELS,
    GeneratorSpec,
    WavelengthGrid,
    load_dataset,
    read_spectra,
    synth_generate,
    validate,
    write_dataset,
)
from .errors import DatasetError, HoneySpecError
from .evaluation import DEFAULT_FOLDS, DEFAULT_SEED, cross_validate
from .persist import load_model, save_model
from .pipeline import HierarchicalConfig, TablesConfig, evaluate_tables, predict_batch, train_hierarchical
from .report import FORMATS, emit_report, summary_line
from .stage import FeatureSpec

log = logging.getLogger("honeyspec")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_grid(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset layout")
    g.add_argument("--bands", type=int, default=128, help="band columns per row (default 128)")
    g.add_argument("--start-nm", type=float, default=400.0)
    g.add_argument("--step-nm", type=float, default=5.0)
    g.add_argument("--levels", type=_int_list, default=DEFAULT_LEVELS, help="allowed levels, e.g. 0,5,10,25,50")


def _add_model_flags(p: argparse.ArgumentParser, prefix: str = "", dims_default=10) -> None:
    dest = prefix.replace("-", "_")
    p.add_argument(f"--{prefix}features", dest=f"{dest}features", choices=("none", "pca", "lda"), default="lda")
    p.add_argument(f"--{prefix}dims", dest=f"{dest}dims", type=int, default=dims_default,
                   help="components for PCA/LDA (LDA caps at classes - 1)")
    p.add_argument(f"--{prefix}classifier", dest=f"{dest}classifier", choices=("knn", "svm"), default="knn")
    p.add_argument(f"--{prefix}k", dest=f"{dest}k", type=int, default=5)
    p.add_argument(f"--{prefix}kernel", dest=f"{dest}kernel", choices=("linear", "rbf"), default="linear")
    p.add_argument(f"--{prefix}C", dest=f"{dest}C", type=float, default=1.0)
    p.add_argument(f"--{prefix}gamma", dest=f"{dest}gamma", type=float, default=None)
    p.add_argument(f"--{prefix}tol", dest=f"{dest}tol", type=float, default=1e-3)
    p.add_argument(f"--{prefix}max-passes", dest=f"{dest}max_passes", type=int, default=200)


def _add_cv_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--standardize", action="store_true", help="z-score bands using training data only")
    p.add_argument("--fold-mode", choices=("group", "acquisition"), default="group")


def _add_output(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--out", type=pathlib.Path, required=required, help="output directory")
    p.add_argument("--format", choices=FORMATS, default="markdown")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="honeyspec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dataset file against the schema and invariants")
    p.add_argument("data", type=pathlib.Path)
    _add_grid(p)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", type=pathlib.Path, required=True, help="output CSV path")
    p.add_argument("--origins", type=int, default=3)
    p.add_argument("--levels", type=_int_list, default=DEFAULT_LEVELS)
    p.add_argument("--groups-per-class", type=int, default=4)
    p.add_argument("--records-per-group", type=int, default=5)
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--bands", type=int, default=128)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("train", help="fit and save the two-stage model")
    p.add_argument("data", type=pathlib.Path)
    p.add_argument("--model", type=pathlib.Path, required=True)
    p.add_argument("--standardize", action="store_true")
    _add_grid(p)
    _add_model_flags(p)
    _add_model_flags(p, "adul-", dims_default=None)

    p = sub.add_parser("cv", help="grouped cross-validation of one configuration")
    p.add_argument("data", type=pathlib.Path)
    p.add_argument("--target", choices=("origin", "level"), default="origin")
    p.add_argument("--origin", default=None, help="restrict to one origin (useful with --target level)")
    _add_grid(p)
    _add_model_flags(p)
    _add_cv_flags(p)
    _add_output(p)

    p = sub.add_parser("tables", help="origin and per-origin adulteration tables with figures")
    p.add_argument("data", type=pathlib.Path)
    p.add_argument("--feature-sets", default="none,pca,lda", help="comma list from none,pca,lda")
    p.add_argument("--classifiers", default="knn,linear,rbf", help="comma list from knn,linear,rbf")
    p.add_argument("--dims", type=int, default=10, help="origin-stage LDA components")
    p.add_argument("--pca-dims", type=int, default=10)
    p.add_argument("--adul-dims", type=int, default=None, help="adulteration LDA components (default C-1)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--sweep", type=int, default=0, help="also sweep LDA components 1..N on the origin stage")
    p.add_argument("--no-figures", action="store_true")
    _add_grid(p)
    _add_cv_flags(p)
    _add_output(p, required=True)

    p = sub.add_parser("predict", help="classify spectra with a saved model")
    p.add_argument("data", type=pathlib.Path, help="spectra in the dataset schema (labels ignored)")
    p.add_argument("--model", type=pathlib.Path, required=True)
    p.add_argument("--out", type=pathlib.Path, default=None, help="directory for plot data and figures")
    p.add_argument("--no-figures", action="store_true")
    return parser


def _grid(args) -> WavelengthGrid:
    return WavelengthGrid(args.start_nm, args.step_nm, args.bands)


def _classifier(args, prefix: str = "") -> ClassifierSpec:
    g = lambda name: getattr(args, prefix + name)  # noqa: E731
    return ClassifierSpec(g("classifier"), k=g("k"), kernel=g("kernel"), C=g("C"), gamma=g("gamma"),
                          tol=g("tol"), max_passes=g("max_passes"))


def _features(args, prefix: str = "") -> FeatureSpec:
    kind = getattr(args, prefix + "features")
    return FeatureSpec(kind, None if kind == "none" else getattr(args, prefix + "dims"))


def _warn_lda_cap(features: FeatureSpec, n_classes: int, what: str) -> None:
    if features.kind == "lda" and features.dims is not None and features.dims > n_classes - 1:
        print(f"warning: {what}: LDA dims {features.dims} capped at {n_classes - 1} (classes - 1)", file=sys.stderr)


def _write_docs(docs: dict[str, str], out: pathlib.Path | None) -> None:
    if out is None:
        for text in docs.values():
            sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    for name, text in docs.items():
        (out / name).write_text(text, encoding="utf-8", newline="\n")


def cmd_validate(args) -> int:
    try:
        ds = load_dataset(str(args.data), _grid(args), args.levels)
    except DatasetError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE
    problems = validate(ds)
    for v in problems:
        where = v.record_id or v.group_id or "-"
        print(f"{v.kind}\t{where}\t{v.message}")
    if not problems:
        print(f"ok: {len(ds)} records, {len(ds.origin_vocabulary)} origins, levels {list(ds.level_set)}")
    return EXIT_OK if not problems else EXIT_FAILURE


def cmd_synth(args) -> int:
    spec = GeneratorSpec(args.origins, args.levels, args.groups_per_class, args.records_per_group,
                         args.separation, args.noise, args.bands)
    ds = synth_generate(spec, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_dataset(ds, fh)
    print(f"wrote {len(ds)} records to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    ds = load_dataset(str(args.data), _grid(args), args.levels)
    config = HierarchicalConfig(
        origin_features=_features(args),
        origin_classifier=_classifier(args),
        adulteration_features=_features(args, "adul_"),
        adulteration_classifier=_classifier(args, "adul_"),
        standardize=args.standardize,
    )
    _warn_lda_cap(config.origin_features, len(ds.origin_vocabulary), "origin stage")
    model = train_hierarchical(ds, config)
    args.model.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, str(args.model))
    print(f"saved model with {len(model.adulteration_bank)} adulteration models to {args.model}")
    return EXIT_OK


def cmd_cv(args) -> int:
    ds = load_dataset(str(args.data), _grid(args), args.levels)
    if args.origin is not None:
        if args.origin not in ds.origin_vocabulary:
            print(f"error: origin {args.origin!r} not in dataset", file=sys.stderr)
            return EXIT_FAILURE
        ds = ds.subset(ds.origins == args.origin)
    features = _features(args)
    n_classes = len(ds.origin_vocabulary if args.target == "origin" else ds.level_set)
    _warn_lda_cap(features, n_classes, f"target {args.target}")
    report = cross_validate(ds, args.target, features, _classifier(args), args.folds, args.seed,
                            args.standardize, args.fold_mode)
    if args.out is not None:
        _write_docs(emit_report(report, args.format), args.out)
        print(summary_line(report))
    else:
        _write_docs(emit_report(report, args.format), None)
    return EXIT_OK


_CLASSIFIER_CHOICES = {"knn": "knn", "linear": "linear", "rbf": "rbf"}


def cmd_tables(args) -> int:
    ds = load_dataset(str(args.data), _grid(args), args.levels)
    feature_sets = tuple(f.strip() for f in args.feature_sets.split(",") if f.strip())
    names = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    bad = [f for f in feature_sets if f not in ("none", "pca", "lda")] + [c for c in names if c not in _CLASSIFIER_CHOICES]
    if bad or not feature_sets or not names:
        print(f"error: unknown feature set or classifier: {', '.join(bad) or '(empty list)'}", file=sys.stderr)
        return EXIT_USAGE
    classifiers = tuple(
        ClassifierSpec("knn", k=args.k) if c == "knn" else ClassifierSpec("svm", kernel=c, C=args.C, gamma=args.gamma)
        for c in names
    )
    _warn_lda_cap(FeatureSpec("lda", args.dims), len(ds.origin_vocabulary), "origin stage")
    config = TablesConfig(
        features=feature_sets,
        classifiers=classifiers,
        origin_dims=args.dims,
        pca_dims=args.pca_dims,
        adulteration_dims=args.adul_dims,
        standardize=args.standardize,
        fold_mode=args.fold_mode,
        end_to_end=HierarchicalConfig(FeatureSpec("lda", args.dims), ClassifierSpec("knn", k=args.k),
                                      FeatureSpec("lda", args.adul_dims), ClassifierSpec("knn", k=args.k),
                                      args.standardize),
        sweep_dims=tuple(range(1, args.sweep + 1)),
    )
    bundle = evaluate_tables(ds, config, args.folds, args.seed)
    docs = emit_report(bundle, args.format)
    _write_docs(docs, args.out)
    if not args.no_figures:
        plots.tables_figures(bundle, args.out)
    for name in docs:
        print(args.out / name)
    return EXIT_OK


def _safe_name(token: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]", "_", token) or "row"


def cmd_predict(args) -> int:
    model = load_model(str(args.model))
    ids, X = read_spectra(str(args.data), model.grid)
    origins, levels = predict_batch(model, X)
    print("record_id\torigin\tlevel\tstatus")
    for rid, o, lv in zip(ids, origins, levels):
        print(f"{rid}\t{o}\t{int(lv)}\t{'pure' if int(lv) == 0 else 'adulterated'}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        wl = model.grid.wavelengths()
        for i, (rid, o, lv) in enumerate(zip(ids, origins, levels)):
            stem = f"spectrum_{i:04d}_{_safe_name(rid)}"
            (args.out / f"{stem}.tsv").write_text(plots.spectrum_plot_data(wl, X[i]), encoding="utf-8")
            if not args.no_figures:
                title = f"{rid}: {o}, {int(lv)}% adulteration" if int(lv) else f"{rid}: {o}, pure"
                plots.spectrum_figure(wl, X[i], title, args.out / f"{stem}.png")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "synth": cmd_synth,
    "train": cmd_train,
    "cv": cmd_cv,
    "tables": cmd_tables,
    "predict": cmd_predict,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (HoneySpecError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
