"""Acceptance criteria, one test per criterion.

Each test records PASS/FAIL in ``ACCEPTANCE_RESULTS`` (printed in the pytest
terminal summary) before asserting. The real-data check runs only when
``HONEYSPEC_REAL_DATA`` names a CSV in the dataset schema.
"""

import os
import pathlib
import time

import numpy as np
import pytest

from honeyspec.classify import KernelSpec, knn_fit, knn_predict, svm_fit, svm_predict
from honeyspec.cli import run
from honeyspec.dataset import GeneratorSpec, load_dataset, split_by_origin, synth_generate
from honeyspec.dimred import lda_fit, pca_fit, project
from honeyspec.evaluation import ConfusionMatrix, balanced_accuracy, confusion, cross_validate, make_group_folds
from honeyspec.pipeline import TablesConfig, evaluate_tables
from honeyspec.classify import ClassifierSpec
from honeyspec.stage import FeatureSpec

from .conftest import ACCEPTANCE_RESULTS
from .oracles import brute_knn, macro_recall
from .test_svm import XOR_X, XOR_Y, assert_dual_contract, exhaustive_separating_line, separable_fixture


def check(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[name] = "PASS" if ok else "FAIL"
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    assert ok, f"{name}: {detail}"


def test_1_knn_oracle_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    queries = mismatches = 0
    for _ in range(220):
        n, d = int(rng.integers(7, 51)), int(rng.integers(1, 9))
        k = int(rng.choice([1, 3, 5, 7]))
        # coarse integer grid forces distance and vote ties
        X = rng.integers(0, 3, (n, d)).astype(float)
        y = rng.choice(["a", "b", "c"], n)
        Q = rng.integers(0, 3, (10, d)).astype(float)
        model = knn_fit(X, y, k)
        got = knn_predict(model, Q)
        for q, g in zip(Q, got):
            queries += 1
            mismatches += brute_knn(X.tolist(), y.tolist(), model.classes, k, q.tolist()) != g
    elapsed = time.perf_counter() - t0
    check("1. KNN oracle equivalence", mismatches == 0 and elapsed < 5.0,
          f"{queries - mismatches}/{queries} queries agree, {elapsed:.2f}s")


def test_2_lda_oracle_equivalence():
    rng = np.random.default_rng(202)
    worst = 1.0
    for _ in range(50):
        p = int(rng.integers(2, 12))
        n1, n2 = int(rng.integers(p + 2, 40)), int(rng.integers(p + 2, 40))
        A = rng.normal(size=(p, p))
        X = np.vstack([rng.normal(size=(n1, p)) @ A, rng.normal(size=(n2, p)) @ A + rng.normal(size=p)])
        y = np.array([0] * n1 + [1] * n2)
        m1, m2 = X[y == 0].mean(0), X[y == 1].mean(0)
        S_W = sum((X[y == c] - m).T @ (X[y == c] - m) for c, m in ((0, m1), (1, m2)))
        S_W = S_W + 1e-8 * np.trace(S_W) / p * np.eye(p)
        v = np.linalg.solve(S_W, m1 - m2)
        w = lda_fit(X, y, 1).basis[:, 0]
        worst = min(worst, abs(w @ v) / (np.linalg.norm(w) * np.linalg.norm(v)))
    counts_ok = True
    for C, requested in ((11, 10), (11, 15), (5, 10), (3, 1)):
        X = rng.normal(size=(C * 6, 20)) + np.repeat(rng.normal(size=(C, 20)) * 3, 6, axis=0)
        y = np.repeat(np.arange(C), 6)
        counts_ok &= lda_fit(X, y, requested).d == min(requested, C - 1)
    check("2. LDA oracle equivalence", worst >= 1 - 1e-6 and counts_ok,
          f"min |cos| = {worst:.12f}, component caps ok = {counts_ok}")


def test_3_pca_oracle_equivalence():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(50):
        n, p = int(rng.integers(5, 60)), int(rng.integers(2, 15))
        X = rng.normal(size=(n, p)) @ rng.normal(size=(p, p)) + rng.normal(size=p) * 5
        d = int(rng.integers(1, min(n - 1, p) + 1))
        m = pca_fit(X, d)
        # independent oracle: singular values of the centered matrix
        s = np.linalg.svd(X - X.mean(0), compute_uv=False)
        ref = (s**2 / (n - 1))[:d]
        Z = project(m, X)
        worst = max(
            worst,
            np.abs(m.component_scores - ref).max() / max(1.0, ref.max()),
            np.abs(Z.var(axis=0, ddof=1) - ref).max() / max(1.0, ref.max()),
            np.abs(m.basis.T @ m.basis - np.eye(d)).max(),
        )
    check("3. PCA oracle equivalence", worst <= 1e-8, f"max deviation {worst:.2e}")


def test_4_svm_contract():
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    failures = []
    for i in range(10):
        X, y = separable_fixture(rng, n=int(rng.integers(5, 40)))
        assert exhaustive_separating_line(X, y) is not None
        for kernel in (KernelSpec("linear"), KernelSpec("rbf")):
            m = svm_fit(X, y, kernel, C=10.0)
            if not (svm_predict(m, X) == y).all():
                failures.append(f"separable {i} {kernel.kind}")
            assert_dual_contract(m)
    m = svm_fit(XOR_X, XOR_Y, KernelSpec("rbf", 1.0), C=10.0)
    if not (svm_predict(m, XOR_X) == XOR_Y).all():
        failures.append("xor")
    assert_dual_contract(m)
    # multiclass random fits: contract only
    for _ in range(10):
        X = rng.normal(size=(60, 4))
        y = rng.choice(["a", "b", "c"], 60)
        assert_dual_contract(svm_fit(X, y, KernelSpec("rbf"), C=float(rng.uniform(0.1, 10))))
    elapsed = time.perf_counter() - t0
    check("4. SVM contract", not failures and elapsed < 10.0, f"failures={failures}, {elapsed:.2f}s")


def test_5_metric_correctness():
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(1000):
        C = int(rng.integers(1, 12))
        counts = rng.integers(0, 30, (C, C))
        counts[0, int(rng.integers(0, C))] += 1
        worst = max(worst, abs(balanced_accuracy(ConfusionMatrix(tuple(range(C)), counts)) - macro_recall(counts.tolist())))
    one_class = balanced_accuracy(confusion(["P", "P", "A", "A", "A"], ["P"] * 5, ["P", "A"]))
    check("5. Metric correctness", worst <= 1e-12 and one_class == 0.5,
          f"max |BA - oracle| = {worst:.1e}, all-one-class = {one_class}")


def test_6_fold_hygiene():
    rng = np.random.default_rng(606)
    bad = 0
    for trial in range(100):
        spec = GeneratorSpec(origins=int(rng.integers(2, 5)), levels=(0, 5, 10), groups_per_class=int(rng.integers(1, 5)),
                             records_per_group=int(rng.integers(1, 4)), band_count=8)
        ds = synth_generate(spec, trial)
        groups = set(ds.group_ids)
        n_folds = int(rng.integers(2, min(20, len(groups)) + 1))
        plan = make_group_folds(ds, n_folds, int(rng.integers(0, 10**6)))
        tested = [g for _, test in plan.folds for g in test]
        ok = all(not (train & test) and (train | test) == groups for train, test in plan.folds)
        ok &= sorted(tested) == sorted(groups)
        bad += not ok
    check("6. Fold hygiene", bad == 0, f"{100 - bad}/100 datasets clean")


def test_7_end_to_end_synthetic():
    t0 = time.perf_counter()
    spec = GeneratorSpec(origins=11, groups_per_class=4, records_per_group=5, class_mean_separation=10.0, noise_sd=1.0)
    ds = synth_generate(spec, 42)
    knn = ClassifierSpec("knn", k=5)
    origin = cross_validate(ds, "origin", FeatureSpec("lda", 10), knn, n_folds=20, seed=42)
    levels = [cross_validate(sub, "level", FeatureSpec("lda", None), knn, n_folds=20, seed=42).mean
              for sub in split_by_origin(ds).values()]
    adul = float(np.mean(levels))
    elapsed = time.perf_counter() - t0
    check("7. End-to-end synthetic pipeline", origin.mean >= 0.99 and adul >= 0.99 and elapsed < 30.0,
          f"origin {origin.mean:.4f}, adulteration average {adul:.4f}, {elapsed:.1f}s")


REAL_DATA = os.environ.get("HONEYSPEC_REAL_DATA")


@pytest.mark.skipif(not REAL_DATA or not pathlib.Path(REAL_DATA).is_file(),
                    reason="set HONEYSPEC_REAL_DATA to the hyperspectral honey CSV to run")
def test_8_real_data_reproduction():
    t0 = time.perf_counter()
    ds = load_dataset(REAL_DATA)
    config = TablesConfig(features=("lda",), classifiers=(ClassifierSpec("knn", k=5),))
    bundle = evaluate_tables(ds, config, n_folds=20, seed=42)
    origin = bundle.origin_table[("LDA features", "KNN")].mean
    table = bundle.adulteration_tables["LDA features"]
    average, _ = table.average("KNN")
    manuka = table.rows["ManukaUMF5"]["KNN"].mean if "ManukaUMF5" in table.rows else float("nan")
    elapsed = time.perf_counter() - t0
    ok = abs(origin - 0.9701) <= 0.03 and abs(average - 0.9639) <= 0.03 and abs(manuka - 1.0) <= 0.005
    check("8. Real-data reproduction", ok and elapsed < 120.0,
          f"origin {origin:.4f}, average {average:.4f}, ManukaUMF5 {manuka:.4f}, {elapsed:.1f}s")


def test_8_marker_when_skipped():
    if REAL_DATA and pathlib.Path(REAL_DATA).is_file():
        pytest.skip("real data present; criterion evaluated above")
    ACCEPTANCE_RESULTS["8. Real-data reproduction"] = "SKIP"
    print("SKIP  8. Real-data reproduction  (HONEYSPEC_REAL_DATA not set)")


def _snapshot(directory: pathlib.Path) -> dict[str, bytes]:
    return {str(p.relative_to(directory)): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_9_determinism(tmp_path, capsys):
    data = tmp_path / "data.csv"
    assert run(["synth", "--out", str(data), "--origins", "3", "--groups-per-class", "2",
                "--records-per-group", "3", "--bands", "20", "--separation", "2", "--seed", "9"]) == 0
    capsys.readouterr()
    runs = []
    for attempt in ("a", "b"):
        out = tmp_path / attempt
        codes = [
            run(["train", str(data), "--bands", "20", "--model", str(out / "model.hspec"),
                 "--classifier", "svm", "--kernel", "rbf"]),
            run(["cv", str(data), "--bands", "20", "--folds", "6", "--out", str(out / "cv")]),
            run(["cv", str(data), "--bands", "20", "--folds", "6", "--target", "level", "--features", "pca",
                 "--classifier", "svm", "--format", "delimited", "--out", str(out / "cv_level")]),
            run(["tables", str(data), "--bands", "20", "--folds", "4", "--sweep", "2", "--out", str(out / "tables")]),
        ]
        runs.append((codes, _snapshot(out), capsys.readouterr().out.replace(str(out), "<out>")))
    (codes_a, files_a, out_a), (codes_b, files_b, out_b) = runs
    ok = codes_a == codes_b == [0, 0, 0, 0] and files_a == files_b and out_a == out_b
    check("9. Determinism", ok, f"{len(files_a)} output files compared byte-for-byte")
