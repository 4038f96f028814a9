import time

import numpy as np
import pytest

from honeyspec.classify import knn_fit, knn_predict
from honeyspec.errors import DimensionMismatch, EmptyTrainingSet, KOutOfRange

from .oracles import brute_knn


def random_case(rng):
    n = int(rng.integers(1, 51))
    d = int(rng.integers(1, 9))
    k = int(rng.choice([1, 3, 5, 7]))
    k = min(k, n)
    if rng.random() < 0.5:
        # integer grid: many exact distance and vote ties
        X = rng.integers(0, 3, (n, d)).astype(float)
        Q = rng.integers(0, 3, (10, d)).astype(float)
    else:
        X = rng.normal(size=(n, d))
        Q = rng.normal(size=(10, d))
    y = rng.choice(["A", "B", "C"], n)
    return X, y, k, Q


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    cases = 0
    for _ in range(250):
        X, y, k, Q = random_case(rng)
        model = knn_fit(X, y, k)
        pred = knn_predict(model, Q)
        for q, p in zip(Q, pred):
            assert p == brute_knn(X.tolist(), list(y), model.classes, k, q.tolist())
        cases += 1
    assert cases >= 200
    assert time.perf_counter() - start < 5


def test_fit_stores_data():
    X = np.arange(20.0).reshape(10, 2)
    m = knn_fit(X, list("AABBBAAABB"), 5)
    assert m.train_X.shape == (10, 2) and m.k == 5
    np.testing.assert_array_equal(m.train_X, X)


def test_k_equals_n_is_majority():
    X = np.array([[0.0], [1.0], [2.0], [50.0], [51.0]])
    m = knn_fit(X, ["A", "A", "A", "B", "B"], 5)
    assert list(knn_predict(m, [[50.5], [-3.0]])) == ["A", "A"]


@pytest.mark.parametrize("k", [0, 4])
def test_k_out_of_range(k):
    with pytest.raises(KOutOfRange):
        knn_fit(np.zeros((3, 2)), [0, 1, 0], k)


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        knn_fit(np.zeros((0, 2)), [], 1)


def test_two_clusters():
    X = np.array([[0, 0]] * 3 + [[10, 10]] * 3, dtype=float)
    m = knn_fit(X, ["A"] * 3 + ["B"] * 3, 5)
    assert knn_predict(m, [[1, 1]])[0] == "A"


def test_exact_match_k1():
    X = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    m = knn_fit(X, ["x", "y", "z"], 1)
    assert knn_predict(m, [[2.0, 3.0]])[0] == "y"


def test_vote_tie_goes_to_nearer_class():
    # one vote each; A at distance 1, B at distance 2
    m = knn_fit(np.array([[0.0, 0.0], [3.0, 0.0]]), ["A", "B"], 2)
    assert knn_predict(m, [[1.0, 0.0]])[0] == "A"
    m = knn_fit(np.array([[0.0, 0.0], [3.0, 0.0]]), ["B", "A"], 2)
    assert knn_predict(m, [[1.0, 0.0]])[0] == "B"


def test_full_tie_goes_to_vocabulary_order():
    m = knn_fit(np.array([[-1.0], [1.0]]), ["B", "A"], 2)
    assert knn_predict(m, [[0.0]])[0] == "A"
    m = knn_fit(np.array([[-1.0], [1.0]]), ["B", "A"], 2, classes=("B", "A"))
    assert knn_predict(m, [[0.0]])[0] == "B"


def test_self_prediction_k1(rng):
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 4, 40)
    m = knn_fit(X, y, 1)
    np.testing.assert_array_equal(knn_predict(m, X), y)


def test_integer_labels_round_trip():
    m = knn_fit(np.array([[0.0], [5.0]]), [0, 25], 1)
    out = knn_predict(m, [[4.0]])
    assert out.dtype == np.int64 and out[0] == 25


def test_dimension_mismatch():
    m = knn_fit(np.zeros((3, 2)), [0, 1, 0], 1)
    with pytest.raises(DimensionMismatch):
        knn_predict(m, np.zeros((1, 3)))


def test_deterministic(rng):
    X = rng.normal(size=(30, 4))
    y = rng.integers(0, 3, 30)
    Q = rng.normal(size=(20, 4))
    a = knn_predict(knn_fit(X, y, 5), Q)
    b = knn_predict(knn_fit(X, y, 5), Q)
    np.testing.assert_array_equal(a, b)
