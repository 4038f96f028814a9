import numpy as np
import pytest

from honeyspec.dimred import lda_fit, pca_fit, project, regularize_within
from honeyspec.errors import DimensionMismatch, InvalidComponentCount, SingleClass, TooFewSamples


def naive_scatter(X, y):
    """Within-class scatter by explicit outer-product loops."""
    p = X.shape[1]
    S = np.zeros((p, p))
    for c in np.unique(y):
        rows = X[y == c]
        mu = rows.sum(axis=0) / len(rows)
        for r in rows:
            d = r - mu
            for a in range(p):
                for b in range(p):
                    S[a, b] += d[a] * d[b]
    return S


def two_class(rng, n=40, p=5, shift=3.0):
    mu = rng.normal(size=p)
    direction = rng.normal(size=p)
    X0 = rng.normal(size=(n, p)) + mu
    X1 = rng.normal(size=(n, p)) + mu + shift * direction / np.linalg.norm(direction)
    return np.vstack([X0, X1]), np.array([0] * n + [1] * n)


def cosine(a, b):
    return abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))


def test_pca_rank_one_line():
    t = np.arange(-2.0, 3.0)
    X = np.column_stack([t, 2 * t])
    m = pca_fit(X, 2)
    np.testing.assert_allclose(m.basis[:, 0], np.array([1.0, 2.0]) / np.sqrt(5), atol=1e-8)
    assert abs(m.component_scores[1]) < 1e-12
    assert m.component_scores[0] == pytest.approx(np.var(X @ np.array([1, 2]) / np.sqrt(5), ddof=1), abs=1e-12)


def test_pca_full_rank_is_isometry(rng):
    X = rng.normal(size=(20, 6))
    m = pca_fit(X, 6)
    Z = project(m, X)
    for _ in range(20):
        i, j = rng.integers(0, 20, 2)
        assert np.linalg.norm(Z[i] - Z[j]) == pytest.approx(np.linalg.norm(X[i] - X[j]), abs=1e-8)


def test_pca_eigenvalues_match_svd_oracle(rng):
    X = rng.normal(size=(30, 6)) @ rng.normal(size=(6, 6))
    m = pca_fit(X, 6)
    Xc = X - X.mean(axis=0)
    s = np.linalg.svd(Xc, compute_uv=False)
    np.testing.assert_allclose(m.component_scores, s**2 / (len(X) - 1), atol=1e-8)


def test_pca_scores_are_projected_variances(rng):
    X = rng.normal(size=(25, 5)) * [5, 3, 2, 1, 0.5]
    m = pca_fit(X, 5)
    Z = project(m, X)
    np.testing.assert_allclose(Z.var(axis=0, ddof=1), m.component_scores, atol=1e-8)
    assert m.component_scores.sum() == pytest.approx(np.trace(np.cov(X, rowvar=False)), abs=1e-8)
    np.testing.assert_allclose(m.basis.T @ m.basis, np.eye(5), atol=1e-8)


def test_pca_sign_convention(rng):
    m = pca_fit(rng.normal(size=(15, 4)), 3)
    for col in m.basis.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_pca_preconditions(rng):
    with pytest.raises(TooFewSamples):
        pca_fit(np.ones((1, 3)), 1)
    with pytest.raises(InvalidComponentCount):
        pca_fit(rng.normal(size=(4, 6)), 4)
    with pytest.raises(InvalidComponentCount):
        pca_fit(rng.normal(size=(10, 3)), 0)


def test_lda_two_class_matches_linear_solve(rng):
    X, y = two_class(rng)
    m = lda_fit(X, y, 5)
    assert m.d == 1
    S_W = regularize_within(naive_scatter(X, y))
    mu0, mu1 = X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)
    v = np.linalg.solve(S_W, mu1 - mu0)
    assert cosine(m.basis[:, 0], v) >= 1 - 1e-6


def test_lda_caps_at_classes_minus_one(rng):
    X = np.vstack([rng.normal(size=(8, 128)) + 3 * c for c in range(11)])
    y = np.repeat(np.arange(11), 8)
    m = lda_fit(X, y, 128)
    assert m.d == 10
    assert (np.diff(m.component_scores) <= 0).all()
    assert (m.component_scores >= 0).all()
    np.testing.assert_allclose(np.linalg.norm(m.basis, axis=0), 1.0, atol=1e-12)


def test_lda_zero_within_scatter():
    X = np.array([[0.0, 0, 0]] * 3 + [[1.0, 2, 0]] * 3 + [[0.0, 1, 3]] * 3)
    y = np.repeat([0, 1, 2], 3)
    m = lda_fit(X, y, 2)
    Z = project(m, X)
    centers = np.array([Z[y == c].mean(axis=0) for c in range(3)])
    gaps = [np.linalg.norm(centers[a] - centers[b]) for a in range(3) for b in range(a + 1, 3)]
    assert min(gaps) > 1e-6


def test_lda_separates_well_separated_clouds(rng):
    for _ in range(10):
        X, y = two_class(rng, n=60, p=6, shift=10.0)
        m = lda_fit(X, y, 1)
        z = project(m, X)[:, 0]
        z0, z1 = z[y == 0], z[y == 1]
        pooled = np.sqrt((z0.var(ddof=1) + z1.var(ddof=1)) / 2)
        assert abs(z0.mean() - z1.mean()) >= 5 * pooled


def test_lda_shift_invariance(rng):
    X = np.vstack([rng.normal(size=(15, 4)) + c for c in range(3)])
    y = np.repeat([0, 1, 2], 15)
    a = lda_fit(X, y, 2)
    b = lda_fit(X + rng.normal(size=4) * 10, y, 2)
    for j in range(2):
        assert min(np.abs(a.basis[:, j] - b.basis[:, j]).max(), np.abs(a.basis[:, j] + b.basis[:, j]).max()) < 1e-8


def test_lda_preconditions(rng):
    with pytest.raises(SingleClass):
        lda_fit(rng.normal(size=(5, 3)), np.zeros(5), 1)
    with pytest.raises(InvalidComponentCount):
        lda_fit(rng.normal(size=(5, 3)), [0, 0, 1, 1, 1], 0)
    with pytest.raises(DimensionMismatch):
        lda_fit(rng.normal(size=(5, 3)), [0, 1], 1)


def test_fits_are_deterministic(rng):
    X, y = two_class(rng, p=8)
    for fit in (lambda: pca_fit(X, 4), lambda: lda_fit(X, y, 1)):
        a, b = fit(), fit()
        assert a.basis.tobytes() == b.basis.tobytes()
        assert a.component_scores.tobytes() == b.component_scores.tobytes()


def test_project_mean_is_zero(rng):
    X = rng.normal(size=(12, 4))
    m = pca_fit(X, 3)
    np.testing.assert_array_equal(project(m, m.mean), np.zeros((1, 3)))


def test_project_matches_loop_oracle(rng):
    X = rng.normal(size=(5, 4))
    m = pca_fit(rng.normal(size=(10, 4)), 3)
    Z = project(m, X)
    for i in range(5):
        for j in range(3):
            acc = 0.0
            for k in range(4):
                acc += (X[i, k] - m.mean[k]) * m.basis[k, j]
            assert abs(Z[i, j] - acc) < 1e-10


def test_project_dimension_mismatch(rng):
    m = pca_fit(rng.normal(size=(10, 4)), 2)
    with pytest.raises(DimensionMismatch):
        project(m, rng.normal(size=(3, 5)))
