import numpy as np
import pytest

from hgssl.errors import ShapeError
from hgssl.pca import pca_fit, pca_transform


def oracle_fit(X, d):
    """Independent covariance eigendecomposition with the same sign rule."""
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(-values, kind="stable")[:d]
    comps = vectors[:, order].copy()
    for j in range(d):
        pivot = np.argmax(np.abs(comps[:, j]))
        if comps[pivot, j] < 0:
            comps[:, j] = -comps[:, j]
    return mean, comps, values[order]


class TestPcaFit:
    def test_collinear_points(self):
        t = np.linspace(-2.0, 2.0, 9)
        X = np.column_stack([t, 2.0 * t])  # points on the line y = 2x
        model = pca_fit(X, 2)
        want = np.array([1.0, 2.0]) / np.sqrt(5.0)
        assert np.allclose(model.components[:, 0], want, atol=1e-12)
        assert model.explained_variance[1] < 1e-12

    def test_diagonal_covariance_from_orthogonal_columns(self):
        # Mean-zero orthogonal columns: covariance is diagonal, so the spectrum
        # equals the squared column norms / (n - 1), up to ordering.
        h2 = np.array([1.0, -1.0, 1.0, -1.0])
        h3 = np.array([1.0, 1.0, -1.0, -1.0])
        h4 = np.array([1.0, -1.0, -1.0, 1.0])
        X = np.column_stack([2.0 * h2, 3.0 * h3, 5.0 * h4])
        model = pca_fit(X, 3)
        want = np.sort((X ** 2).sum(axis=0) / 3.0)[::-1]
        assert np.allclose(model.explained_variance, want, atol=1e-10)

    def test_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((20, 6))
        model = pca_fit(X, 3)
        mean, comps, values = oracle_fit(X, 3)
        assert np.allclose(model.mean, mean, atol=1e-12)
        assert np.max(np.abs(model.components - comps)) < 1e-8
        assert np.max(np.abs(model.explained_variance - values)) < 1e-8

    def test_components_orthonormal(self):
        rng = np.random.default_rng(12)
        model = pca_fit(rng.standard_normal((30, 8)), 5)
        gram = model.components.T @ model.components
        assert np.max(np.abs(gram - np.eye(5))) < 1e-10

    def test_variance_nonincreasing(self):
        rng = np.random.default_rng(2)
        model = pca_fit(rng.standard_normal((40, 10)), 10)
        assert np.all(np.diff(model.explained_variance) <= 1e-12)

    def test_d_out_of_range(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((10, 4))
        with pytest.raises(ValueError):
            pca_fit(X, 0)
        with pytest.raises(ValueError):
            pca_fit(X, 5)
        with pytest.raises(ValueError):
            pca_fit(rng.standard_normal((3, 8)), 3)  # d > n - 1

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((25, 7))
        a = pca_fit(X, 4)
        b = pca_fit(X, 4)
        assert np.array_equal(a.components, b.components)
        assert np.array_equal(a.explained_variance, b.explained_variance)


class TestPcaTransform:
    def test_full_rank_preserves_distances(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((15, 6))
        model = pca_fit(X, 6)
        Z = pca_transform(model, X)
        for i in range(0, 15, 3):
            for j in range(1, 15, 4):
                d_orig = np.linalg.norm(X[i] - X[j])
                d_proj = np.linalg.norm(Z[i] - Z[j])
                assert abs(d_orig - d_proj) < 1e-9

    def test_mean_row_maps_to_zero(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((12, 5))
        model = pca_fit(X, 3)
        Z = pca_transform(model, model.mean.reshape(1, -1))
        assert np.max(np.abs(Z)) < 1e-12

    def test_output_shape(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((50, 20))
        model = pca_fit(X, 7)
        assert pca_transform(model, X).shape == (50, 7)

    def test_shape_mismatch(self):
        rng = np.random.default_rng(7)
        model = pca_fit(rng.standard_normal((10, 4)), 2)
        with pytest.raises(ShapeError):
            pca_transform(model, rng.standard_normal((5, 6)))

    def test_transformed_fit_data_statistics(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((60, 8)) * np.array([3, 1, 1, 1, 2, 1, 1, 0.5])
        model = pca_fit(X, 5)
        Z = pca_transform(model, X)
        assert np.max(np.abs(Z.mean(axis=0))) < 1e-9
        cov = Z.T @ Z / (60 - 1)
        assert np.max(np.abs(cov - np.diag(model.explained_variance))) < 1e-8


def test_reconstruction_error_nonincreasing_in_d():
    rng = np.random.default_rng(10)
    X = rng.standard_normal((30, 9))
    errors = []
    for d in range(1, 10):
        model = pca_fit(X, d)
        Z = pca_transform(model, X)
        recon = Z @ model.components.T + model.mean
        errors.append(np.linalg.norm(X - recon))
    assert np.all(np.diff(errors) <= 1e-9)
