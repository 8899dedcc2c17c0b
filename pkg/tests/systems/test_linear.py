import numpy as np
import pytest

from implicit_pf.core.exceptions import ModelError
from implicit_pf.systems import linear_gaussian_model, random_stable_linear_model


class TestLinearGaussianModel:
    """Тесты линейно-гауссовой модели."""

    def test_maps(self):
        model = linear_gaussian_model([[0.0, 1.0], [-1.0, 0.0]], [1.0, 2.0], [[1.0, 0.0]], [0.5], delta=0.1)
        x = np.array([1.0, 2.0])

        np.testing.assert_allclose(model.drift(x, 0), [0.2, -0.1])
        np.testing.assert_allclose(model.obs_map(x), [1.0])
        np.testing.assert_allclose(model.prior_cov_diag(x, 0), [0.1, 0.4])
        assert not model.constant_drift

    def test_constant_drift_flag(self):
        model = linear_gaussian_model(np.zeros((2, 2)), [1.0, 1.0], np.eye(2), [1.0, 1.0])

        assert model.constant_drift
        assert model.linear_obs

    def test_shape_mismatch(self):
        with pytest.raises(ModelError):
            linear_gaussian_model([[0.0, 1.0]], [1.0], [[1.0]], [1.0])

    def test_non_positive_diffusion(self):
        with pytest.raises(ModelError):
            linear_gaussian_model([[0.0]], [0.0], [[1.0]], [1.0])


class TestRandomStableModel:
    def test_spectral_radius(self):
        model = random_stable_linear_model(4, seed=3)
        transition = np.eye(4) + model.linear.drift_matrix * model.delta

        assert np.max(np.abs(np.linalg.eigvals(transition))) == pytest.approx(0.9)

    def test_reproducible(self):
        a = random_stable_linear_model(3, 2, seed=5)
        b = random_stable_linear_model(3, 2, seed=5)

        np.testing.assert_array_equal(a.linear.obs_matrix, b.linear.obs_matrix)
        assert a.dim_obs == 2
        assert a.name == "linear_random_3x2"
