import numpy as np
import pytest

from implicit_pf.core.exceptions import ModelError
from implicit_pf.services.implicit_sampling import forward_step
from implicit_pf.systems import iid_gaussian_model


class TestIidGaussianModel:
    """Тесты модели с независимыми гауссовыми компонентами."""

    def test_step_ignores_previous_state(self):
        """X^{n+1} = V^n независимо от X^n."""
        model = iid_gaussian_model(3)
        v = np.array([0.4, -0.2, 1.0])

        new_state = np.full(3, 7.0) + model.drift(np.full(3, 7.0), 0) + model.diffusion(np.full(3, 7.0), 0) * v

        np.testing.assert_allclose(new_state, v)

    def test_closed_forms(self):
        model = iid_gaussian_model(6)
        b = np.linspace(-1.0, 1.0, 6)

        result = forward_step(model, np.zeros(6), b, np.zeros(6))

        np.testing.assert_allclose(result.pg.sigma_inv, 2.0 * np.eye(6))
        np.testing.assert_allclose(result.pg.mean, b / 2)
        assert result.phi == pytest.approx(b @ b / 4)

    def test_scalar_zero_observation(self):
        result = forward_step(iid_gaussian_model(1), np.zeros(1), np.zeros(1), np.zeros(1))

        assert result.new_state[0] == 0.0

    def test_linear_parts(self):
        model = iid_gaussian_model(2)

        assert model.linear_obs
        np.testing.assert_array_equal(model.linear.drift_matrix, -np.eye(2))
        np.testing.assert_array_equal(model.linear.obs_matrix, np.eye(2))

    def test_invalid_dimension(self):
        with pytest.raises(ModelError):
            iid_gaussian_model(0)
