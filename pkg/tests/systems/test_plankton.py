"""
Тесты модели планктона NPZD.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from implicit_pf.systems.plankton import (
    DGAMMA,
    P,
    PlanktonParams,
    PlanktonState,
    clamp,
    plankton_drift,
    plankton_model,
    plankton_obs,
    plankton_obs_jacobian,
    plankton_step,
)


def _reference_rhs(p, z, n, d, gamma):
    """Правая часть системы, выписанная почленно."""
    uptake = n / (0.2 + n) * gamma * p
    grazing = p / (0.1 + p) * z
    return [
        uptake - 0.1 * p - 0.6 * grazing,
        0.18 * grazing - 0.1 * z,
        0.1 * d + 0.24 * grazing - uptake + 0.05 * z,
        -0.1 * d + 0.1 * p + 0.18 * grazing + 0.05 * z,
    ]


class TestParams:
    """Тесты параметров."""

    def test_default_noise_is_one_percent(self, plankton_params):
        assert plankton_params.sigma_p == pytest.approx(0.00125)
        assert plankton_params.sigma_n == pytest.approx(0.00764)

    def test_noise_follows_changed_initial_value(self):
        params = PlanktonParams(p0=0.5)

        assert params.sigma_p == pytest.approx(0.005)

    def test_explicit_noise_kept(self):
        assert PlanktonParams(sigma_p=0.125).sigma_p == 0.125

    def test_with_system_noise(self, plankton_params):
        assert plankton_params.with_system_noise(0.125).sigma_p == 0.125

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            PlanktonParams(unknown=1.0)

    def test_floors(self, plankton_params):
        np.testing.assert_allclose(plankton_params.floors, [0.00125, 0.0000708, 0.00764, 0.00136])


class TestDrift:
    """Тесты правой части."""

    def test_initial_conditions(self, plankton_params):
        rhs = plankton_drift(plankton_params.initial, plankton_params)

        np.testing.assert_allclose(rhs[:4], _reference_rhs(0.125, 0.00708, 0.764, 0.136, 0.14), rtol=1e-14)
        assert rhs[DGAMMA] == 0.0

    def test_total_mass_conserved(self, plankton_params):
        """Сумма dP + dZ + dN + dD равна нулю: система замкнута по веществу."""
        state = np.array([0.3, 0.05, 0.4, 0.2, 0.02])

        rhs = plankton_drift(state, plankton_params)

        assert rhs[:4].sum() == pytest.approx(0.0, abs=1e-15)

    def test_floor_values_make_grazing_small(self, plankton_params):
        floors = plankton_params.floors
        state = np.array([floors[0], floors[1], 0.764, 0.136, 0.0])

        rhs = plankton_drift(state, plankton_params)

        assert rhs[3] == pytest.approx(-0.1 * 0.136 + 0.1 * floors[0], rel=1e-3)

    def test_growth_perturbation_decays(self, plankton_params):
        state = np.array([0.125, 0.00708, 0.764, 0.136, 0.1])

        assert plankton_drift(state, plankton_params)[DGAMMA] == pytest.approx(-0.01)


class TestStep:
    """Тесты шага модели."""

    def test_noise_free_step_from_initial(self, plankton_params):
        x0 = plankton_params.initial

        result = plankton_step(x0, plankton_params)

        expected = clamp(x0 + plankton_drift(x0, plankton_params), plankton_params)
        np.testing.assert_allclose(result.to_vector(), expected, rtol=1e-14)

    def test_clamped_at_floor(self, plankton_params):
        noise = np.array([-1000.0, 0.0, 0.0, 0.0, 0.0])

        result = plankton_step(plankton_params.initial, plankton_params, noise)

        assert result.P == pytest.approx(0.01 * 0.125)

    def test_growth_perturbation_ar1(self, plankton_params):
        state = PlanktonState(P=0.125, Z=0.00708, N=0.764, D=0.136, dgamma=0.1)

        result = plankton_step(state, plankton_params)

        assert result.dgamma == pytest.approx(0.09)
        assert result.gamma(plankton_params) == pytest.approx(0.41)

    def test_gamma_stays_at_base(self, plankton_params):
        state = PlanktonState.from_vector(plankton_params.initial)
        for t in range(5):
            state = plankton_step(state, plankton_params, time=t)

        assert state.gamma(plankton_params) == pytest.approx(0.14)

    def test_state_conversion(self):
        state = PlanktonState(P=1.0, Z=2.0, N=3.0, D=4.0, dgamma=0.5)

        assert PlanktonState.from_vector(state.to_vector()) == state
        assert state.as_dict()["N"] == 3.0


class TestObservation:
    """Тесты наблюдения log P."""

    def test_unit_p(self):
        state = np.array([1.0, 0.1, 0.1, 0.1, 0.0])

        assert plankton_obs(state) == 0.0
        np.testing.assert_array_equal(plankton_obs_jacobian(state), [[1.0, 0.0, 0.0, 0.0, 0.0]])

    def test_initial_p(self, plankton_params):
        assert plankton_obs(plankton_params.initial) == pytest.approx(math.log(0.125))

    def test_below_floor(self, plankton_params):
        state = np.array([0.0, 0.1, 0.1, 0.1, 0.0])

        # Касательная к log в P_floor = 0.00125
        assert plankton_obs(state, plankton_params) == pytest.approx(math.log(0.00125) - 1.0)
        assert plankton_obs_jacobian(state, plankton_params)[0, P] == pytest.approx(800.0)

    def test_smooth_at_floor(self, plankton_params):
        floor = plankton_params.floors[P]
        below = np.array([floor * (1 - 1e-9), 0.1, 0.1, 0.1, 0.0])
        above = np.array([floor * (1 + 1e-9), 0.1, 0.1, 0.1, 0.0])

        assert plankton_obs(below, plankton_params) == pytest.approx(plankton_obs(above, plankton_params), abs=1e-8)
        assert plankton_obs_jacobian(below, plankton_params)[0, P] == pytest.approx(
            plankton_obs_jacobian(above, plankton_params)[0, P], rel=1e-8
        )

    def test_increasing_below_floor(self, plankton_params):
        values = [plankton_obs(np.array([p, 0.1, 0.1, 0.1, 0.0]), plankton_params) for p in (-0.5, -0.01, 0.0, 0.001)]

        assert values == sorted(values)
        assert len(set(values)) == 4


class TestModel:
    def test_dimensions(self, npzd_model):
        assert npzd_model.dim_state == 5
        assert npzd_model.dim_obs == 1
        assert npzd_model.component_names == ("P", "Z", "N", "D", "dgamma")

    def test_daily_noise(self, plankton_params):
        model = plankton_model(plankton_params.model_copy(update={"dt": 0.25}))

        # Дисперсия за сутки не зависит от шага схемы
        variance_per_day = model.prior_cov_diag(np.zeros(5), 0) / 0.25
        np.testing.assert_allclose(variance_per_day, plankton_params.noise**2, rtol=1e-12)

    def test_constrain(self, npzd_model, plankton_params):
        clamped = npzd_model.constrain(np.array([-1.0, -1.0, -1.0, -1.0, -0.5]))

        np.testing.assert_allclose(clamped[:4], plankton_params.floors)
        assert clamped[DGAMMA] == -0.5
