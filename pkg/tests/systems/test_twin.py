"""
Тесты генератора данных двойного эксперимента и построения моделей по конфигурации.
"""

import numpy as np
import pytest

from implicit_pf.config import ModelConfig
from implicit_pf.core.exceptions import ConfigError, ModelError
from implicit_pf.systems import (
    build_model,
    initial_state,
    linear_gaussian_model,
    plankton_model,
    regular_obs_times,
    synth_twin_data,
)


class TestSynthTwinData:
    """Тесты synth_twin_data."""

    def test_noiseless_limit(self):
        model = linear_gaussian_model([[-0.1]], [1.0], [[2.0]], [1e-12])

        data = synth_twin_data(model, 4, regular_obs_times(10), steps=10)

        for n in range(1, 11):
            np.testing.assert_allclose(data.observation(n), 2.0 * data.truth[n], atol=1e-10)

    def test_no_observations(self, scalar_model):
        data = synth_twin_data(scalar_model, 1, [], steps=5)

        assert data.obs_count == 0
        assert all(data.observation(n) is None for n in range(6))
        assert data.truth.shape == (6, 1)

    def test_weekly_plankton_record_count(self, plankton_params):
        times = regular_obs_times(190 * 7, every=7)

        data = synth_twin_data(plankton_model(plankton_params), 0, times, steps=190 * 7, x0=plankton_params.initial)

        assert data.obs_count == 190
        assert np.all(data.truth[:, :4] >= plankton_params.floors)

    def test_reproducible(self, scalar_model):
        a = synth_twin_data(scalar_model, 9, [2, 4], steps=4)
        b = synth_twin_data(scalar_model, 9, [2, 4], steps=4)

        np.testing.assert_array_equal(a.truth, b.truth)
        np.testing.assert_array_equal(a.observation(4), b.observation(4))

    def test_steps_default_to_last_observation(self, scalar_model):
        assert synth_twin_data(scalar_model, 0, [3, 8]).steps == 8

    def test_out_of_range_observation(self, scalar_model):
        with pytest.raises(ModelError):
            synth_twin_data(scalar_model, 0, [0, 2], steps=3)

    def test_unsorted_observation_times(self, scalar_model):
        with pytest.raises(ModelError):
            synth_twin_data(scalar_model, 0, [3, 2], steps=3)

    def test_observation_outside_record(self, scalar_model):
        data = synth_twin_data(scalar_model, 0, [1], steps=1)

        assert data.observation(5) is None
        assert data.observation(-1) is None


def test_regular_obs_times():
    assert regular_obs_times(10, every=3) == [3, 6, 9]
    assert regular_obs_times(5, every=2, first=1) == [1, 3, 5]


class TestBuildModel:
    """Тесты построения модели по секции [model]."""

    def test_plankton(self):
        model = build_model(ModelConfig(kind="plankton"))

        assert model.name == "plankton"

    def test_iid_gaussian(self):
        model = build_model(ModelConfig(kind="iid_gaussian", dims=7))

        assert model.dim_state == 7

    def test_random_linear(self):
        model = build_model(ModelConfig(kind="linear", linear={"random_state_dims": 3, "random_obs_dims": 2}))

        assert (model.dim_state, model.dim_obs) == (3, 2)

    def test_initial_state_defaults(self):
        plankton = ModelConfig(kind="plankton")
        linear = ModelConfig(kind="linear")

        np.testing.assert_allclose(initial_state(plankton, build_model(plankton)), [0.125, 0.00708, 0.764, 0.136, 0.0])
        np.testing.assert_allclose(initial_state(linear, build_model(linear)), [0.0])

    def test_initial_state_wrong_length(self):
        cfg = ModelConfig(kind="iid_gaussian", dims=2, x0=[1.0])

        with pytest.raises(ConfigError):
            initial_state(cfg, build_model(cfg))
