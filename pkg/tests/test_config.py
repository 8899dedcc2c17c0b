"""
Тесты загрузки и валидации конфигурации.
"""

from pathlib import Path

import pytest

from implicit_pf.config import RunConfig, RuntimeSettings, apply_overrides, load_run_config, parse_run_config
from implicit_pf.core.enums import FilterKind, ModelKind, ResampleMode
from implicit_pf.core.exceptions import ConfigError


class TestLoadRunConfig:
    """Тесты чтения TOML файла."""

    def test_load(self, config_file):
        cfg = load_run_config(config_file)

        assert cfg.filter == FilterKind.IMPLICIT
        assert cfg.filters == [FilterKind.IMPLICIT, FilterKind.SIR]
        assert cfg.particles == 8
        assert cfg.model.kind == ModelKind.LINEAR
        assert cfg.model.linear.drift_matrix == [[-0.1]]
        assert cfg.observations.schedule(cfg.steps) == [1, 2, 3, 4]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "missing.toml")

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("particles = = 3\n", encoding="utf-8")

        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "extra.toml"
        path.write_text("particles = 3\nunknown = 1\n", encoding="utf-8")

        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_shipped_configs_load(self):
        configs = sorted((Path(__file__).parent.parent / "configs").glob("*.toml"))

        assert configs
        for path in configs:
            assert isinstance(load_run_config(path), RunConfig)


class TestValidation:
    """Тесты ограничений RunConfig."""

    def test_defaults(self):
        cfg = parse_run_config({})

        assert cfg.particles == 100
        assert cfg.resample.mode == ResampleMode.EVERY_STEP
        assert cfg.truth_seed == cfg.seed

    def test_explicit_truth_seed(self):
        cfg = parse_run_config({"seed": 3, "observations": {"truth_seed": 11}})

        assert cfg.truth_seed == 11

    @pytest.mark.parametrize(
        "data",
        [
            {"particles": 0},
            {"steps": -1},
            {"filter": "kalman_ensemble"},
            {"filters": ["implicit", "implicit"]},
            {"observations": {"times": [3, 2]}},
            {"resample": {"mode": "weight_ratio", "ratio_limit": 1.0}},
            {"iteration": {"tol": 0.0}},
        ],
    )
    def test_invalid(self, data):
        with pytest.raises(ConfigError):
            parse_run_config(data)

    def test_explicit_times_clipped_to_steps(self):
        cfg = parse_run_config({"steps": 5, "observations": {"times": [2, 5, 9]}})

        assert cfg.observations.schedule(cfg.steps) == [2, 5]

    def test_plankton_noise_override(self):
        cfg = parse_run_config({"model": {"kind": "plankton", "plankton": {"sigma_p": 0.125}}})

        assert cfg.model.plankton.sigma_p == 0.125
        assert cfg.model.plankton.sigma_n == pytest.approx(0.00764)


class TestApplyOverrides:
    def test_none_values_skipped(self, linear_config):
        assert apply_overrides(linear_config, seed=None, particles=None) is linear_config

    def test_override(self, linear_config):
        cfg = apply_overrides(linear_config, seed=42, filter="sir", particles=5)

        assert (cfg.seed, cfg.filter, cfg.particles) == (42, FilterKind.SIR, 5)
        assert cfg.model == linear_config.model

    def test_invalid_override(self, linear_config):
        with pytest.raises(ConfigError):
            apply_overrides(linear_config, particles=0)

    def test_plankton_config_round_trip(self, plankton_config):
        cfg = apply_overrides(plankton_config, steps=3)

        assert cfg.model.plankton == plankton_config.model.plankton

    def test_nested_section_merged(self, plankton_config):
        """Переопределение одного поля секции сохраняет остальные поля."""
        cfg = apply_overrides(plankton_config, iteration={"tol": 1e-8}, observations={"every": 2})

        assert cfg.iteration.tol == 1e-8
        assert cfg.iteration.warm_start is True
        assert cfg.iteration.max_iters == plankton_config.iteration.max_iters
        assert cfg.observations.every == 2

    def test_nested_invalid_value(self, plankton_config):
        with pytest.raises(ConfigError):
            apply_overrides(plankton_config, iteration={"max_iters": 0})


class TestRuntimeSettings:
    def test_defaults(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)

        settings = RuntimeSettings()

        assert settings.workers == 1
        assert settings.output_dir == Path("output")

    def test_environment(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("IMPLICIT_PF_WORKERS", "4")
        monkeypatch.setenv("IMPLICIT_PF_OUTPUT_DIR", str(tmp_path / "out"))

        settings = RuntimeSettings()

        assert settings.workers == 4
        assert settings.output_dir == tmp_path / "out"
