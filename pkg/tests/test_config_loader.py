"""Tests for experiment configuration loading."""

import json
from pathlib import Path

import pytest

from src.domain.errors import ConfigError
from src.domain.experiment import QUICK_N, ExperimentConfig, system_for_snr
from src.io.config_loader import build_config, read_config_file

PRESET_DIR = Path(__file__).resolve().parent.parent / "data" / "experiments"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("AIRCOMP_OUT_DIR", raising=False)
    monkeypatch.delenv("AIRCOMP_WORKERS", raising=False)


def write_md(path, body="A short description."):
    path.write_text(f"---\nexperiment: fading_sweep_snr\nK: 10\nsnr_db: [0, 10]\nN: 400\n---\n\n{body}\n")
    return path


class TestReadConfigFile:
    def test_markdown_frontmatter(self, tmp_path):
        data = read_config_file(write_md(tmp_path / "preset.md"))
        assert data["experiment"] == "fading_sweep_snr"
        assert data["description"] == "A short description."

    def test_json(self, tmp_path):
        path = tmp_path / "preset.json"
        path.write_text(json.dumps({"experiment": "static_demo", "K": 4}))
        assert read_config_file(path) == {"experiment": "static_demo", "K": 4}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / "missing.json")

    def test_corrupted_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_non_mapping(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            read_config_file(path)


class TestBuildConfig:
    def test_scalar_k_becomes_list(self, tmp_path):
        config = build_config(write_md(tmp_path / "preset.md"))
        assert config.K == [10]
        assert config.snr_db == [0.0, 10.0]

    def test_flags_override_file(self, tmp_path):
        config = build_config(write_md(tmp_path / "preset.md"), {"N": 200, "seed": None})
        assert config.N == 200
        assert config.seed == ExperimentConfig.model_fields["seed"].default

    def test_file_overrides_env_and_env_overrides_defaults(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AIRCOMP_OUT_DIR", "from-env")
        monkeypatch.setenv("AIRCOMP_WORKERS", "3")
        path = tmp_path / "preset.json"
        path.write_text(json.dumps({"experiment": "static_demo", "out_dir": "from-file"}))
        config = build_config(path, defaults={"workers": 1})
        assert config.out_dir == "from-file"
        assert config.workers == 3

    def test_invalid_env_value(self, monkeypatch):
        monkeypatch.setenv("AIRCOMP_WORKERS", "many")
        with pytest.raises(ConfigError):
            build_config(overrides={"experiment": "static_demo"})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            build_config(overrides={"experiment": "static_demo", "speed": 3})

    def test_unknown_experiment_rejected(self):
        with pytest.raises(ConfigError):
            build_config(overrides={"experiment": "dragon_fight"})

    def test_fading_needs_enough_states(self):
        with pytest.raises(ConfigError):
            build_config(overrides={"experiment": "fading_sweep_K", "N": 50})

    def test_heterogeneous_needs_multiple_of_five(self):
        with pytest.raises(ConfigError):
            build_config(overrides={"experiment": "static_sweep_K", "K": [3], "snr_profile": "heterogeneous"})

    def test_shipped_presets_load(self):
        presets = sorted(PRESET_DIR.glob("*.md")) + sorted(PRESET_DIR.glob("*.json"))
        assert presets
        for preset in presets:
            build_config(preset)


class TestQuickMode:
    def test_reduces_sizes(self):
        config = ExperimentConfig(experiment="fading_sweep_K", K=[5, 10, 15, 20, 25], N=5000, quick=True).effective()
        assert config.N == QUICK_N
        assert config.replicates <= 2
        assert len(config.K) <= 3

    def test_no_change_without_quick(self):
        config = ExperimentConfig(experiment="fading_sweep_K", N=5000)
        assert config.effective() is config


class TestSystemForSnr:
    def test_uniform_profile(self):
        cfg = system_for_snr(3, 10.0)
        assert cfg.noise_var == pytest.approx(0.1)
        assert cfg.power_budgets == (1.0, 1.0, 1.0)

    def test_heterogeneous_total_budget_parity(self):
        cfg = system_for_snr(10, 10.0, "heterogeneous")
        assert cfg.noise_var == 1.0
        assert sum(cfg.power_budgets) == pytest.approx(10 * 10.0)
        assert cfg.power_budgets[0] < cfg.power_budgets[4]
        assert cfg.power_budgets[0] == pytest.approx(cfg.power_budgets[5])
