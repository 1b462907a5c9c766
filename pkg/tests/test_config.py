"""Tests for config file operations."""

from pathlib import Path

import pytest

from nodal_lab.config import (
    CONFIG_JSON,
    CONFIG_YAML,
    THREADS_ENV,
    ConfigNotFoundError,
    ConfigValidationError,
    canonical_json,
    config_hash,
    find_config,
    load_config,
    resolve_threads,
    save_config,
)
from nodal_lab.models import ExperimentConfig, LabConfig


class TestFindConfig:
    """Tests for find_config function."""

    def test_find_yaml(self, tmp_path: Path):
        (tmp_path / CONFIG_YAML).write_text("threads: 2\n")
        assert find_config(tmp_path) == tmp_path / CONFIG_YAML

    def test_find_json(self, tmp_path: Path):
        (tmp_path / CONFIG_JSON).write_text("{}")
        assert find_config(tmp_path) == tmp_path / CONFIG_JSON

    def test_prefers_yaml(self, tmp_path: Path):
        (tmp_path / CONFIG_YAML).write_text("threads: 2\n")
        (tmp_path / CONFIG_JSON).write_text("{}")
        assert find_config(tmp_path) == tmp_path / CONFIG_YAML

    def test_not_found(self, tmp_path: Path):
        assert find_config(tmp_path) is None


class TestLoadConfig:
    """Tests for load_config function."""

    def test_load_yaml(self, tmp_path: Path):
        path = tmp_path / "lab.yaml"
        path.write_text(
            "threads: 4\n"
            "rwm:\n"
            "  stats:\n"
            "    n_samples: 500\n"
            "    scale: 64\n"
        )
        config = load_config(path)
        assert config.threads == 4
        assert config.rwm == {"stats": {"n_samples": 500, "scale": 64}}

    def test_load_json_from_directory(self, tmp_path: Path):
        (tmp_path / CONFIG_JSON).write_text('{"kacrice": {"c1": {"alpha": 0.5}}}')
        config = load_config(tmp_path)
        assert config.default_map() == {"kacrice": {"c1": {"alpha": 0.5}}}

    def test_empty_file(self, tmp_path: Path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path) == LabConfig()

    def test_missing(self, tmp_path: Path):
        with pytest.raises(ConfigNotFoundError):
            load_config(tmp_path)

    def test_invalid_yaml(self, tmp_path: Path):
        path = tmp_path / "bad.yaml"
        path.write_text("rwm: [unclosed\n")
        with pytest.raises(ConfigValidationError, match="Invalid YAML"):
            load_config(path)

    def test_invalid_json(self, tmp_path: Path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigValidationError, match="Invalid JSON"):
            load_config(path)

    def test_unknown_group(self, tmp_path: Path):
        path = tmp_path / "lab.yaml"
        path.write_text("plotting:\n  dpi: 300\n")
        with pytest.raises(ConfigValidationError):
            load_config(path)

    def test_bad_threads(self, tmp_path: Path):
        path = tmp_path / "lab.yaml"
        path.write_text("threads: 0\n")
        with pytest.raises(ConfigValidationError):
            load_config(path)


class TestSaveConfig:
    """Tests for save_config function."""

    def test_roundtrip_yaml(self, tmp_path: Path):
        config = LabConfig(threads=3, nodal={"length": {"resolution": 128}})
        path = save_config(tmp_path / CONFIG_YAML, config)
        assert "lattice" not in path.read_text()
        assert load_config(path) == config

    def test_roundtrip_json(self, tmp_path: Path):
        config = LabConfig(loglab={"logmoment": {"p": 4}})
        path = save_config(tmp_path / "sub" / CONFIG_JSON, config)
        assert load_config(path) == config


class TestConfigHash:
    """Tests for the canonical config and its hash."""

    def _config(self, **params) -> ExperimentConfig:
        return ExperimentConfig(
            command="rwm stats", params={"scale": 32.0, **params}, seed=7
        )

    def test_ignores_output_and_threads(self):
        a = self._config(output="a.csv")
        b = self._config(output="b.csv", threads=8)
        assert canonical_json(a) == canonical_json(b)
        assert config_hash(a) == config_hash(b)
        assert "output" not in canonical_json(a)

    def test_sensitive_to_parameters(self):
        assert config_hash(self._config()) != config_hash(self._config(n_samples=10))
        other_seed = self._config().model_copy(update={"seed": 8})
        assert config_hash(self._config()) != config_hash(other_seed)

    def test_canonical_form(self):
        assert canonical_json(self._config()) == (
            '{"command":"rwm stats","params":{"scale":32.0},"seed":7}'
        )
        assert len(config_hash(self._config())) == 64


class TestResolveThreads:
    """Tests for thread count precedence."""

    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        assert resolve_threads(2, LabConfig(threads=4)) == 2

    def test_config_before_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        assert resolve_threads(None, LabConfig(threads=4)) == 4

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        assert resolve_threads(None) == 6

    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_threads(None) == 1

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_bad_environment(self, monkeypatch, raw: str):
        monkeypatch.setenv(THREADS_ENV, raw)
        with pytest.raises(ConfigValidationError):
            resolve_threads(None)
