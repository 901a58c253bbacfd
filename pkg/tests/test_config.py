from __future__ import annotations

from pathlib import Path

import pytest

from floodsight.config import PipelineConfig, env_overrides, load_config, save_config
from floodsight.errors import ConfigError

YAML_CONFIG = """\
seed: 7
tile_size: 256
usng_precision: 3
paths:
  data_dir: data
  output_dir: /tmp/floodsight-out
training:
  epochs: 5
  loss:
    dice_weight: 0.5
"""

MARKDOWN_CONFIG = """\
---
seed: 11
aggregation_level: zip
damage:
  depth: 3
  skip_mode: pre_plus_difference
---
Houston run with pre-image features in the skips.
"""


def _write(tmp_path: Path, name: str, text: str) -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_without_a_file() -> None:
    config = load_config(use_env=False)
    assert config.seed == 0
    assert config.usng_precision == 2
    assert config.training.oversample_factor == 4
    assert config.training.optimizer.learning_rate == pytest.approx(1e-3)
    assert config.damage_factors.factor(4) == 1.0


def test_yaml_file(tmp_path: Path) -> None:
    config = load_config(_write(tmp_path, "run.yaml", YAML_CONFIG), use_env=False)
    assert config.seed == 7
    assert config.tile_size == 256
    assert config.training.epochs == 5
    assert config.training.loss.dice_weight == 0.5
    assert config.paths.data_dir == (tmp_path / "data").resolve()
    assert config.paths.output_dir == Path("/tmp/floodsight-out")


def test_markdown_front_matter_keeps_body_as_notes(tmp_path: Path) -> None:
    config = load_config(_write(tmp_path, "experiment.md", MARKDOWN_CONFIG), use_env=False)
    assert config.seed == 11
    assert config.aggregation_level == "zip"
    assert config.damage.skip_mode == "pre_plus_difference"
    assert config.notes == "Houston run with pre-image features in the skips."


def test_environment_beats_file_and_flags_beat_environment(tmp_path: Path, monkeypatch) -> None:
    path = _write(tmp_path, "run.yaml", YAML_CONFIG)
    monkeypatch.setenv("FLOODSIGHT_SEED", "21")
    monkeypatch.setenv("FLOODSIGHT_WORKERS", "3")
    monkeypatch.setenv("FLOODSIGHT_OUTPUT_DIR", str(tmp_path / "env-out"))
    monkeypatch.setenv("FLOODSIGHT_LOG_LEVEL", "debug")

    config = load_config(path)
    assert (config.seed, config.workers, config.log_level) == (21, 3, "DEBUG")
    assert config.paths.output_dir == tmp_path / "env-out"

    flagged = load_config(path, overrides={"seed": 99, "training": {"epochs": 1}})
    assert flagged.seed == 99
    assert flagged.training.epochs == 1
    assert flagged.training.loss.dice_weight == 0.5


def test_env_overrides_reject_bad_integers() -> None:
    assert env_overrides({}) == {}
    with pytest.raises(ConfigError):
        env_overrides({"FLOODSIGHT_WORKERS": "many"})


@pytest.mark.parametrize("name", ["saved.yaml", "saved.md"])
def test_save_and_reload(tmp_path: Path, name: str) -> None:
    original = load_config(
        overrides={"seed": 5, "notes": "baseline", "paths": {"output_dir": str(tmp_path / "o")}},
        use_env=False,
    )
    restored = load_config(save_config(tmp_path / name, original), use_env=False)
    assert restored == original


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.yaml", use_env=False)


@pytest.mark.parametrize(
    "text",
    [
        "- just\n- a list\n",
        "seed: [unclosed\n",
        "usng_precision: 9\n",
        "log_level: chatty\n",
        "training:\n  oversample_factor: 0\n",
        "aggregation_level: state\n",
    ],
)
def test_invalid_files(tmp_path: Path, text: str) -> None:
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "bad.yaml", text), use_env=False)


def test_empty_file_gives_defaults(tmp_path: Path) -> None:
    config = load_config(_write(tmp_path, "empty.yaml", ""), use_env=False)
    assert config.model_dump(exclude={"paths"}) == PipelineConfig().model_dump(exclude={"paths"})


def test_effective_workers() -> None:
    assert PipelineConfig(workers=2).effective_workers == 2
    assert PipelineConfig().effective_workers >= 1
