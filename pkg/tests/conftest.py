"""Shared fixtures and the ``--run-slow`` switch for training experiments."""

from __future__ import annotations

import logging
from pathlib import Path

import pytest

from floodsight.config import PipelineConfig, load_config


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="Run slow training experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Keep FLOODSIGHT_* variables from the developer shell out of the tests."""
    for name in ("SEED", "WORKERS", "OUTPUT_DIR", "LOG_LEVEL"):
        monkeypatch.delenv(f"FLOODSIGHT_{name}", raising=False)


@pytest.fixture
def tiny_config(tmp_path: Path) -> PipelineConfig:
    """A run small enough to train and score in seconds on a CPU."""
    logging.getLogger("floodsight").setLevel(logging.WARNING)
    return load_config(
        overrides={
            "seed": 1,
            "workers": 1,
            "tile_size": 16,
            "paths": {
                "data_dir": str(tmp_path / "data"),
                "checkpoint_dir": str(tmp_path / "checkpoints"),
                "output_dir": str(tmp_path / "outputs"),
            },
            "synth": {
                "image_size": 16,
                "n_samples": 5,
                "buildings_per_image": [1, 2],
                "building_size": [3, 5],
            },
            "damage": {"depth": 2, "base_width": 4},
            "segmentation": {"depth": 2, "base_width": 4},
            "training": {"epochs": 1, "val_fraction": 0.4, "optimizer": {"batch_size": 2}},
        },
        use_env=False,
    )
