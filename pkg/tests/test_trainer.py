from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import torch

from floodsight.errors import DivergenceError, InvalidInputError
from floodsight.models import DualUNetConfig, SegUNetConfig, build_dual_unet, build_segmentation_unet
from floodsight.raster import align_and_stack_hand
from floodsight.synthetic import SynthConfig, generate_damage_pair, generate_flood_scene
from floodsight.training import (
    DamagePairDataset,
    DamageSample,
    LossConfig,
    OptimizerConfig,
    SceneDataset,
    SceneSample,
    build_sampling_plan,
    history_to_csv,
    train,
)

SMALL = SynthConfig(seed=3, image_size=16, n_samples=6, buildings_per_image=(1, 2), building_size=(3, 5))


def _damage_dataset(count: int = 6) -> DamagePairDataset:
    samples = [DamageSample(*generate_damage_pair(SMALL, i)) for i in range(count)]
    return DamagePairDataset(samples)


def _state(model: torch.nn.Module) -> dict:
    return {k: v.clone() for k, v in model.state_dict().items()}


def test_zero_epochs_leave_parameters_unchanged() -> None:
    dataset = _damage_dataset()
    model = build_dual_unet(DualUNetConfig(depth=2, base_width=4))
    before = _state(model)
    result = train(model, dataset, build_sampling_plan(dataset.class_index()), LossConfig(), epochs=0)
    assert result.history == []
    assert all(torch.equal(before[k], v) for k, v in result.model.state_dict().items())


def test_training_records_finite_history(tmp_path: Path) -> None:
    dataset = _damage_dataset()
    model = build_dual_unet(DualUNetConfig(depth=2, base_width=4))
    plan = build_sampling_plan(dataset.class_index(), oversample_factor=2)
    result = train(
        model,
        dataset,
        plan,
        LossConfig(),
        OptimizerConfig(batch_size=4),
        epochs=2,
        val_dataset=_damage_dataset(2),
    )

    assert [r.epoch for r in result.history] == [0, 1]
    for record in result.history:
        assert np.isfinite(record.loss)
        assert 0.0 <= record.val_pixel_accuracy <= 1.0
        assert len(record.val_f1) == 5

    path = history_to_csv(tmp_path / "history.csv", result.history, ["nb", "nd", "mi", "ma", "de"])
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["epoch", "loss", "val_pixel_accuracy", "f1_nb", "f1_nd", "f1_mi", "f1_ma", "f1_de"]
    assert len(frame) == 2


def test_training_is_deterministic_given_seed() -> None:
    dataset = _damage_dataset()
    plan = build_sampling_plan(dataset.class_index())
    runs = []
    for _ in range(2):
        model = build_dual_unet(DualUNetConfig(depth=2, base_width=4), seed=1)
        runs.append(train(model, dataset, plan, LossConfig(), OptimizerConfig(batch_size=3), epochs=1, seed=9))
    assert runs[0].history[0].loss == runs[1].history[0].loss
    first, second = runs[0].model.state_dict(), runs[1].model.state_dict()
    assert all(torch.equal(first[k], second[k]) for k in first)


def test_segmentation_model_trains_on_hand_stack() -> None:
    samples = []
    for i in range(4):
        rgb, hand, truth = generate_flood_scene(SMALL, i)
        samples.append(SceneSample(align_and_stack_hand(rgb, hand), truth))
    dataset = SceneDataset(samples)
    model = build_segmentation_unet(SegUNetConfig(in_channels=4, depth=2, base_width=4))
    result = train(model, dataset, build_sampling_plan(dataset.class_index(), 1), LossConfig(), epochs=1)
    assert np.isfinite(result.history[0].loss)


def test_plan_outside_dataset_is_rejected() -> None:
    dataset = _damage_dataset(2)
    plan = build_sampling_plan([{0}, {1}, {1}])
    with pytest.raises(InvalidInputError):
        train(build_dual_unet(DualUNetConfig(depth=2, base_width=4)), dataset, plan, LossConfig(), epochs=1)


def test_non_finite_loss_aborts(mocker) -> None:
    dataset = _damage_dataset(2)
    mocker.patch(
        "floodsight.training.trainer.combined_loss",
        return_value=torch.tensor(float("nan"), requires_grad=True),
    )
    with pytest.raises(DivergenceError, match="epoch 0"):
        train(
            build_dual_unet(DualUNetConfig(depth=2, base_width=4)),
            dataset,
            build_sampling_plan(dataset.class_index()),
            LossConfig(),
            epochs=1,
        )
