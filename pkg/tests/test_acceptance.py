"""Desk-scale training experiments on synthetic data.

Each one trains real models for minutes on a CPU; run with ``pytest --run-slow``.
"""

from __future__ import annotations

import numpy as np
import pytest

from floodsight.metrics import ConfusionMatrix, confusion, f1_per_class, iou_per_class, pixel_accuracy
from floodsight.models import (
    DualUNetConfig,
    SegUNetConfig,
    build_dual_unet,
    build_segmentation_unet,
    predict_damage,
    segment,
)
from floodsight.raster import align_and_stack_hand, compute_channel_stats
from floodsight.synthetic import SynthConfig, generate_damage_pair, generate_flood_scene
from floodsight.synthetic.generator import WATER
from floodsight.training import (
    DamagePairDataset,
    DamageSample,
    LossConfig,
    SceneDataset,
    SceneSample,
    build_sampling_plan,
    compute_class_weights,
    train,
)


@pytest.mark.slow
@pytest.mark.parametrize("skip_mode", ["difference", "pre_plus_difference"])
def test_dual_unet_learns_synthetic_damage(skip_mode: str) -> None:
    config = SynthConfig(seed=0, image_size=64, n_samples=200)
    samples = [DamageSample(*generate_damage_pair(config, i)) for i in range(config.n_samples)]
    train_samples, val_samples = samples[:160], samples[160:]

    stats = compute_channel_stats([r for s in train_samples for r in (s.pre, s.post)])
    dataset = DamagePairDataset(train_samples, stats, seed=0)
    weights = compute_class_weights([s.truth.labels for s in train_samples])
    model = build_dual_unet(DualUNetConfig(depth=3, base_width=16, skip_mode=skip_mode), seed=0)
    result = train(
        model,
        dataset,
        build_sampling_plan(dataset.class_index(), oversample_factor=4, seed=0),
        LossConfig(class_weights=weights),
        epochs=20,
        seed=0,
    )

    cm = ConfusionMatrix.empty(5)
    for sample in val_samples:
        cm = cm + confusion(predict_damage(result.model, sample.pre, sample.post, stats), sample.truth)
    assert pixel_accuracy(cm) >= 0.90
    assert f1_per_class(cm)[1:].mean() >= 0.80


def _water_iou(with_hand: bool, seed: int) -> float:
    config = SynthConfig(seed=seed, image_size=64, n_samples=60)
    samples = []
    for i in range(config.n_samples):
        rgb, hand, truth = generate_flood_scene(config, i)
        samples.append(SceneSample(align_and_stack_hand(rgb, hand) if with_hand else rgb, truth))
    train_samples, val_samples = samples[:48], samples[48:]

    stats = compute_channel_stats([s.image for s in train_samples])
    dataset = SceneDataset(train_samples, stats, seed=seed)
    model = build_segmentation_unet(
        SegUNetConfig(in_channels=4 if with_hand else 3, depth=3, base_width=16), seed=seed
    )
    result = train(model, dataset, build_sampling_plan(dataset.class_index(), 1, seed), LossConfig(), epochs=10, seed=seed)

    cm = ConfusionMatrix.empty(5)
    for sample in val_samples:
        cm = cm + confusion(segment(result.model, sample.image, stats).mask, sample.truth)
    return float(iou_per_class(cm)[WATER])


@pytest.mark.slow
def test_hand_channel_improves_water_iou() -> None:
    seeds = range(5)
    with_hand = np.array([_water_iou(True, s) for s in seeds])
    rgb_only = np.array([_water_iou(False, s) for s in seeds])
    # Paired by seed: same scenes, same initialisation stream; every pair must improve
    assert (with_hand > rgb_only).all(), f"HAND {with_hand} vs RGB {rgb_only}"
    assert with_hand.mean() > rgb_only.mean()
