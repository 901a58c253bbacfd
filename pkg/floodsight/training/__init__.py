"""Losses, class weighting, oversampling and the training loop."""

from floodsight.training.datasets import DamagePairDataset, DamageSample, SceneDataset, SceneSample
from floodsight.training.losses import (
    LossConfig,
    combined_loss,
    generalized_dice_loss,
    one_hot,
    weighted_cross_entropy,
)
from floodsight.training.sampling import (
    SamplingPlan,
    build_sampling_plan,
    class_pixel_counts,
    compute_class_weights,
)
from floodsight.training.trainer import (
    EpochRecord,
    OptimizerConfig,
    TrainResult,
    evaluate,
    history_to_csv,
    train,
)

__all__ = [
    "DamagePairDataset",
    "DamageSample",
    "SceneDataset",
    "SceneSample",
    "LossConfig",
    "combined_loss",
    "generalized_dice_loss",
    "one_hot",
    "weighted_cross_entropy",
    "SamplingPlan",
    "build_sampling_plan",
    "class_pixel_counts",
    "compute_class_weights",
    "EpochRecord",
    "OptimizerConfig",
    "TrainResult",
    "evaluate",
    "history_to_csv",
    "train",
]
