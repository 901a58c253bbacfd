"""Class weighting and minor/major-damage oversampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Set, Tuple

import numpy as np

from floodsight.errors import InvalidInputError

logger = logging.getLogger(__name__)

OVERSAMPLED_CLASSES = frozenset({2, 3})  # Minor and Major damage
WEIGHT_CAP = 50.0


def class_pixel_counts(masks: Iterable[np.ndarray], num_classes: int = 5) -> np.ndarray:
    counts = np.zeros(num_classes, dtype=np.int64)
    for labels in masks:
        counts += np.bincount(np.asarray(labels).ravel(), minlength=num_classes)[:num_classes]
    return counts


def compute_class_weights(
    masks: Iterable[np.ndarray] | None = None,
    num_classes: int = 5,
    counts: Sequence[int] | None = None,
    cap: float = WEIGHT_CAP,
) -> List[float]:
    """Inverse pixel-frequency weights, capped and normalized to mean 1.

    The cap is ``cap`` times the smallest raw weight; classes with no pixels
    receive the cap.

    Args:
        masks: Label arrays of the training set
        num_classes: Number of classes
        counts: Precomputed per-class pixel counts (instead of ``masks``)
        cap: Largest allowed ratio between two weights

    Returns:
        ``num_classes`` positive weights with mean 1
    """
    if counts is None:
        if masks is None:
            raise InvalidInputError("Provide either masks or counts")
        counts = class_pixel_counts(masks, num_classes)
    counts = np.asarray(counts, dtype=np.float64)
    if counts.sum() <= 0:
        raise InvalidInputError("Cannot derive class weights from an empty dataset")

    raw = np.full(counts.shape, np.inf)
    present = counts > 0
    raw[present] = counts.sum() / counts[present]
    ceiling = cap * raw[present].min()
    raw = np.minimum(raw, ceiling)
    weights = raw / raw.mean()
    logger.info("Class weights from pixel counts %s: %s", counts.astype(int).tolist(), np.round(weights, 4).tolist())
    return weights.tolist()


@dataclass(frozen=True)
class SamplingPlan:
    """Ordered sample indices with repetitions for one pass over the data."""

    indices: Tuple[int, ...]
    oversample_factor: int

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def reshuffled(self, seed: int) -> "SamplingPlan":
        order = np.random.default_rng(seed).permutation(len(self.indices))
        return SamplingPlan(tuple(self.indices[i] for i in order), self.oversample_factor)


def build_sampling_plan(
    dataset_index: Sequence[Set[int] | Iterable[int]],
    oversample_factor: int = 4,
    seed: int = 0,
) -> SamplingPlan:
    """Repeat every sample holding Minor or Major damage pixels ``k`` times.

    Args:
        dataset_index: For each sample, the set of classes present in its mask
        oversample_factor: k >= 1
        seed: Shuffle seed

    Returns:
        Shuffled SamplingPlan
    """
    if oversample_factor < 1:
        raise InvalidInputError(f"oversample_factor must be >= 1, got {oversample_factor}")
    indices: List[int] = []
    boosted = 0
    for i, classes in enumerate(dataset_index):
        if OVERSAMPLED_CLASSES & set(classes):
            indices.extend([i] * oversample_factor)
            boosted += 1
        else:
            indices.append(i)
    logger.info(
        "Sampling plan: %d samples, %d oversampled x%d, %d draws",
        len(dataset_index),
        boosted,
        oversample_factor,
        len(indices),
    )
    return SamplingPlan(tuple(indices), oversample_factor).reshuffled(seed)
