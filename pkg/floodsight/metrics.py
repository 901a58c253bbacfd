"""Pixel-level scoring: confusion matrices, per-class F1, localization F1 and the combined score.

The combined score is ``0.3 * localization_f1 + 0.7 * harmonic_mean(damage F1s)``
over the four damage classes, the xView2 weighting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Sequence

import numpy as np

from floodsight.errors import InvalidInputError
from floodsight.fileio import write_json
from floodsight.raster.georaster import DAMAGE_LEVELS, ClassMask

logger = logging.getLogger(__name__)

LOCALIZATION_WEIGHT = 0.3
DAMAGE_WEIGHT = 0.7

# Row names of the damage assessment results table
REPORT_ROWS = {
    "score": "F1 - Score",
    "localization": "F1 - Localization",
    1: "F1 - No Damage",
    2: "F1 - Minor Damage",
    3: "F1 - Major Damage",
    4: "F1 - Destroyed",
}


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts with rows = truth and columns = prediction."""

    counts: np.ndarray

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.counts.shape != self.counts.shape:
            raise InvalidInputError("Cannot merge confusion matrices of different sizes")
        return ConfusionMatrix(self.counts + other.counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return self.merge(other)

    @classmethod
    def empty(cls, num_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))


def _labels(mask: ClassMask | np.ndarray) -> np.ndarray:
    return mask.labels if isinstance(mask, ClassMask) else np.asarray(mask)


def confusion(
    pred: ClassMask | np.ndarray, truth: ClassMask | np.ndarray, num_classes: int = 5
) -> ConfusionMatrix:
    """``cm[i, j]`` = number of pixels with truth ``i`` predicted as ``j``.

    Raises:
        InvalidInputError: If the masks differ in shape or hold out-of-range labels
    """
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape:
        raise InvalidInputError(f"Prediction {p.shape} and truth {t.shape} differ in shape")
    p = p.astype(np.int64).ravel()
    t = t.astype(np.int64).ravel()
    if p.size and (min(p.min(), t.min()) < 0 or max(p.max(), t.max()) >= num_classes):
        raise InvalidInputError(f"Labels outside [0, {num_classes - 1}]")
    counts = np.bincount(t * num_classes + p, minlength=num_classes ** 2)
    return ConfusionMatrix(counts.reshape(num_classes, num_classes))


def f1_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """F1 = 2TP / (2TP + FP + FN) per class, 0 where the denominator is 0."""
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    return np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)


def iou_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """Intersection over union per class, 0 where the union is empty."""
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    union = counts.sum(axis=0) + counts.sum(axis=1) - tp
    return np.divide(tp, union, out=np.zeros_like(tp), where=union > 0)


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    return float(np.trace(cm.counts) / cm.total) if cm.total else 0.0


def localization_f1(pred: ClassMask | np.ndarray, truth: ClassMask | np.ndarray) -> float:
    """Binary F1 of building (classes 1-4) vs no building (class 0)."""
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape:
        raise InvalidInputError(f"Prediction {p.shape} and truth {t.shape} differ in shape")
    cm = confusion((p > 0).astype(np.uint8), (t > 0).astype(np.uint8), num_classes=2)
    return float(f1_per_class(cm)[1])


def harmonic_mean(values: Sequence[float]) -> float:
    """Harmonic mean, 0 as soon as any value is 0."""
    values = [float(v) for v in values]
    if not values or any(v <= 0 for v in values):
        return 0.0
    return len(values) / sum(1.0 / v for v in values)


def overall_score(loc_f1: float, damage_f1s: Sequence[float]) -> float:
    """Combine localization F1 with the harmonic mean of the 4 damage-class F1s."""
    if len(damage_f1s) != 4:
        raise InvalidInputError(f"Expected 4 damage F1 values, got {len(damage_f1s)}")
    return LOCALIZATION_WEIGHT * float(loc_f1) + DAMAGE_WEIGHT * harmonic_mean(damage_f1s)


def metrics_report(cm: ConfusionMatrix, loc_f1: float) -> Dict[str, float]:
    """Table-style report keyed by row name ("F1 - Score", "F1 - Localization", ...)."""
    f1s = f1_per_class(cm)
    damage = [float(f1s[level]) for level in range(1, len(DAMAGE_LEVELS))]
    report = {
        REPORT_ROWS["score"]: overall_score(loc_f1, damage),
        REPORT_ROWS["localization"]: float(loc_f1),
    }
    for level, value in zip(range(1, 5), damage):
        report[REPORT_ROWS[level]] = value
    report["Pixel Accuracy"] = pixel_accuracy(cm)
    return report


def score_masks(
    preds: Sequence[ClassMask | np.ndarray], truths: Sequence[ClassMask | np.ndarray]
) -> Dict[str, float]:
    """Score a set of prediction/truth pairs as one pooled pixel population."""
    if len(preds) != len(truths):
        raise InvalidInputError(f"{len(preds)} predictions for {len(truths)} truth masks")
    cm = ConfusionMatrix.empty(len(DAMAGE_LEVELS))
    loc = ConfusionMatrix.empty(2)
    for pred, truth in zip(preds, truths):
        p, t = _labels(pred), _labels(truth)
        cm = cm + confusion(p, t, len(DAMAGE_LEVELS))
        loc = loc + confusion((p > 0).astype(np.uint8), (t > 0).astype(np.uint8), 2)
    report = metrics_report(cm, float(f1_per_class(loc)[1]))
    logger.info("Scored %d mask pairs: %s=%.3f", len(preds), REPORT_ROWS["score"], report[REPORT_ROWS["score"]])
    return report


def write_metrics_json(path: str | Path, report: Dict[str, float]) -> Path:
    return write_json(path, report)


def segmentation_report(cm: ConfusionMatrix, class_names: Sequence[str]) -> Dict[str, float]:
    """Pixel accuracy, mean IoU and per-class F1/IoU for semantic segmentation."""
    if len(class_names) != cm.num_classes:
        raise InvalidInputError(f"{len(class_names)} class names for {cm.num_classes} classes")
    f1s, ious = f1_per_class(cm), iou_per_class(cm)
    report = {"Pixel Accuracy": pixel_accuracy(cm), "Mean IoU": float(ious.mean())}
    for name, f1, iou in zip(class_names, f1s, ious):
        report[f"F1 - {name}"] = float(f1)
        report[f"IoU - {name}"] = float(iou)
    return report


def score_segmentation(
    preds: Sequence[ClassMask | np.ndarray],
    truths: Sequence[ClassMask | np.ndarray],
    class_names: Sequence[str],
) -> Dict[str, float]:
    """Pooled segmentation report over prediction/truth pairs."""
    if len(preds) != len(truths):
        raise InvalidInputError(f"{len(preds)} predictions for {len(truths)} truth masks")
    cm = ConfusionMatrix.empty(len(class_names))
    for pred, truth in zip(preds, truths):
        cm = cm + confusion(pred, truth, len(class_names))
    return segmentation_report(cm, class_names)
