"""Training loop shared by the segmentation and dual-encoder models."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional

import pandas as pd
import torch
import torch.nn as nn
from pydantic import BaseModel, Field
from torch.utils.data import DataLoader, Dataset

from floodsight.errors import DivergenceError, InvalidInputError
from floodsight.fileio import atomic_path
from floodsight.metrics import ConfusionMatrix, confusion, f1_per_class, pixel_accuracy
from floodsight.training.losses import LossConfig, combined_loss
from floodsight.training.sampling import SamplingPlan

logger = logging.getLogger(__name__)


class OptimizerConfig(BaseModel):
    """Adaptive-moment gradient descent settings."""

    name: Literal["adam"] = Field("adam", description="Optimizer family")
    learning_rate: float = Field(1e-3, gt=0.0, description="Step size")
    weight_decay: float = Field(0.0, ge=0.0, description="L2 penalty")
    batch_size: int = Field(8, ge=1, description="Samples per step")


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    val_pixel_accuracy: Optional[float] = None
    val_f1: List[float] = field(default_factory=list)

    def as_row(self, class_names: List[str]) -> Dict[str, float]:
        row: Dict[str, float] = {"epoch": self.epoch, "loss": self.loss}
        if self.val_pixel_accuracy is not None:
            row["val_pixel_accuracy"] = self.val_pixel_accuracy
        for name, value in zip(class_names, self.val_f1):
            row[f"f1_{name}"] = value
        return row


@dataclass
class TrainResult:
    model: nn.Module
    history: List[EpochRecord]
    optimizer: OptimizerConfig
    loss: LossConfig


def evaluate(
    model: nn.Module, dataset: Dataset, num_classes: int, batch_size: int = 8
) -> ConfusionMatrix:
    """Pooled confusion matrix of ``model`` over ``dataset``."""
    dtype = next(model.parameters()).dtype
    cm = ConfusionMatrix.empty(num_classes)
    model.eval()
    with torch.no_grad():
        for inputs, target in DataLoader(dataset, batch_size=batch_size, shuffle=False):
            logits = model(*[x.to(dtype) for x in inputs])
            pred = torch.argmax(logits, dim=1)
            cm = cm + confusion(pred.numpy(), target.numpy(), num_classes)
    return cm


def train(
    model: nn.Module,
    dataset: Dataset,
    plan: SamplingPlan,
    loss_config: LossConfig,
    optimizer_config: OptimizerConfig | None = None,
    epochs: int = 20,
    seed: int = 0,
    val_dataset: Optional[Dataset] = None,
    num_workers: int = 0,
) -> TrainResult:
    """Optimize ``model`` on ``dataset`` following ``plan``.

    The plan is reshuffled from ``seed`` every epoch; datasets exposing
    ``set_epoch`` redraw their augmentations as well.

    Args:
        model: SegmentationUNet or DualUNet (anything called as ``model(*inputs)``)
        dataset: Items ``(inputs, target)``
        plan: Draw order with oversampling
        loss_config: Loss mixing and class weights
        optimizer_config: Optimizer settings, Adam lr 1e-3 by default
        epochs: Number of passes over the plan
        seed: Controls shuffling and augmentation
        val_dataset: Optional validation split scored after each epoch
        num_workers: DataLoader worker processes

    Returns:
        TrainResult with the trained model and per-epoch history

    Raises:
        InvalidInputError: If the plan references samples outside the dataset
        DivergenceError: If a loss becomes non-finite
    """
    optimizer_config = optimizer_config or OptimizerConfig()
    if plan.indices and max(plan.indices) >= len(dataset):
        raise InvalidInputError(
            f"Sampling plan references index {max(plan.indices)} of a {len(dataset)}-sample dataset"
        )
    num_classes = len(loss_config.class_weights)
    dtype = next(model.parameters()).dtype

    optimizer = torch.optim.Adam(
        model.parameters(),
        lr=optimizer_config.learning_rate,
        weight_decay=optimizer_config.weight_decay,
    )
    history: List[EpochRecord] = []

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        for epoch in range(epochs):
            if hasattr(dataset, "set_epoch"):
                dataset.set_epoch(epoch)
            order = list(plan.reshuffled(seed + epoch))
            loader = DataLoader(
                dataset,
                batch_size=optimizer_config.batch_size,
                sampler=order,
                num_workers=num_workers,
            )

            model.train()
            total, batches = 0.0, 0
            for batch_index, (inputs, target) in enumerate(loader):
                optimizer.zero_grad()
                logits = model(*[x.to(dtype) for x in inputs])
                loss = combined_loss(logits, target, loss_config)
                if not torch.isfinite(loss):
                    raise DivergenceError(
                        f"Non-finite loss {loss.item()} at epoch {epoch} batch {batch_index}"
                    )
                loss.backward()
                if logger.isEnabledFor(logging.DEBUG):
                    grads = [p.grad.norm() for p in model.parameters() if p.grad is not None]
                    logger.debug(
                        "epoch %d batch %d: loss=%.5f grad_norm=%.5f",
                        epoch,
                        batch_index,
                        loss.item(),
                        torch.linalg.vector_norm(torch.stack(grads)).item() if grads else 0.0,
                    )
                optimizer.step()
                total += loss.item()
                batches += 1

            record = EpochRecord(epoch=epoch, loss=total / max(batches, 1))
            if val_dataset is not None and len(val_dataset):
                cm = evaluate(model, val_dataset, num_classes, optimizer_config.batch_size)
                record.val_pixel_accuracy = pixel_accuracy(cm)
                record.val_f1 = f1_per_class(cm).tolist()
            history.append(record)
            logger.info(
                "Epoch %d/%d: loss=%.4f val_acc=%s",
                epoch + 1,
                epochs,
                record.loss,
                "n/a" if record.val_pixel_accuracy is None else f"{record.val_pixel_accuracy:.4f}",
            )
            if not math.isfinite(record.loss):
                raise DivergenceError(f"Non-finite mean loss at epoch {epoch}")

    return TrainResult(model=model, history=history, optimizer=optimizer_config, loss=loss_config)


def history_frame(history: List[EpochRecord], class_names: Optional[List[str]] = None) -> pd.DataFrame:
    if class_names is None:
        width = max((len(r.val_f1) for r in history), default=0)
        class_names = [str(c) for c in range(width)]
    return pd.DataFrame([record.as_row(class_names) for record in history])


def history_to_csv(
    path: str | Path, history: List[EpochRecord], class_names: Optional[List[str]] = None
) -> Path:
    """Write ``epoch, loss, val_pixel_accuracy, f1_<class>...`` rows."""
    target = Path(path)
    with atomic_path(target) as tmp:
        history_frame(history, class_names).to_csv(tmp, index=False)
    return target
