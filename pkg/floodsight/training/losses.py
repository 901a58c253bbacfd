"""Generalized Dice loss, class-weighted cross entropy and their combination.

Tensors are channel-first: probabilities and one-hot targets are
``(N, C, H, W)``, class targets ``(N, H, W)``. Sums in the Dice loss run
over the batch and all pixels.
"""

from __future__ import annotations

from typing import List, Sequence

import torch
import torch.nn.functional as F
from pydantic import BaseModel, Field, field_validator, model_validator

from floodsight.errors import InvalidInputError


class LossConfig(BaseModel):
    """Mixing of the two loss terms and the class weights."""

    dice_weight: float = Field(1.0, ge=0.0, description="alpha, weight of the generalized Dice term")
    ce_weight: float = Field(1.0, ge=0.0, description="beta, weight of the cross-entropy term")
    class_weights: List[float] = Field(
        default_factory=lambda: [1.0] * 5, description="Per-class cross-entropy weights"
    )
    dice_epsilon: float = Field(1e-6, gt=0.0, description="Stabilizer of the Dice ratio")

    @field_validator("class_weights")
    @classmethod
    def _positive_weights(cls, value: List[float]) -> List[float]:
        if not value or any(w <= 0 for w in value):
            raise ValueError("class_weights must all be positive")
        return value

    @model_validator(mode="after")
    def _some_loss(self) -> "LossConfig":
        if self.dice_weight + self.ce_weight <= 0:
            raise ValueError("dice_weight + ce_weight must be positive")
        return self


def one_hot(target: torch.Tensor, num_classes: int) -> torch.Tensor:
    """(N, H, W) class indices -> (N, C, H, W) one-hot in the default float dtype."""
    return F.one_hot(target.long(), num_classes).permute(0, 3, 1, 2).to(torch.get_default_dtype())


def _check_target(target: torch.Tensor, num_classes: int) -> None:
    if target.numel() and (int(target.min()) < 0 or int(target.max()) >= num_classes):
        raise InvalidInputError(f"Target classes must lie in [0, {num_classes - 1}]")


def generalized_dice_loss(
    probs: torch.Tensor, target: torch.Tensor, epsilon: float = 1e-6
) -> torch.Tensor:
    """``1 - (2 * sum_l w_l sum_n r_ln p_ln + eps) / (sum_l w_l sum_n (r_ln + p_ln) + eps)``.

    ``w_l = 1 / (sum_n r_ln)^2`` for classes present in the target; absent
    classes take the largest present weight so they neither vanish nor blow up.

    Args:
        probs: (N, C, H, W) probabilities summing to 1 over C
        target: (N, C, H, W) one-hot target
        epsilon: Stabilizer added to numerator and denominator

    Returns:
        Scalar loss in [0, 1]

    Raises:
        InvalidInputError: If shapes differ
    """
    if probs.shape != target.shape:
        raise InvalidInputError(
            f"probs {tuple(probs.shape)} and target {tuple(target.shape)} differ in shape"
        )
    target = target.to(probs.dtype)
    dims = [d for d in range(probs.dim()) if d != 1]
    volume = target.sum(dim=dims)
    present = volume > 0
    weights = torch.zeros_like(volume)
    weights[present] = 1.0 / volume[present] ** 2
    if present.any():
        weights[~present] = weights[present].max()
    else:
        weights[:] = 1.0

    intersection = (target * probs).sum(dim=dims)
    cardinality = (target + probs).sum(dim=dims)
    numerator = 2.0 * (weights * intersection).sum() + epsilon
    denominator = (weights * cardinality).sum() + epsilon
    return 1.0 - numerator / denominator


def weighted_cross_entropy(
    logits: torch.Tensor, target: torch.Tensor, class_weights: Sequence[float] | torch.Tensor
) -> torch.Tensor:
    """Mean over pixels of ``w[y] * -log softmax(logits)[y]``.

    The mean divides by the pixel count, not by the sum of weights, so the
    loss is linear in each weight.

    Raises:
        InvalidInputError: On wrong weight count or out-of-range targets
    """
    num_classes = logits.shape[1]
    weights = torch.as_tensor(class_weights, dtype=logits.dtype, device=logits.device)
    if weights.numel() != num_classes:
        raise InvalidInputError(f"Expected {num_classes} class weights, got {weights.numel()}")
    _check_target(target, num_classes)
    per_pixel = F.cross_entropy(logits, target.long(), weight=weights, reduction="none")
    return per_pixel.mean()


def combined_loss(logits: torch.Tensor, target: torch.Tensor, config: LossConfig) -> torch.Tensor:
    """``alpha * GDL(softmax(logits), onehot(target)) + beta * WCE(logits, target)``."""
    num_classes = logits.shape[1]
    _check_target(target, num_classes)
    total = logits.new_zeros(())
    if config.dice_weight:
        probs = torch.softmax(logits, dim=1)
        hot = F.one_hot(target.long(), num_classes).permute(0, 3, 1, 2).to(logits.dtype)
        total = total + config.dice_weight * generalized_dice_loss(probs, hot, config.dice_epsilon)
    if config.ce_weight:
        total = total + config.ce_weight * weighted_cross_entropy(
            logits, target, config.class_weights
        )
    return total
