from __future__ import annotations

import math

import pytest
import torch
from pydantic import ValidationError

from floodsight.errors import InvalidInputError
from floodsight.training import (
    LossConfig,
    combined_loss,
    generalized_dice_loss,
    one_hot,
    weighted_cross_entropy,
)


def _hot(classes: list[list[int]], num_classes: int = 2) -> torch.Tensor:
    target = torch.tensor([classes])
    return torch.nn.functional.one_hot(target, num_classes).permute(0, 3, 1, 2).double()


def test_dice_is_zero_for_perfect_prediction() -> None:
    target = _hot([[0, 1], [1, 0]])
    assert generalized_dice_loss(target.clone(), target).item() == pytest.approx(0.0, abs=1e-5)


def test_dice_is_one_for_total_mismatch() -> None:
    target = _hot([[0]])
    probs = _hot([[1]])
    assert generalized_dice_loss(probs, target).item() == pytest.approx(1.0, abs=1e-5)


def test_dice_matches_hand_arithmetic() -> None:
    # 2x2 grid, probabilities (0.7, 0.3) everywhere, two pixels of each class
    target = _hot([[0, 0], [1, 1]])
    probs = torch.empty_like(target)
    probs[:, 0] = 0.7
    probs[:, 1] = 0.3
    eps = 1e-6

    w0 = w1 = 1.0 / 2.0 ** 2
    intersection = w0 * (2 * 0.7) + w1 * (2 * 0.3)
    cardinality = w0 * (2 + 4 * 0.7) + w1 * (2 + 4 * 0.3)
    expected = 1.0 - (2.0 * intersection + eps) / (cardinality + eps)

    assert generalized_dice_loss(probs, target, epsilon=eps).item() == pytest.approx(expected, abs=1e-10)


def test_dice_rejects_shape_mismatch() -> None:
    with pytest.raises(InvalidInputError):
        generalized_dice_loss(torch.rand(1, 2, 2, 2), torch.rand(1, 3, 2, 2))


def test_cross_entropy_of_uniform_logits_is_ln2() -> None:
    logits = torch.zeros(1, 2, 1, 1, dtype=torch.float64)
    target = torch.zeros(1, 1, 1, dtype=torch.long)
    assert weighted_cross_entropy(logits, target, [1.0, 1.0]).item() == pytest.approx(
        math.log(2.0), abs=1e-10
    )


def test_cross_entropy_is_small_for_confident_correct_logits() -> None:
    target = torch.randint(0, 5, (2, 4, 4))
    logits = one_hot(target, 5).double() * 50.0
    assert weighted_cross_entropy(logits, target, [1.0] * 5).item() < 1e-3


def test_cross_entropy_is_linear_in_true_class_weight() -> None:
    logits = torch.randn(1, 3, 1, 1, dtype=torch.float64)
    target = torch.tensor([[[2]]])
    base = weighted_cross_entropy(logits, target, [1.0, 1.0, 1.0])
    doubled = weighted_cross_entropy(logits, target, [1.0, 1.0, 2.0])
    untouched = weighted_cross_entropy(logits, target, [5.0, 5.0, 1.0])
    assert doubled.item() == pytest.approx(2.0 * base.item(), abs=1e-12)
    assert untouched.item() == pytest.approx(base.item(), abs=1e-12)


def test_cross_entropy_rejects_bad_targets_and_weights() -> None:
    logits = torch.zeros(1, 2, 1, 1)
    with pytest.raises(InvalidInputError):
        weighted_cross_entropy(logits, torch.tensor([[[2]]]), [1.0, 1.0])
    with pytest.raises(InvalidInputError):
        weighted_cross_entropy(logits, torch.tensor([[[0]]]), [1.0, 1.0, 1.0])


def test_combined_loss_reduces_to_each_component() -> None:
    logits = torch.randn(2, 5, 4, 4, dtype=torch.float64)
    target = torch.randint(0, 5, (2, 4, 4))
    weights = [1.0, 2.0, 3.0, 4.0, 5.0]

    ce_only = combined_loss(logits, target, LossConfig(dice_weight=0.0, class_weights=weights))
    dice_only = combined_loss(logits, target, LossConfig(ce_weight=0.0, class_weights=weights))
    both = combined_loss(logits, target, LossConfig(dice_weight=0.5, ce_weight=2.0, class_weights=weights))

    probs = torch.softmax(logits, dim=1)
    hot = torch.nn.functional.one_hot(target, 5).permute(0, 3, 1, 2).double()
    assert ce_only.item() == weighted_cross_entropy(logits, target, weights).item()
    assert dice_only.item() == generalized_dice_loss(probs, hot).item()
    assert both.item() == pytest.approx(0.5 * dice_only.item() + 2.0 * ce_only.item(), abs=1e-10)


def test_combined_loss_gradient_matches_finite_differences() -> None:
    torch.manual_seed(0)
    conv = torch.nn.Conv2d(3, 5, 3, padding=1).double()
    image = torch.randn(1, 3, 8, 8, dtype=torch.float64)
    target = torch.randint(0, 5, (1, 8, 8))
    config = LossConfig(class_weights=[0.5, 1.0, 2.0, 3.0, 1.5])

    def loss_of(weight: torch.Tensor) -> torch.Tensor:
        logits = torch.nn.functional.conv2d(image, weight, conv.bias, padding=1)
        return combined_loss(logits, target, config)

    weight = conv.weight.detach().clone().requires_grad_(True)
    (grad,) = torch.autograd.grad(loss_of(weight), weight)

    h = 1e-6
    numeric = torch.zeros_like(weight)
    flat = weight.detach().clone().view(-1)
    for i in range(flat.numel()):
        plus, minus = flat.clone(), flat.clone()
        plus[i] += h
        minus[i] -= h
        numeric.view(-1)[i] = (
            loss_of(plus.view_as(weight)) - loss_of(minus.view_as(weight))
        ) / (2 * h)

    relative = (grad - numeric).abs().max() / numeric.abs().max()
    assert relative.item() < 1e-4


def test_loss_config_validation() -> None:
    with pytest.raises(ValidationError):
        LossConfig(dice_weight=0.0, ce_weight=0.0)
    with pytest.raises(ValidationError):
        LossConfig(class_weights=[1.0, 0.0, 1.0, 1.0, 1.0])
