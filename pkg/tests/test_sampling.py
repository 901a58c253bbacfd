from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from floodsight.errors import InvalidInputError
from floodsight.training import build_sampling_plan, class_pixel_counts, compute_class_weights


def test_balanced_classes_get_unit_weights() -> None:
    assert compute_class_weights(counts=[10, 10, 10, 10, 10]) == pytest.approx([1.0] * 5)


def test_weights_follow_inverse_frequency() -> None:
    weights = compute_class_weights(counts=[1000, 500, 250, 125, 125])
    expected = np.array([1, 2, 4, 8, 8]) / np.mean([1, 2, 4, 8, 8])
    assert weights == pytest.approx(expected.tolist())
    assert np.mean(weights) == pytest.approx(1.0)


def test_absent_class_receives_cap() -> None:
    weights = compute_class_weights(counts=[1000, 1000, 0, 1000, 1000], cap=50.0)
    assert weights[2] / weights[0] == pytest.approx(50.0)


def test_weights_from_masks() -> None:
    masks = [np.array([[0, 0], [1, 1]]), np.array([[0, 0], [0, 0]])]
    assert class_pixel_counts(masks, num_classes=5).tolist() == [6, 2, 0, 0, 0]
    weights = compute_class_weights(masks, num_classes=5)
    assert weights[1] / weights[0] == pytest.approx(3.0)


def test_empty_dataset_is_rejected() -> None:
    with pytest.raises(InvalidInputError):
        compute_class_weights(counts=[0, 0, 0, 0, 0])


def test_unit_factor_is_a_permutation() -> None:
    index = [{0, 1}, {2}, {3, 4}, {0}]
    plan = build_sampling_plan(index, oversample_factor=1, seed=5)
    assert sorted(plan.indices) == [0, 1, 2, 3]


def test_plan_length_counts_oversampled_samples() -> None:
    index = [{0, 1}] * 7 + [{0, 2}, {3}, {1, 2, 3}]
    plan = build_sampling_plan(index, oversample_factor=4)
    assert len(plan) == 7 + 3 * 4


def test_multiplicities_follow_minor_major_rule() -> None:
    rng = np.random.default_rng(11)
    for trial in range(100):
        index = [set(rng.choice(5, size=rng.integers(1, 5), replace=False).tolist()) for _ in range(20)]
        k = int(rng.integers(1, 6))
        counts = Counter(build_sampling_plan(index, oversample_factor=k, seed=trial).indices)
        for i, classes in enumerate(index):
            assert counts[i] == (k if classes & {2, 3} else 1)


def test_plan_is_seeded() -> None:
    index = [{2}, {0}, {3}, {1}, {4}]
    first = build_sampling_plan(index, 3, seed=1)
    assert first == build_sampling_plan(index, 3, seed=1)
    assert first.reshuffled(2) != first.reshuffled(3)


def test_invalid_factor_is_rejected() -> None:
    with pytest.raises(InvalidInputError):
        build_sampling_plan([{0}], oversample_factor=0)
