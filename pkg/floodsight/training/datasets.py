"""Torch datasets over in-memory damage pairs and flood scenes.

Each item is ``(inputs, target)`` where ``inputs`` is a tuple of
``(C, H, W)`` tensors passed positionally to the model and ``target`` is an
``(H, W)`` long tensor of class labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np
import torch
from torch.utils.data import Dataset

from floodsight.raster.augment import AugmentConfig, augment
from floodsight.raster.georaster import ClassMask, DamageMask, GeoRaster
from floodsight.raster.normalize import ChannelStats, normalize


@dataclass(frozen=True, eq=False)
class DamageSample:
    pre: GeoRaster
    post: GeoRaster
    truth: DamageMask


@dataclass(frozen=True, eq=False)
class SceneSample:
    image: GeoRaster
    truth: ClassMask


def _to_tensor(raster: GeoRaster) -> torch.Tensor:
    array = np.ascontiguousarray(np.moveaxis(raster.pixels, -1, 0), dtype=np.float32)
    return torch.from_numpy(array)


def _target(mask: ClassMask) -> torch.Tensor:
    return torch.from_numpy(mask.labels.astype(np.int64))


class _AugmentedDataset(Dataset):
    def __init__(
        self,
        stats: Optional[ChannelStats],
        augmentation: Optional[AugmentConfig],
        seed: int,
    ):
        self.stats = stats
        self.augmentation = augmentation
        self.seed = seed
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        """Draw fresh augmentations for a new epoch."""
        self.epoch = epoch

    def _augment(self, raster: GeoRaster, mask: ClassMask, index: int):
        if self.augmentation is None:
            return raster, mask
        draw_seed = int(np.random.SeedSequence([self.seed, self.epoch, index]).generate_state(1)[0])
        return augment(raster, mask, draw_seed, self.augmentation)

    def class_index(self) -> List[Set[int]]:
        """Classes present in each sample's truth mask (for sampling plans)."""
        return [set(np.unique(self.mask_at(i).labels).tolist()) for i in range(len(self))]

    def mask_at(self, index: int) -> ClassMask:
        raise NotImplementedError


class DamagePairDataset(_AugmentedDataset):
    """Pre/post pairs for the dual-encoder model."""

    def __init__(
        self,
        samples: Sequence[DamageSample],
        stats: Optional[ChannelStats] = None,
        augmentation: Optional[AugmentConfig] = None,
        seed: int = 0,
    ):
        super().__init__(stats, augmentation, seed)
        self.samples = list(samples)

    def __len__(self) -> int:
        return len(self.samples)

    def mask_at(self, index: int) -> ClassMask:
        return self.samples[index].truth

    def __getitem__(self, index: int) -> Tuple[Tuple[torch.Tensor, ...], torch.Tensor]:
        sample = self.samples[index]
        pre, post = sample.pre, sample.post
        if self.stats is not None:
            pre, post = normalize(pre, self.stats), normalize(post, self.stats)
        # Augment pre and post as one stacked raster so both see the same draw.
        stacked = pre.with_pixels(
            np.concatenate([pre.pixels, post.pixels], axis=2),
            channel_names=pre.channel_names + post.channel_names,
        )
        stacked, mask = self._augment(stacked, sample.truth, index)
        split = pre.count
        pre_t = _to_tensor(stacked.with_pixels(stacked.pixels[:, :, :split], pre.channel_names))
        post_t = _to_tensor(stacked.with_pixels(stacked.pixels[:, :, split:], post.channel_names))
        return (pre_t, post_t), _target(mask)


class SceneDataset(_AugmentedDataset):
    """Single images (RGB or RGB+HAND) for the segmentation model."""

    def __init__(
        self,
        samples: Sequence[SceneSample],
        stats: Optional[ChannelStats] = None,
        augmentation: Optional[AugmentConfig] = None,
        seed: int = 0,
    ):
        super().__init__(stats, augmentation, seed)
        self.samples = list(samples)

    def __len__(self) -> int:
        return len(self.samples)

    def mask_at(self, index: int) -> ClassMask:
        return self.samples[index].truth

    def __getitem__(self, index: int) -> Tuple[Tuple[torch.Tensor, ...], torch.Tensor]:
        sample = self.samples[index]
        image = sample.image
        if self.stats is not None:
            image = normalize(image, self.stats)
        image, mask = self._augment(image, sample.truth, index)
        return (_to_tensor(image),), _target(mask)
