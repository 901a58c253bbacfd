"""U-Net building blocks shared by the segmentation and dual-encoder models.

Encoders return ``(skips, bottom)`` where ``skips[i]`` has ``base_width * 2**i``
channels at ``1 / 2**i`` resolution and ``bottom`` has ``base_width * 2**depth``
channels at ``1 / 2**depth`` resolution. Both encoder kinds honour this
contract so the decoder never needs to know which one it is fed by.
"""

from __future__ import annotations

import math
from typing import List, Literal, Tuple

import torch
import torch.nn as nn

EncoderKind = Literal["generic", "compound-scaled"]


def level_widths(base_width: int, depth: int) -> List[int]:
    """Channel widths for levels ``0..depth`` (the last one is the bottleneck)."""
    return [base_width * 2 ** i for i in range(depth + 1)]


class DoubleConv(nn.Module):
    """(conv3x3 -> BN -> ReLU) x 2."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(in_ch, out_ch, 3, padding=1),
            nn.BatchNorm2d(out_ch),
            nn.ReLU(inplace=True),
            nn.Conv2d(out_ch, out_ch, 3, padding=1),
            nn.BatchNorm2d(out_ch),
            nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(x)

    @property
    def first_conv(self) -> nn.Conv2d:
        return self.block[0]


class UNetEncoder(nn.Module):
    """Plain double-conv encoder with max-pool downsampling."""

    def __init__(self, in_channels: int, depth: int, base_width: int):
        super().__init__()
        widths = level_widths(base_width, depth)
        self.depth = depth
        self.levels = nn.ModuleList()
        prev = in_channels
        for width in widths[:-1]:
            self.levels.append(DoubleConv(prev, width))
            prev = width
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = DoubleConv(widths[-2], widths[-1])

    @property
    def first_conv(self) -> nn.Conv2d:
        return self.levels[0].first_conv

    def forward(self, x: torch.Tensor) -> Tuple[List[torch.Tensor], torch.Tensor]:
        skips = []
        for level in self.levels:
            x = level(x)
            skips.append(x)
            x = self.pool(x)
        return skips, self.bottleneck(x)


class SqueezeExcite(nn.Module):
    def __init__(self, channels: int, reduced: int):
        super().__init__()
        self.gate = nn.Sequential(
            nn.AdaptiveAvgPool2d(1),
            nn.Conv2d(channels, reduced, 1),
            nn.SiLU(),
            nn.Conv2d(reduced, channels, 1),
            nn.Sigmoid(),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x * self.gate(x)


class MBConv(nn.Module):
    """Inverted residual block: expand, depthwise conv, squeeze-excite, project."""

    def __init__(self, channels: int, expand_ratio: int):
        super().__init__()
        hidden = channels * expand_ratio
        self.block = nn.Sequential(
            nn.Conv2d(channels, hidden, 1, bias=False),
            nn.BatchNorm2d(hidden),
            nn.SiLU(),
            nn.Conv2d(hidden, hidden, 3, padding=1, groups=hidden, bias=False),
            nn.BatchNorm2d(hidden),
            nn.SiLU(),
            SqueezeExcite(hidden, max(1, channels // 4)),
            nn.Conv2d(hidden, channels, 1, bias=False),
            nn.BatchNorm2d(channels),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.block(x)


class CompoundStage(nn.Module):
    """Width projection followed by ``repeats`` MBConv blocks."""

    def __init__(self, in_ch: int, out_ch: int, repeats: int, expand_ratio: int):
        super().__init__()
        self.project = nn.Sequential(
            nn.Conv2d(in_ch, out_ch, 3, padding=1, bias=False),
            nn.BatchNorm2d(out_ch),
            nn.SiLU(),
        )
        self.blocks = nn.Sequential(*[MBConv(out_ch, expand_ratio) for _ in range(repeats)])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.blocks(self.project(x))


class CompoundEncoder(nn.Module):
    """Compound-scaled encoder in the EfficientNet manner.

    ``depth_coefficient`` scales the number of MBConv blocks per level and
    ``width_coefficient`` scales the expansion width; output widths stay on
    the U-Net contract.
    """

    def __init__(
        self,
        in_channels: int,
        depth: int,
        base_width: int,
        width_coefficient: float = 1.1,
        depth_coefficient: float = 1.2,
    ):
        super().__init__()
        widths = level_widths(base_width, depth)
        expand_ratio = max(1, round(4 * width_coefficient))
        self.depth = depth
        self.levels = nn.ModuleList()
        prev = in_channels
        for i, width in enumerate(widths[:-1]):
            repeats = math.ceil(depth_coefficient * (1 + i // 2))
            self.levels.append(CompoundStage(prev, width, repeats, expand_ratio))
            prev = width
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = CompoundStage(
            widths[-2], widths[-1], math.ceil(depth_coefficient * (1 + depth // 2)), expand_ratio
        )

    @property
    def first_conv(self) -> nn.Conv2d:
        return self.levels[0].project[0]

    def forward(self, x: torch.Tensor) -> Tuple[List[torch.Tensor], torch.Tensor]:
        skips = []
        for level in self.levels:
            x = level(x)
            skips.append(x)
            x = self.pool(x)
        return skips, self.bottleneck(x)


def build_encoder(kind: EncoderKind, in_channels: int, depth: int, base_width: int) -> nn.Module:
    if kind == "generic":
        return UNetEncoder(in_channels, depth, base_width)
    if kind == "compound-scaled":
        return CompoundEncoder(in_channels, depth, base_width)
    raise ValueError(f"Unknown encoder kind {kind!r}")


class UNetDecoder(nn.Module):
    """Transposed-conv upsampling with skip concatenation and a 1x1 class head.

    ``skip_multiplier`` widens the skip fan-in when each skip carries more
    than one feature map (e.g. pre features plus the difference).
    """

    def __init__(self, depth: int, base_width: int, num_classes: int, skip_multiplier: int = 1):
        super().__init__()
        widths = level_widths(base_width, depth)
        self.ups = nn.ModuleList()
        self.convs = nn.ModuleList()
        for i in reversed(range(depth)):
            self.ups.append(nn.ConvTranspose2d(widths[i + 1], widths[i], 2, stride=2))
            self.convs.append(DoubleConv(widths[i] * (1 + skip_multiplier), widths[i]))
        self.head = nn.Conv2d(widths[0], num_classes, 1)

    def forward(self, bottom: torch.Tensor, skips: List[torch.Tensor]) -> torch.Tensor:
        x = bottom
        for up, conv, skip in zip(self.ups, self.convs, reversed(skips)):
            x = conv(torch.cat([up(x), skip], dim=1))
        return self.head(x)
