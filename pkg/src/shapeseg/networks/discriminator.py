"""Conditional realism critic.

Scores whether a mask looks like a plausible annotation of the given image.
Image and mask are concatenated channel-wise, passed through strided
convolutions with LeakyReLU, globally average-pooled, and squashed to a
single probability per item.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from shapeseg.exceptions import ConfigurationError


@dataclass(frozen=True)
class DiscriminatorConfig:
    input_size: tuple[int, int] = (256, 256)
    depth: int = 4
    base_channels: int = 32
    conditioning: bool = True

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ConfigurationError(f"depth: must be >= 1, got {self.depth}")
        if self.base_channels < 1:
            raise ConfigurationError(f"base_channels: must be >= 1, got {self.base_channels}")
        h, w = self.input_size
        if h >> self.depth < 1 or w >> self.depth < 1:
            raise ConfigurationError(
                f"depth: {self.depth} levels collapse input size {self.input_size} below 1 pixel"
            )


class Discriminator(nn.Module):
    def __init__(self, config: DiscriminatorConfig):
        super().__init__()
        self.config = config
        layers: list[nn.Module] = []
        ch = 2 if config.conditioning else 1
        for i in range(config.depth):
            out = config.base_channels << i
            layers += [nn.Conv2d(ch, out, 4, stride=2, padding=1), nn.LeakyReLU(0.2, inplace=True)]
            ch = out
        self.features = nn.Sequential(*layers)
        self.classify = nn.Linear(ch, 1)

    def forward(self, image: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        x = torch.cat([image, mask], dim=1) if self.config.conditioning else mask
        x = self.features(x)
        x = x.mean(dim=(2, 3))
        return torch.sigmoid(self.classify(x)).squeeze(1)


def discriminator_forward(model: Discriminator, images: torch.Tensor, masks: torch.Tensor) -> torch.Tensor:
    """Score (image, mask) pairs; returns one value in (0, 1) per item."""
    from shapeseg.networks.generator import _as_batched

    x, _ = _as_batched(images, model.config.input_size, "discriminator_forward")
    m, _ = _as_batched(masks, model.config.input_size, "discriminator_forward")
    if x.shape[0] != m.shape[0]:
        raise ValueError(
            f"discriminator_forward: batch sizes differ, {x.shape[0]} images vs {m.shape[0]} masks"
        )
    return model(x, m)
