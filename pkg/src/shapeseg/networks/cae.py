"""Convolutional auto-encoder defining the shape-prior latent space.

The encoder compresses a mask to a low-dimensional code through strided
convolutions and a fully connected bottleneck; the decoder mirrors it back to
a sigmoid probability map. There are deliberately no skip connections, so all
information must pass through the bottleneck.

The encoder accepts soft probability maps as well as hard binary masks; no
binarization happens inside, which keeps gradients flowing when the encoder
is used to regularize a segmentation network.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from shapeseg.exceptions import ConfigurationError


@dataclass(frozen=True)
class CaeConfig:
    input_size: tuple[int, int] = (256, 256)
    depth: int = 4
    base_channels: int = 16
    latent_dim: int = 128

    def __post_init__(self) -> None:
        h, w = self.input_size
        if self.depth < 1:
            raise ConfigurationError(f"depth: must be >= 1, got {self.depth}")
        if self.base_channels < 1:
            raise ConfigurationError(f"base_channels: must be >= 1, got {self.base_channels}")
        if self.latent_dim < 1:
            raise ConfigurationError(f"latent_dim: must be >= 1, got {self.latent_dim}")
        if self.latent_dim >= h * w:
            raise ConfigurationError(
                f"latent_dim: {self.latent_dim} does not compress input of {h * w} pixels"
            )
        if h % (1 << self.depth) or w % (1 << self.depth):
            raise ConfigurationError(
                f"input_size: {self.input_size} not divisible by 2^depth = {1 << self.depth}"
            )

    def bottleneck_shape(self) -> tuple[int, int, int]:
        h, w = self.input_size
        return (
            self.base_channels << (self.depth - 1),
            h >> self.depth,
            w >> self.depth,
        )


class Encoder(nn.Module):
    def __init__(self, config: CaeConfig):
        super().__init__()
        self.config = config
        layers: list[nn.Module] = []
        ch = 1
        for i in range(config.depth):
            out = config.base_channels << i
            layers += [nn.Conv2d(ch, out, 4, stride=2, padding=1), nn.ReLU(inplace=True)]
            ch = out
        self.features = nn.Sequential(*layers)
        c, h, w = config.bottleneck_shape()
        self.to_latent = nn.Linear(c * h * w, config.latent_dim)

    def forward(self, m: torch.Tensor) -> torch.Tensor:
        x = self.features(m)
        return self.to_latent(x.flatten(1))


class Decoder(nn.Module):
    def __init__(self, config: CaeConfig):
        super().__init__()
        self.config = config
        c, h, w = config.bottleneck_shape()
        self.from_latent = nn.Linear(config.latent_dim, c * h * w)
        layers: list[nn.Module] = [nn.ReLU(inplace=True)]
        ch = c
        for i in reversed(range(config.depth)):
            out = config.base_channels << max(i - 1, 0) if i > 0 else 1
            layers.append(nn.ConvTranspose2d(ch, out, 4, stride=2, padding=1))
            if i > 0:
                layers.append(nn.ReLU(inplace=True))
            ch = out
        self.features = nn.Sequential(*layers)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        c, h, w = self.config.bottleneck_shape()
        x = self.from_latent(z).reshape(z.shape[0], c, h, w)
        return torch.sigmoid(self.features(x))


def encoder_forward(model: Encoder, masks: torch.Tensor) -> torch.Tensor:
    """Embed a batch of masks; accepts (B, H, W) or (B, 1, H, W)."""
    from shapeseg.networks.generator import _as_batched

    x, _ = _as_batched(masks, model.config.input_size, "encoder_forward")
    return model(x)


def decoder_forward(model: Decoder, codes: torch.Tensor) -> torch.Tensor:
    """Reconstruct probability masks (B, H, W) from latent codes (B, latent_dim)."""
    if codes.dim() != 2 or codes.shape[1] != model.config.latent_dim:
        raise ValueError(
            f"decoder_forward: expected (B, {model.config.latent_dim}), got {tuple(codes.shape)}"
        )
    return model(codes).squeeze(1)
