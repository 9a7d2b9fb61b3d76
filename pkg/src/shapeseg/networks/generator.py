"""Encoder-decoder segmentation network with skip connections.

Maps a grayscale slice to a per-pixel foreground probability. Each level
applies two 3x3 convolutions with ReLU; downsampling is 2x2 max pooling,
upsampling a 2x2 transposed convolution whose output is concatenated with the
matching encoder feature map. A 1x1 convolution plus sigmoid produces the
probability map. No normalization layers by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from shapeseg.exceptions import ConfigurationError


@dataclass(frozen=True)
class GeneratorConfig:
    input_size: tuple[int, int] = (256, 256)
    depth: int = 4
    base_channels: int = 32
    use_sigmoid_output: bool = True

    def __post_init__(self) -> None:
        h, w = self.input_size
        if self.depth < 1:
            raise ConfigurationError(f"depth: must be >= 1, got {self.depth}")
        if self.base_channels < 1:
            raise ConfigurationError(f"base_channels: must be >= 1, got {self.base_channels}")
        if h % (1 << self.depth) or w % (1 << self.depth):
            raise ConfigurationError(
                f"input_size: {self.input_size} not divisible by 2^depth = {1 << self.depth}"
            )


class DoubleConv(nn.Sequential):
    def __init__(self, in_ch: int, out_ch: int):
        super().__init__(
            nn.Conv2d(in_ch, out_ch, 3, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(out_ch, out_ch, 3, padding=1),
            nn.ReLU(inplace=True),
        )


class Generator(nn.Module):
    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        base, depth = config.base_channels, config.depth

        self.encoders = nn.ModuleList()
        ch = 1
        for i in range(depth):
            self.encoders.append(DoubleConv(ch, base << i))
            ch = base << i
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = DoubleConv(ch, ch * 2)

        self.upsamplers = nn.ModuleList()
        self.decoders = nn.ModuleList()
        ch = ch * 2
        for i in reversed(range(depth)):
            out = base << i
            self.upsamplers.append(nn.ConvTranspose2d(ch, out, 2, stride=2))
            self.decoders.append(DoubleConv(out * 2, out))
            ch = out
        self.head = nn.Conv2d(base, 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for encoder in self.encoders:
            x = encoder(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for upsample, decode, skip in zip(self.upsamplers, self.decoders, reversed(skips)):
            x = upsample(x)
            x = decode(torch.cat([x, skip], dim=1))
        x = self.head(x)
        return torch.sigmoid(x) if self.config.use_sigmoid_output else x


def _as_batched(x: torch.Tensor, expected: tuple[int, int], what: str) -> tuple[torch.Tensor, bool]:
    if x.dim() == 3:
        x = x.unsqueeze(1)
        squeezed = True
    elif x.dim() == 4 and x.shape[1] == 1:
        squeezed = False
    else:
        raise ValueError(f"{what}: expected (B, H, W) or (B, 1, H, W), got {tuple(x.shape)}")
    if tuple(x.shape[-2:]) != tuple(expected):
        raise ValueError(f"{what}: spatial size {tuple(x.shape[-2:])} != configured {tuple(expected)}")
    return x, squeezed


def generator_forward(model: Generator, images: torch.Tensor) -> torch.Tensor:
    """Run the generator on a batch of slices.

    Accepts (B, H, W) or (B, 1, H, W); the output matches the input layout.
    """
    x, squeezed = _as_batched(images, model.config.input_size, "generator_forward")
    out = model(x)
    return out.squeeze(1) if squeezed else out
