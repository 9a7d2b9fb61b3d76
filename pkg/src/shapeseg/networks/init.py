"""Seeded parameter initialization.

Weights get He-uniform values drawn from an explicit torch generator so that
two builds from the same seed are bit-identical; biases start at zero. No
global RNG state is touched.
"""

from __future__ import annotations

import math

import torch
from torch import nn


def _fan_in(module: nn.Module) -> int:
    if isinstance(module, nn.ConvTranspose2d):
        # weight layout (in, out, kh, kw): each output unit sees in * kh * kw inputs
        w = module.weight
        return w.shape[0] * w.shape[2] * w.shape[3]
    w = module.weight
    return int(w.shape[1:].numel())


def init_parameters(module: nn.Module, seed: int) -> None:
    gen = torch.Generator()
    gen.manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
    with torch.no_grad():
        for sub in module.modules():
            if isinstance(sub, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
                bound = math.sqrt(6.0 / _fan_in(sub))
                sub.weight.uniform_(-bound, bound, generator=gen)
                if sub.bias is not None:
                    sub.bias.zero_()
