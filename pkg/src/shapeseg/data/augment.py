"""Seeded random affine augmentation of slice pairs.

One draw produces a single (scale, rotation, shift) transform that is applied
to the image with bilinear interpolation and to the mask with nearest
neighbor, so the mask stays binary. Output shape is unchanged; regions mapped
from outside the input are zero-filled. Draws are a pure function of
``(cfg.seed, draw_index)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from shapeseg.data.volumes import SlicePair
from shapeseg.exceptions import ConfigurationError

Interval = tuple[float, float]


@dataclass(frozen=True)
class AugmentationConfig:
    """Ranges for the random transform components.

    ``shift_range`` is expressed as a fraction of the axis length and applies
    to both axes independently.
    """

    scale_range: Interval = (0.9, 1.1)
    rotation_range: Interval = (-15.0, 15.0)
    shift_range: Interval = (-0.10, 0.10)
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("scale_range", "rotation_range", "shift_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigurationError(f"{name}: empty interval ({lo}, {hi})")
        if self.scale_range[0] <= 0:
            raise ConfigurationError(f"scale_range: factors must be positive, got {self.scale_range}")


def draw_transform(cfg: AugmentationConfig, draw_index: int) -> tuple[float, float, float, float]:
    """Sample (scale, rotation_deg, shift_y_frac, shift_x_frac) for one draw."""
    rng = np.random.default_rng((cfg.seed, int(draw_index)))
    scale = rng.uniform(*cfg.scale_range)
    rotation = rng.uniform(*cfg.rotation_range)
    shift_y = rng.uniform(*cfg.shift_range)
    shift_x = rng.uniform(*cfg.shift_range)
    return float(scale), float(rotation), float(shift_y), float(shift_x)


def _inverse_affine(shape: tuple[int, int], scale: float, rotation_deg: float,
                    shift: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    # Forward map: p_out = C + s * R @ (p_in - C) + t, about the image center C.
    # ndimage.affine_transform wants the inverse: p_in = M @ p_out + offset.
    h, w = shape
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    theta = math.radians(rotation_deg)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    matrix = rot.T / scale
    t = np.array(shift)
    offset = center - matrix @ (center + t)
    return matrix, offset


def augment(pair: SlicePair, cfg: AugmentationConfig, draw_index: int) -> SlicePair:
    """Apply one seeded random affine transform to both channels of a pair."""
    scale, rotation, shift_y, shift_x = draw_transform(cfg, draw_index)
    if scale == 1.0 and rotation == 0.0 and shift_y == 0.0 and shift_x == 0.0:
        return SlicePair(
            image=pair.image.copy(),
            mask=pair.mask.copy(),
            subject_id=pair.subject_id,
            slice_index=pair.slice_index,
        )
    h, w = pair.image.shape
    shift = (shift_y * h, shift_x * w)
    matrix, offset = _inverse_affine((h, w), scale, rotation, shift)
    image = ndimage.affine_transform(
        pair.image.astype(np.float64), matrix, offset=offset, order=1, mode="constant", cval=0.0
    ).astype(np.float32)
    mask = ndimage.affine_transform(
        pair.mask, matrix, offset=offset, order=0, mode="constant", cval=0
    )
    return SlicePair(image=image, mask=mask, subject_id=pair.subject_id, slice_index=pair.slice_index)
