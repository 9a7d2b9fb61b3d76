"""Core volumetric types and slicing.

A :class:`Volume` holds normalized grayscale intensities, a
:class:`MaskVolume` the paired binary labels. Slicing is always along the
first (axial) axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shapeseg.exceptions import ConfigurationError

Spacing = tuple[float, float, float]


def _check_spacing(spacing: Spacing) -> tuple[float, float, float]:
    spacing = tuple(float(s) for s in spacing)  # type: ignore[assignment]
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise ConfigurationError(f"spacing must be 3 strictly positive values, got {spacing!r}")
    return spacing


@dataclass
class Volume:
    """A 3D grayscale image with intensities normalized to [0, 1]."""

    voxels: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)
    subject_id: str = ""

    def __post_init__(self) -> None:
        self.voxels = np.asarray(self.voxels, dtype=np.float32)
        if self.voxels.ndim != 3 or min(self.voxels.shape) < 1:
            raise ValueError(f"volume must be 3D with all dimensions >= 1, got shape {self.voxels.shape}")
        if not np.isfinite(self.voxels).all():
            raise ValueError("volume intensities must be finite")
        lo, hi = float(self.voxels.min()), float(self.voxels.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"volume intensities must lie in [0, 1], found range [{lo}, {hi}]")
        self.spacing = _check_spacing(self.spacing)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.voxels.shape  # type: ignore[return-value]


@dataclass
class MaskVolume:
    """A 3D binary label volume, voxel values exactly 0 or 1."""

    voxels: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)
    subject_id: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.voxels)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValueError(f"mask must be 3D with all dimensions >= 1, got shape {arr.shape}")
        values = np.unique(arr)
        if not np.isin(values, (0, 1)).all():
            raise ValueError(f"mask voxels must be exactly 0 or 1, found values {values[:8]!r}")
        self.voxels = arr.astype(np.uint8)
        self.spacing = _check_spacing(self.spacing)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.voxels.shape  # type: ignore[return-value]

    def foreground_count(self) -> int:
        return int(self.voxels.sum())


@dataclass
class SlicePair:
    """One axial slice of intensities with its binary mask."""

    image: np.ndarray
    mask: np.ndarray
    subject_id: str = ""
    slice_index: int = 0

    def __post_init__(self) -> None:
        self.image = np.asarray(self.image, dtype=np.float32)
        mask = np.asarray(self.mask)
        if self.image.ndim != 2 or mask.ndim != 2:
            raise ValueError("slice image and mask must be 2D")
        if self.image.shape != mask.shape:
            raise ValueError(f"slice image shape {self.image.shape} != mask shape {mask.shape}")
        if not np.isin(np.unique(mask), (0, 1)).all():
            raise ValueError("slice mask must be binary")
        if self.slice_index < 0:
            raise ValueError("slice_index must be >= 0")
        self.mask = mask.astype(np.uint8)


def extract_slices(volume: Volume, mask: MaskVolume) -> list[SlicePair]:
    """Split a paired volume into axial slices, ordered by ascending index.

    Stacking the returned masks (see :func:`shapeseg.postproc.stack_slices`)
    reconstructs ``mask`` exactly.
    """
    if volume.shape != mask.shape:
        raise ValueError(f"volume shape {volume.shape} != mask shape {mask.shape}")
    return [
        SlicePair(
            image=volume.voxels[k],
            mask=mask.voxels[k],
            subject_id=volume.subject_id,
            slice_index=k,
        )
        for k in range(volume.shape[0])
    ]
