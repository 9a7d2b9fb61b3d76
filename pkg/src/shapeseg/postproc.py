"""Post-processing of per-slice predictions into a final 3D mask.

Pipeline: threshold the probability slices, stack them into a volume, keep
only the largest connected foreground component.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from scipy import ndimage

from shapeseg.data.volumes import MaskVolume

ALLOWED_CONNECTIVITY = (6, 18, 26)
_STRUCTURE_RANK = {6: 1, 18: 2, 26: 3}


def threshold(probabilities: np.ndarray, t: float = 0.5) -> np.ndarray:
    """Binarize probabilities: 1 where p >= t, else 0."""
    if not 0.0 < t < 1.0:
        raise ValueError(f"threshold must lie strictly inside (0, 1), got {t}")
    p = np.asarray(probabilities)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return (p >= t).astype(np.uint8)


def stack_slices(
    slices: Sequence[np.ndarray],
    indices: Sequence[int] | None = None,
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0),
    subject_id: str = "",
) -> MaskVolume:
    """Assemble ordered binary slices into a mask volume.

    When ``indices`` is given, slices are placed at their stated depth and
    must form the contiguous range 0..n-1. This inverts
    :func:`shapeseg.data.extract_slices` on the mask channel.
    """
    slices = list(slices)
    if not slices:
        raise ValueError("cannot stack an empty slice list")
    shapes = {s.shape for s in slices}
    if len(shapes) != 1:
        raise ValueError(f"slices disagree on shape: {sorted(shapes)}")
    if indices is not None:
        indices = [int(i) for i in indices]
        if len(indices) != len(slices):
            raise ValueError(f"{len(indices)} indices for {len(slices)} slices")
        expected = set(range(len(slices)))
        got = set(indices)
        if got != expected:
            missing = sorted(expected - got)
            raise ValueError(f"slice indices must cover 0..{len(slices) - 1}, missing {missing[:8]}")
        order = np.argsort(indices)
        slices = [slices[i] for i in order]
    volume = np.stack(slices, axis=0)
    return MaskVolume(voxels=volume, spacing=spacing, subject_id=subject_id)


def largest_component(mask: MaskVolume, connectivity: int = 26) -> MaskVolume:
    """Zero out every foreground voxel outside the largest connected component.

    Components are compared by voxel count; a tie goes to the component whose
    first voxel in (z, y, x) raster order comes earliest. An empty mask passes
    through unchanged.
    """
    if connectivity not in ALLOWED_CONNECTIVITY:
        raise ValueError(f"connectivity must be one of {ALLOWED_CONNECTIVITY}, got {connectivity}")
    voxels = mask.voxels
    if not voxels.any():
        return MaskVolume(voxels=voxels.copy(), spacing=mask.spacing, subject_id=mask.subject_id)
    structure = ndimage.generate_binary_structure(3, _STRUCTURE_RANK[connectivity])
    labels, count = ndimage.label(voxels, structure=structure)
    sizes = np.bincount(labels.ravel())[1:]
    # ndimage assigns labels in raster-scan order of first encounter, so the
    # first argmax realizes the (z, y, x) tie-break.
    winner = int(np.argmax(sizes)) + 1
    kept = (labels == winner).astype(np.uint8)
    return MaskVolume(voxels=kept, spacing=mask.spacing, subject_id=mask.subject_id)
