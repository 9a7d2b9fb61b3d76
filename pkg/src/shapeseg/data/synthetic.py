"""Procedural generation of scapula-like training volumes.

Each subject contains exactly one target: a smooth, flattened ellipsoid with
a few thin curved protrusions growing out of its surface (a crude flat bone
with spine-like ridges). The target sits in a smoothly varying background
with additive noise and a handful of distractor blobs whose intensity matches
the target, so plain per-voxel appearance is ambiguous and shape carries the
signal. The mask marks target voxels only.

Generation is deterministic: subject ``i`` draws from a stream keyed by
``(cfg.seed, i)``, so per-subject work can run in any order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from shapeseg.data.volumes import MaskVolume, Volume
from shapeseg.exceptions import ConfigurationError

Interval = tuple[float, float]
IntInterval = tuple[int, int]


@dataclass(frozen=True)
class BlobParams:
    """Target shape and contrast ranges.

    Radii are fractions of the half-extent of each axis. ``flatness_range``
    shrinks one random axis to make the body plate-like. Protrusions are thin
    curved tubes attached to the ellipsoid surface.
    """

    radius_range: Interval = (0.38, 0.55)
    flatness_range: Interval = (0.30, 0.50)
    protrusion_count: IntInterval = (1, 3)
    protrusion_thickness: Interval = (1.2, 2.0)
    protrusion_length: Interval = (0.35, 0.70)
    contrast_range: Interval = (0.12, 0.26)


@dataclass(frozen=True)
class DistractorParams:
    """Non-target structures with target-like intensity."""

    count: IntInterval = (2, 5)
    radius_range: Interval = (0.10, 0.22)
    contrast_jitter: float = 0.03
    margin_voxels: float = 3.0


@dataclass(frozen=True)
class SyntheticConfig:
    n_subjects: int = 4
    volume_shape: tuple[int, int, int] = (16, 64, 64)
    noise_std: float = 0.06
    blob_params: BlobParams = field(default_factory=BlobParams)
    distractor_params: DistractorParams = field(default_factory=DistractorParams)
    seed: int = 0
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    target_fraction_band: Interval = (0.004, 0.15)

    def __post_init__(self) -> None:
        if self.n_subjects < 2:
            raise ConfigurationError(f"n_subjects: need at least 2 for leave-one-out, got {self.n_subjects}")
        if len(self.volume_shape) != 3 or min(self.volume_shape) < 8:
            raise ConfigurationError(f"volume_shape: every axis must be >= 8, got {self.volume_shape}")
        if self.noise_std < 0:
            raise ConfigurationError(f"noise_std: must be >= 0, got {self.noise_std}")
        if any(s <= 0 for s in self.spacing):
            raise ConfigurationError(f"spacing: must be strictly positive, got {self.spacing}")
        lo, hi = self.target_fraction_band
        if not (0 < lo < hi < 1):
            raise ConfigurationError(f"target_fraction_band: need 0 < lo < hi < 1, got {self.target_fraction_band}")
        for holder, names in (
            (self.blob_params, ("radius_range", "flatness_range", "protrusion_thickness",
                                "protrusion_length", "contrast_range")),
            (self.distractor_params, ("radius_range",)),
        ):
            for name in names:
                lo, hi = getattr(holder, name)
                if lo > hi or lo <= 0:
                    raise ConfigurationError(f"{name}: invalid interval ({lo}, {hi})")
        c_lo, c_hi = self.blob_params.protrusion_count
        if c_lo > c_hi or c_lo < 0:
            raise ConfigurationError(f"protrusion_count: invalid interval ({c_lo}, {c_hi})")
        d_lo, d_hi = self.distractor_params.count
        if d_lo > d_hi or d_lo < 0:
            raise ConfigurationError(f"count: invalid distractor count interval ({d_lo}, {d_hi})")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "SyntheticConfig":
        data = dict(data)

        def tuples(d: dict) -> dict:
            return {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}

        if "blob_params" in data:
            data["blob_params"] = BlobParams(**tuples(data["blob_params"]))
        if "distractor_params" in data:
            data["distractor_params"] = DistractorParams(**tuples(data["distractor_params"]))
        return SyntheticConfig(**tuples(data))


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    # QR of a Gaussian matrix gives a uniformly random orthogonal matrix.
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


def _coordinate_grid(shape: tuple[int, int, int]) -> np.ndarray:
    axes = [np.arange(n, dtype=np.float64) for n in shape]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _ellipsoid_mask(grid: np.ndarray, center: np.ndarray, radii: np.ndarray,
                    rotation: np.ndarray) -> np.ndarray:
    local = (grid - center) @ rotation
    return ((local / radii) ** 2).sum(axis=-1) <= 1.0


def _stamp_ball(mask: np.ndarray, point: np.ndarray, radius: float) -> None:
    shape = mask.shape
    lo = np.maximum(np.floor(point - radius).astype(int), 0)
    hi = np.minimum(np.ceil(point + radius).astype(int) + 1, shape)
    if (lo >= hi).any():
        return
    sub = np.stack(
        np.meshgrid(*[np.arange(a, b) for a, b in zip(lo, hi)], indexing="ij"), axis=-1
    ).astype(np.float64)
    dist2 = ((sub - point) ** 2).sum(axis=-1)
    region = tuple(slice(a, b) for a, b in zip(lo, hi))
    mask[region] |= dist2 <= radius**2


def _grow_protrusion(mask: np.ndarray, rng: np.random.Generator, center: np.ndarray,
                     radii: np.ndarray, rotation: np.ndarray, thickness: float,
                     length: float) -> None:
    # Start just inside the ellipsoid surface so the tube stays attached.
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    surface_t = 1.0 / np.linalg.norm((direction @ rotation) / radii)
    point = center + 0.9 * surface_t * direction

    axis = np.cross(direction, rng.normal(size=3))
    axis /= np.linalg.norm(axis) + 1e-12
    bend_per_step = rng.uniform(-0.12, 0.12)

    step = 0.6
    n_steps = max(int(length / step), 2)
    v = direction.copy()
    for _ in range(n_steps):
        _stamp_ball(mask, point, thickness)
        # Rodrigues rotation of the heading around the fixed bend axis.
        c, s = np.cos(bend_per_step), np.sin(bend_per_step)
        v = v * c + np.cross(axis, v) * s + axis * np.dot(axis, v) * (1 - c)
        point = point + step * v
        if (point < -thickness).any() or (point > np.array(mask.shape) + thickness).any():
            break


def _make_target(shape: tuple[int, int, int], rng: np.random.Generator,
                 params: BlobParams) -> np.ndarray:
    grid = _coordinate_grid(shape)
    extent = np.array(shape, dtype=np.float64)
    center = extent / 2.0 + rng.uniform(-0.08, 0.08, size=3) * extent
    radii = rng.uniform(*params.radius_range, size=3) * extent / 2.0
    flat_axis = rng.integers(0, 3)
    radii[flat_axis] *= rng.uniform(*params.flatness_range)
    rotation = _random_rotation(rng)

    mask = _ellipsoid_mask(grid, center, radii, rotation)
    n_prot = int(rng.integers(params.protrusion_count[0], params.protrusion_count[1] + 1))
    min_extent = float(min(shape))
    for _ in range(n_prot):
        thickness = rng.uniform(*params.protrusion_thickness)
        length = rng.uniform(*params.protrusion_length) * min_extent
        _grow_protrusion(mask, rng, center, radii, rotation, thickness, length)
    return mask


def _place_distractors(shape: tuple[int, int, int], rng: np.random.Generator,
                       params: DistractorParams, target: np.ndarray) -> np.ndarray:
    grid = _coordinate_grid(shape)
    extent = np.array(shape, dtype=np.float64)
    keep_out = ndimage.binary_dilation(target, iterations=max(int(params.margin_voxels), 1))
    distractors = np.zeros(shape, dtype=bool)
    n = int(rng.integers(params.count[0], params.count[1] + 1))
    for _ in range(n):
        for _attempt in range(30):
            center = rng.uniform(0.1, 0.9, size=3) * extent
            radii = rng.uniform(*params.radius_range, size=3) * extent / 2.0
            blob = _ellipsoid_mask(grid, center, radii, _random_rotation(rng))
            if not (blob & keep_out).any():
                distractors |= blob
                break
    return distractors


def _is_single_component(mask: np.ndarray) -> bool:
    if not mask.any():
        return False
    structure = ndimage.generate_binary_structure(3, 1)  # 6-connectivity
    _, n = ndimage.label(mask, structure=structure)
    return n == 1


def _render_subject(cfg: SyntheticConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    shape = cfg.volume_shape
    target = _make_target(shape, rng, cfg.blob_params)
    distractors = _place_distractors(shape, rng, cfg.distractor_params, target)

    base = 0.35 + ndimage.gaussian_filter(rng.normal(size=shape), sigma=6.0) * 0.6
    contrast = rng.uniform(*cfg.blob_params.contrast_range)
    d_contrast = contrast + rng.uniform(
        -cfg.distractor_params.contrast_jitter, cfg.distractor_params.contrast_jitter
    )
    # Slightly blurred shape edges emulate partial-volume softness.
    soft_target = ndimage.gaussian_filter(target.astype(np.float64), sigma=0.7)
    soft_distractors = ndimage.gaussian_filter(distractors.astype(np.float64), sigma=0.7)
    image = base + contrast * soft_target + d_contrast * soft_distractors
    image = image + rng.normal(scale=cfg.noise_std, size=shape)
    return np.clip(image, 0.0, 1.0).astype(np.float32), target


def generate_subject(cfg: SyntheticConfig, subject_index: int) -> tuple[Volume, MaskVolume]:
    """Generate one subject, retrying until the target invariants hold."""
    size = int(np.prod(cfg.volume_shape))
    lo, hi = cfg.target_fraction_band
    for attempt in range(25):
        rng = np.random.default_rng((cfg.seed, subject_index, attempt))
        image, target = _render_subject(cfg, rng)
        fraction = target.sum() / size
        if lo <= fraction <= hi and _is_single_component(target):
            subject_id = f"s{subject_index:03d}"
            return (
                Volume(voxels=image, spacing=cfg.spacing, subject_id=subject_id),
                MaskVolume(voxels=target.astype(np.uint8), spacing=cfg.spacing, subject_id=subject_id),
            )
    raise ConfigurationError(
        "blob_params: could not generate a connected target within "
        f"target_fraction_band {cfg.target_fraction_band} after 25 attempts"
    )


def generate_synthetic_dataset(cfg: SyntheticConfig) -> list[tuple[Volume, MaskVolume]]:
    """Generate ``cfg.n_subjects`` paired volumes, deterministic in ``cfg.seed``."""
    return [generate_subject(cfg, i) for i in range(cfg.n_subjects)]
