"""Dataset generation, storage, slicing, augmentation and split construction."""

from shapeseg.data.augment import AugmentationConfig, augment, draw_transform
from shapeseg.data.io import (
    export_slice_png,
    import_slice_png,
    load_mask,
    load_volume,
    save_mask,
    save_volume,
)
from shapeseg.data.splits import leave_one_out_splits
from shapeseg.data.synthetic import (
    BlobParams,
    DistractorParams,
    SyntheticConfig,
    generate_subject,
    generate_synthetic_dataset,
)
from shapeseg.data.volumes import MaskVolume, SlicePair, Volume, extract_slices

__all__ = [
    "AugmentationConfig",
    "BlobParams",
    "DistractorParams",
    "MaskVolume",
    "SlicePair",
    "SyntheticConfig",
    "Volume",
    "augment",
    "draw_transform",
    "export_slice_png",
    "extract_slices",
    "generate_subject",
    "generate_synthetic_dataset",
    "import_slice_png",
    "leave_one_out_splits",
    "load_mask",
    "load_volume",
    "save_mask",
    "save_volume",
]
