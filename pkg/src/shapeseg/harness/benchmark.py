"""The pinned synthetic benchmark and the clinical reference context.

``scapula_like_v1`` is the frozen reference benchmark: 12 subjects of
32x64x64 voxels, each a flat ellipsoid with thin curved protrusions among
intensity-matched distractor blobs. Difficulty is tuned so that the plain
dice-only baseline is clearly imperfect and differences between the training
variants are observable. Changing any value here invalidates comparisons
against previously recorded results; bump the name instead.
"""

from __future__ import annotations

from shapeseg.data.augment import AugmentationConfig
from shapeseg.data.synthetic import BlobParams, DistractorParams, SyntheticConfig
from shapeseg.harness.experiment import ExperimentConfig
from shapeseg.losses import LossWeights
from shapeseg.networks.cae import CaeConfig
from shapeseg.networks.discriminator import DiscriminatorConfig
from shapeseg.networks.generator import GeneratorConfig
from shapeseg.trainer.config import StageConfig, TrainConfig

# Published leave-one-out results on a private 15-subject pediatric shoulder
# MR dataset. The data is not distributable, so these numbers CANNOT be
# reproduced by this package; they are kept only as ordering context for the
# synthetic benchmark (full > cgan > cae > baseline on dice, full best on the
# distance metric).
CLINICAL_REFERENCE = {
    "dataset": "private clinical MR, 15 subjects, not available",
    "reproducible": False,
    "mean_dice": {"unet": 79.21, "cae_unet": 80.52, "cgan_unet": 80.69, "full": 82.19},
    "std_dice": {"unet": 15.82, "cae_unet": 14.01, "cgan_unet": 13.12, "full": 9.96},
    "mean_hausdorff_mm": {"unet": 24.35, "cae_unet": 29.63, "cgan_unet": 24.07, "full": 19.31},
}

SCAPULA_LIKE_V1_SEED = 73

_INPUT_SIZE = (64, 64)


def scapula_like_v1() -> SyntheticConfig:
    """Frozen dataset recipe of the reference benchmark."""
    return SyntheticConfig(
        n_subjects=12,
        volume_shape=(32, 64, 64),
        noise_std=0.07,
        blob_params=BlobParams(
            radius_range=(0.38, 0.55),
            flatness_range=(0.30, 0.50),
            protrusion_count=(1, 3),
            protrusion_thickness=(1.2, 2.0),
            protrusion_length=(0.35, 0.70),
            contrast_range=(0.10, 0.24),
        ),
        distractor_params=DistractorParams(
            count=(2, 5),
            radius_range=(0.10, 0.22),
            contrast_jitter=0.03,
            margin_voxels=3.0,
        ),
        seed=SCAPULA_LIKE_V1_SEED,
        spacing=(2.0, 1.0, 1.0),
        target_fraction_band=(0.004, 0.15),
    )


def scapula_like_v1_train_config() -> TrainConfig:
    """Training settings pinned for the reference benchmark."""
    return TrainConfig(
        stage1=StageConfig(lr=0.01, batch_size=32, epochs=20),
        stage2=StageConfig(lr=0.0001, batch_size=32, epochs=20),
        weights=LossWeights(lambda1=0.01, lambda2=0.0001),
        d_steps_per_g_step=1,
        augmentation=AugmentationConfig(
            scale_range=(0.9, 1.1), rotation_range=(-15.0, 15.0), shift_range=(-0.10, 0.10)
        ),
        generator=GeneratorConfig(input_size=_INPUT_SIZE, depth=3, base_channels=16),
        cae=CaeConfig(input_size=_INPUT_SIZE, depth=3, base_channels=16, latent_dim=128),
        discriminator=DiscriminatorConfig(input_size=_INPUT_SIZE, depth=3, base_channels=16),
    )


def scapula_like_v1_experiment(dataset_root: str, out_dir: str | None = None) -> ExperimentConfig:
    """Full pinned experiment: all four methods on the reference dataset."""
    return ExperimentConfig(
        dataset_root=str(dataset_root),
        out_dir=str(out_dir) if out_dir else None,
        methods=("unet", "cae_unet", "cgan_unet", "full"),
        train=scapula_like_v1_train_config(),
        threshold=0.5,
        connectivity=26,
        seed=SCAPULA_LIKE_V1_SEED,
    )
