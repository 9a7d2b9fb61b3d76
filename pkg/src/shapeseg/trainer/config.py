"""Training configuration for the two-stage protocol.

Stage 1 fits the auto-encoder on groundtruth masks; stage 2 trains the
segmentation network, optionally against a discriminator and with the frozen
encoder as a shape regularizer. The ablation flag selects which extra terms
and networks participate:

========== ============== ===========
ablation   discriminator  encoder
========== ============== ===========
unet       no             no
cae_unet   no             yes
cgan_unet  yes            no
full       yes            yes
========== ============== ===========
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

from shapeseg.data.augment import AugmentationConfig
from shapeseg.exceptions import ConfigurationError
from shapeseg.losses import LossWeights
from shapeseg.networks.cae import CaeConfig
from shapeseg.networks.discriminator import DiscriminatorConfig
from shapeseg.networks.generator import GeneratorConfig

ABLATIONS = ("unet", "cae_unet", "cgan_unet", "full")


@dataclass(frozen=True)
class StageConfig:
    lr: float
    batch_size: int = 32
    epochs: int = 20
    optimizer: str = "adam"

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ConfigurationError(f"lr: must be > 0, got {self.lr}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size: must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs: must be >= 1, got {self.epochs}")
        if self.optimizer != "adam":
            raise ConfigurationError(f"optimizer: only 'adam' is supported, got {self.optimizer!r}")


@dataclass(frozen=True)
class TrainConfig:
    stage1: StageConfig = field(default_factory=lambda: StageConfig(lr=0.01))
    stage2: StageConfig = field(default_factory=lambda: StageConfig(lr=0.0001))
    weights: LossWeights = field(default_factory=LossWeights)
    d_steps_per_g_step: int = 1
    seed: int = 0
    augmentation: AugmentationConfig = field(default_factory=AugmentationConfig)
    ablation: str = "full"
    generator: GeneratorConfig | None = None
    cae: CaeConfig | None = None
    discriminator: DiscriminatorConfig | None = None

    def __post_init__(self) -> None:
        if self.ablation not in ABLATIONS:
            raise ConfigurationError(f"ablation: must be one of {ABLATIONS}, got {self.ablation!r}")
        if self.d_steps_per_g_step < 0:
            raise ConfigurationError(f"d_steps_per_g_step: must be >= 0, got {self.d_steps_per_g_step}")

    @property
    def uses_discriminator(self) -> bool:
        return self.ablation in ("cgan_unet", "full")

    @property
    def uses_encoder(self) -> bool:
        return self.ablation in ("cae_unet", "full")

    def effective_weights(self) -> LossWeights:
        """Loss weights with terms zeroed for networks the ablation omits."""
        return LossWeights(
            lambda1=self.weights.lambda1 if self.uses_discriminator else 0.0,
            lambda2=self.weights.lambda2 if self.uses_encoder else 0.0,
        )

    def with_ablation(self, ablation: str) -> "TrainConfig":
        return replace(self, ablation=ablation)

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("generator", "cae", "discriminator"):
            if data[key] is not None:
                data[key] = dict(data[key])
        return data

    @staticmethod
    def from_dict(data: dict) -> "TrainConfig":
        data = dict(data)

        def tup(d: dict, key: str) -> dict:
            if key in d and d[key] is not None:
                d = dict(d, **{key: tuple(d[key])})
            return d

        kwargs: dict = {}
        if "stage1" in data:
            kwargs["stage1"] = StageConfig(**data["stage1"])
        if "stage2" in data:
            kwargs["stage2"] = StageConfig(**data["stage2"])
        if "weights" in data:
            kwargs["weights"] = LossWeights(**data["weights"])
        if "augmentation" in data:
            aug = data["augmentation"]
            for key in ("scale_range", "rotation_range", "shift_range"):
                aug = tup(aug, key)
            kwargs["augmentation"] = AugmentationConfig(**aug)
        if data.get("generator") is not None:
            kwargs["generator"] = GeneratorConfig(**tup(data["generator"], "input_size"))
        if data.get("cae") is not None:
            kwargs["cae"] = CaeConfig(**tup(data["cae"], "input_size"))
        if data.get("discriminator") is not None:
            kwargs["discriminator"] = DiscriminatorConfig(**tup(data["discriminator"], "input_size"))
        for key in ("d_steps_per_g_step", "seed", "ablation"):
            if key in data:
                kwargs[key] = data[key]
        return TrainConfig(**kwargs)
