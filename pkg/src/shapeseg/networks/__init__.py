"""Network architectures, forward contracts and checkpointing."""

from shapeseg.networks.cae import CaeConfig, Decoder, Encoder, decoder_forward, encoder_forward
from shapeseg.networks.checkpoint import (
    NetworkCheckpoint,
    build_module,
    checkpoint_from_module,
    load_checkpoint,
    module_from_checkpoint,
    save_checkpoint,
)
from shapeseg.networks.discriminator import Discriminator, DiscriminatorConfig, discriminator_forward
from shapeseg.networks.generator import Generator, GeneratorConfig, generator_forward
from shapeseg.networks.init import init_parameters

__all__ = [
    "CaeConfig",
    "Decoder",
    "Discriminator",
    "DiscriminatorConfig",
    "Encoder",
    "Generator",
    "GeneratorConfig",
    "NetworkCheckpoint",
    "build_module",
    "checkpoint_from_module",
    "decoder_forward",
    "discriminator_forward",
    "encoder_forward",
    "generator_forward",
    "init_parameters",
    "load_checkpoint",
    "module_from_checkpoint",
    "save_checkpoint",
]
