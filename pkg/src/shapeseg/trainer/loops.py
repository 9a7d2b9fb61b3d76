"""Two-stage training: auto-encoder pre-training, then segmenter training.

Stage 1 fits encoder and decoder jointly on groundtruth masks with the dice
reconstruction loss. Stage 2 trains the generator (and, when the ablation
uses it, the discriminator) with the composite objective while the encoder
weights stay frozen. Within one stage-2 iteration the discriminator is
updated first, on the generator's pre-update outputs; the generator update
then scores against the freshly updated discriminator.

All randomness (initialization, epoch shuffles, augmentation draws) comes
from streams derived from the config seed, so a training run is a pure
function of (dataset, config).
"""

from __future__ import annotations

import math
import time
from collections.abc import Sequence

import numpy as np
import torch

from shapeseg.data.augment import augment
from shapeseg.data.volumes import SlicePair, Volume
from shapeseg.exceptions import CheckpointError, TrainingAbort
from shapeseg.losses import cae_loss, discriminator_loss, generator_loss
from shapeseg.networks.cae import CaeConfig, Decoder, Encoder
from shapeseg.networks.checkpoint import (
    NetworkCheckpoint,
    checkpoint_from_module,
    module_from_checkpoint,
)
from shapeseg.networks.discriminator import Discriminator, DiscriminatorConfig
from shapeseg.networks.generator import Generator, GeneratorConfig
from shapeseg.networks.init import init_parameters
from shapeseg.postproc import largest_component, stack_slices, threshold
from shapeseg.seeding import (
    STREAM_DISCRIMINATOR_INIT,
    STREAM_ENCODER_INIT,
    STREAM_GENERATOR_INIT,
    STREAM_SHUFFLE,
    derive_seed,
)
from shapeseg.trainer.adam import AdamState, adam_step, init_adam_state
from shapeseg.trainer.config import StageConfig, TrainConfig
from shapeseg.trainer.log import StepRecord, TrainLog

STAGE_CAE = 1
STAGE_SEGMENTER = 2


def _named_params(module: torch.nn.Module, prefix: str = "") -> dict[str, torch.nn.Parameter]:
    return {prefix + name: p for name, p in module.named_parameters()}


def _apply_update(module_params: dict[str, torch.nn.Parameter], new_values: dict[str, torch.Tensor]) -> None:
    with torch.no_grad():
        for name, p in module_params.items():
            p.copy_(new_values[name])


def _take_step(
    loss: torch.Tensor,
    module_params: dict[str, torch.nn.Parameter],
    state: AdamState,
    lr: float,
    context: str,
) -> AdamState:
    if not math.isfinite(float(loss)):
        raise TrainingAbort(f"non-finite loss in {context} at optimizer step {state.step + 1}")
    for p in module_params.values():
        p.grad = None
    loss.backward()
    grads = {}
    for name, p in module_params.items():
        if p.grad is None:
            raise TrainingAbort(f"missing gradient for tensor {name!r} in {context}")
        grads[name] = p.grad
    values = {name: p.detach() for name, p in module_params.items()}
    new_values, state = adam_step(values, grads, state, lr)
    _apply_update(module_params, new_values)
    return state


def _set_requires_grad(module: torch.nn.Module, flag: bool) -> None:
    for p in module.parameters():
        p.requires_grad_(flag)


def _shuffle(n: int, seed: int, stage: int, epoch: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(seed, STREAM_SHUFFLE, stage, epoch))
    return rng.permutation(n)


def _batches(order: np.ndarray, batch_size: int):
    for start in range(0, len(order), batch_size):
        yield order[start : start + batch_size]


def _to_tensor(arrays: list[np.ndarray]) -> torch.Tensor:
    return torch.from_numpy(np.stack(arrays)[:, None].astype(np.float32))


def train_cae(
    masks: Sequence[np.ndarray],
    cfg: TrainConfig,
) -> tuple[NetworkCheckpoint, NetworkCheckpoint, TrainLog]:
    """Fit the shape auto-encoder on groundtruth mask slices.

    Slices with an empty mask carry no shape information and are dropped.
    Returns encoder and decoder checkpoints plus the step log.
    """
    masks = [np.asarray(m) for m in masks]
    if not masks:
        raise ValueError("train_cae: empty training set")
    for i, m in enumerate(masks):
        if m.ndim != 2:
            raise ValueError(f"train_cae: mask {i} is not 2D")
        if not np.isin(np.unique(m), (0, 1)).all():
            raise ValueError(f"train_cae: mask {i} is not binary")
    shape = masks[0].shape
    if any(m.shape != shape for m in masks):
        raise ValueError("train_cae: masks disagree on shape")
    masks = [m for m in masks if m.any()]
    if not masks:
        raise ValueError("train_cae: all masks are empty, nothing to encode")

    cae_cfg = cfg.cae or CaeConfig(input_size=shape)
    if tuple(cae_cfg.input_size) != tuple(shape):
        raise CheckpointError(
            f"train_cae: configured input size {cae_cfg.input_size} != mask size {shape}"
        )
    encoder = Encoder(cae_cfg)
    decoder = Decoder(cae_cfg)
    init_parameters(encoder, derive_seed(cfg.seed, STREAM_ENCODER_INIT))
    init_parameters(decoder, derive_seed(cfg.seed, STREAM_DECODER_INIT))

    params = {**_named_params(encoder, "encoder."), **_named_params(decoder, "decoder.")}
    state = init_adam_state({k: p.detach() for k, p in params.items()})
    stage = cfg.stage1
    log = TrainLog(
        run_meta={
            "stage": STAGE_CAE,
            "lr": stage.lr,
            "batch_size": stage.batch_size,
            "epochs": stage.epochs,
            "seed": cfg.seed,
            "n_slices": len(masks),
        }
    )

    draw_cursor = 0
    step_no = 0
    for epoch in range(stage.epochs):
        order = _shuffle(len(masks), cfg.seed, STAGE_CAE, epoch)
        for batch_idx in _batches(order, stage.batch_size):
            t0 = time.perf_counter()
            cursor_at_start = draw_cursor
            batch = []
            for i in batch_idx:
                pair = SlicePair(image=masks[i].astype(np.float32), mask=masks[i])
                batch.append(augment(pair, cfg.augmentation, draw_cursor).mask)
                draw_cursor += 1
            y = _to_tensor(batch)
            recon = decoder(encoder(y))
            loss = cae_loss(y, recon)
            state = _take_step(loss, params, state, stage.lr, "stage-1 auto-encoder")
            step_no += 1
            log.append(
                StepRecord(
                    stage=STAGE_CAE,
                    epoch=epoch,
                    step=step_no,
                    losses={"total": float(loss), "cae": float(loss)},
                    lr=stage.lr,
                    duration_s=time.perf_counter() - t0,
                    draw_cursor=cursor_at_start,
                )
            )

    curve = log.epoch_means(STAGE_CAE)
    meta = {"epochs": stage.epochs, "seed": cfg.seed, "loss_curve": curve, "final_loss": curve[-1]}
    return (
        checkpoint_from_module("encoder", encoder, meta),
        checkpoint_from_module("decoder", decoder, meta),
        log,
    )


def _prepare_encoder(f_ckpt: NetworkCheckpoint | None, cfg: TrainConfig, shape: tuple[int, int]) -> Encoder | None:
    if not cfg.uses_encoder:
        return None
    if f_ckpt is None:
        raise ValueError(f"ablation {cfg.ablation!r} needs a trained encoder checkpoint")
    encoder = module_from_checkpoint(f_ckpt, expected_role="encoder")
    if tuple(encoder.config.input_size) != tuple(shape):
        raise CheckpointError(
            f"encoder checkpoint expects input {encoder.config.input_size}, data is {shape}"
        )
    encoder.eval()
    _set_requires_grad(encoder, False)
    return encoder


def train_segmenter(
    pairs: Sequence[SlicePair],
    f_ckpt: NetworkCheckpoint | None,
    cfg: TrainConfig,
) -> tuple[NetworkCheckpoint, NetworkCheckpoint | None, TrainLog]:
    """Train the generator, and the discriminator when the ablation uses one.

    Slices with empty masks stay in the training set: the generator must
    learn to emit empty masks too. The encoder checkpoint is only consumed
    (frozen) and never modified.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("train_segmenter: empty training set")
    shape = pairs[0].image.shape
    if any(p.image.shape != shape for p in pairs):
        raise ValueError("train_segmenter: slices disagree on shape")

    weights = cfg.effective_weights()
    gen_cfg = cfg.generator or GeneratorConfig(input_size=shape)
    if tuple(gen_cfg.input_size) != tuple(shape):
        raise CheckpointError(
            f"train_segmenter: configured input size {gen_cfg.input_size} != slice size {shape}"
        )
    generator = Generator(gen_cfg)
    init_parameters(generator, derive_seed(cfg.seed, STREAM_GENERATOR_INIT))
    g_params = _named_params(generator)
    g_state = init_adam_state({k: p.detach() for k, p in g_params.items()})

    discriminator: Discriminator | None = None
    d_params: dict[str, torch.nn.Parameter] = {}
    d_state: AdamState | None = None
    if cfg.uses_discriminator:
        d_cfg = cfg.discriminator or DiscriminatorConfig(input_size=shape)
        discriminator = Discriminator(d_cfg)
        init_parameters(discriminator, derive_seed(cfg.seed, STREAM_DISCRIMINATOR_INIT))
        d_params = _named_params(discriminator)
        d_state = init_adam_state({k: p.detach() for k, p in d_params.items()})

    encoder = _prepare_encoder(f_ckpt, cfg, shape)

    stage = cfg.stage2
    log = TrainLog(
        run_meta={
            "stage": STAGE_SEGMENTER,
            "ablation": cfg.ablation,
            "lr": stage.lr,
            "batch_size": stage.batch_size,
            "epochs": stage.epochs,
            "seed": cfg.seed,
            "weights": {"lambda1": weights.lambda1, "lambda2": weights.lambda2},
            "d_steps_per_g_step": cfg.d_steps_per_g_step if discriminator is not None else 0,
            "update_order": "discriminator_then_generator",
            "n_slices": len(pairs),
        }
    )

    draw_cursor = 0
    step_no = 0
    for epoch in range(stage.epochs):
        order = _shuffle(len(pairs), cfg.seed, STAGE_SEGMENTER, epoch)
        for batch_idx in _batches(order, stage.batch_size):
            t0 = time.perf_counter()
            cursor_at_start = draw_cursor
            images, masks = [], []
            for i in batch_idx:
                augmented = augment(pairs[i], cfg.augmentation, draw_cursor)
                images.append(augmented.image)
                masks.append(augmented.mask)
                draw_cursor += 1
            x = _to_tensor(images)
            y = _to_tensor(masks)

            losses: dict[str, float] = {}
            if discriminator is not None and cfg.d_steps_per_g_step > 0:
                with torch.no_grad():
                    fake_pre = generator(x)
                for _ in range(cfg.d_steps_per_g_step):
                    d_loss = discriminator_loss(
                        discriminator(x, y), discriminator(x, fake_pre)
                    )
                    d_state = _take_step(d_loss, d_params, d_state, stage.lr, "stage-2 discriminator")
                losses["d_loss"] = float(d_loss)

            prediction = generator(x)
            scores = None
            z_pred = z_true = None
            if discriminator is not None:
                _set_requires_grad(discriminator, False)
                scores = discriminator(x, prediction)
            if encoder is not None:
                z_pred = encoder(prediction)
                with torch.no_grad():
                    z_true = encoder(y)
            total, terms = generator_loss(y, prediction, weights, scores, z_pred, z_true)
            g_state = _take_step(total, g_params, g_state, stage.lr, "stage-2 generator")
            if discriminator is not None:
                _set_requires_grad(discriminator, True)

            step_no += 1
            losses.update(terms)
            losses["total"] = float(total)
            log.append(
                StepRecord(
                    stage=STAGE_SEGMENTER,
                    epoch=epoch,
                    step=step_no,
                    losses=losses,
                    lr=stage.lr,
                    duration_s=time.perf_counter() - t0,
                    draw_cursor=cursor_at_start,
                )
            )

    curve = log.epoch_means(STAGE_SEGMENTER)
    meta = {
        "epochs": stage.epochs,
        "seed": cfg.seed,
        "ablation": cfg.ablation,
        "loss_curve": curve,
        "final_loss": curve[-1],
    }
    g_ckpt = checkpoint_from_module("generator", generator, meta)
    d_ckpt = checkpoint_from_module("discriminator", discriminator, meta) if discriminator is not None else None
    return g_ckpt, d_ckpt, log


def predict_probabilities(generator: Generator, volume: Volume, batch_size: int = 32) -> np.ndarray:
    """Per-slice foreground probabilities for a whole volume, shape (D, H, W)."""
    generator.eval()
    outputs = []
    with torch.no_grad():
        for start in range(0, volume.shape[0], batch_size):
            block = volume.voxels[start : start + batch_size]
            x = torch.from_numpy(block[:, None].astype(np.float32))
            outputs.append(generator(x).squeeze(1).numpy())
    return np.concatenate(outputs, axis=0)


def predict_mask(
    generator: Generator,
    volume: Volume,
    prob_threshold: float = 0.5,
    connectivity: int = 26,
    batch_size: int = 32,
):
    """Full inference pipeline: probabilities, threshold, stack, keep largest component."""
    probs = predict_probabilities(generator, volume, batch_size)
    binary = [threshold(p, prob_threshold) for p in probs]
    stacked = stack_slices(binary, spacing=volume.spacing, subject_id=volume.subject_id)
    return largest_component(stacked, connectivity)


def stage_config_for(cfg: TrainConfig, stage: int) -> StageConfig:
    return cfg.stage1 if stage == STAGE_CAE else cfg.stage2
