"""Training loss terms.

All losses are pure, stateless functions of torch tensors and are
differentiable with respect to their floating-point arguments. Expectations
are realized as arithmetic means over the mini-batch.

The generator objective is

    total = dice + lambda1 * adversarial + lambda2 * latent

where the dice term drives coarse overlap, the adversarial term rewards
mask realism under a conditional discriminator, and the latent term penalizes
squared distance between the shape embeddings of the prediction and of the
groundtruth. Setting both weights to zero reduces the objective exactly to
the plain dice loss (the baseline configuration).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

# Smoothing in both numerator and denominator: a slice where prediction and
# groundtruth are both empty scores a loss of exactly 0.
DICE_EPS = 1e-6
# Clamp applied inside every log so saturated scores stay finite.
LOG_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    """Weights of the adversarial (lambda1) and latent (lambda2) terms."""

    lambda1: float = 0.01
    lambda2: float = 0.0001

    def __post_init__(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError(f"loss weights must be >= 0, got ({self.lambda1}, {self.lambda2})")


def _check_same_shape(a: torch.Tensor, b: torch.Tensor, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what}: shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")


def dice_loss(y: torch.Tensor, p: torch.Tensor) -> torch.Tensor:
    """Soft dice loss, averaged over the batch (first dimension).

    ``y`` is the binary groundtruth, ``p`` the prediction in [0, 1]. Per item:
    ``1 - (2 * sum(y * p) + eps) / (sum(y) + sum(p) + eps)``.
    """
    _check_same_shape(y, p, "dice_loss")
    y = y.reshape(y.shape[0], -1)
    p = p.reshape(p.shape[0], -1)
    intersection = (y * p).sum(dim=1)
    denominator = y.sum(dim=1) + p.sum(dim=1)
    dice = (2.0 * intersection + DICE_EPS) / (denominator + DICE_EPS)
    return (1.0 - dice).mean()


def cae_loss(y: torch.Tensor, reconstruction: torch.Tensor) -> torch.Tensor:
    """Reconstruction loss of the auto-encoder: dice between mask and g(f(mask))."""
    return dice_loss(y, reconstruction)


def latent_loss(z_pred: torch.Tensor, z_true: torch.Tensor) -> torch.Tensor:
    """Mean squared distance between latent codes.

    Averages over both batch and latent dimensions, so the weight attached to
    this term does not depend on the latent size.
    """
    _check_same_shape(z_pred, z_true, "latent_loss")
    return ((z_pred - z_true) ** 2).mean()


def _neg_log(scores: torch.Tensor, what: str) -> torch.Tensor:
    if scores.numel() == 0:
        raise ValueError(f"{what}: empty score batch")
    if (scores < 0).any() or (scores > 1).any():
        raise ValueError(f"{what}: scores must lie in [0, 1]")
    return -torch.log(scores.clamp(min=LOG_EPS))


def adversarial_loss(scores: torch.Tensor) -> torch.Tensor:
    """Mean of -log(score) over the discriminator scores of generated masks."""
    return _neg_log(scores, "adversarial_loss").mean()


def discriminator_loss(real_scores: torch.Tensor, fake_scores: torch.Tensor) -> torch.Tensor:
    """Binary cross entropy of the discriminator: real toward 1, fake toward 0."""
    real_term = _neg_log(real_scores, "discriminator_loss(real)").mean()
    fake_term = _neg_log(1.0 - fake_scores, "discriminator_loss(fake)").mean()
    return real_term + fake_term


def generator_loss(
    y: torch.Tensor,
    p: torch.Tensor,
    weights: LossWeights,
    scores: torch.Tensor | None = None,
    z_pred: torch.Tensor | None = None,
    z_true: torch.Tensor | None = None,
) -> tuple[torch.Tensor, dict[str, float]]:
    """Composite generator objective with a per-term breakdown for logging.

    ``scores`` may be omitted only when ``weights.lambda1 == 0``; likewise the
    latent codes when ``weights.lambda2 == 0``. Terms whose inputs are absent
    are reported as 0.0 in the breakdown.
    """
    dice = dice_loss(y, p)
    total = dice
    adv_value = 0.0
    lat_value = 0.0

    if scores is not None:
        adv = adversarial_loss(scores)
        adv_value = float(adv)
        total = total + weights.lambda1 * adv
    elif weights.lambda1 > 0:
        raise ValueError("generator_loss: lambda1 > 0 but no discriminator scores given")

    if z_pred is not None or z_true is not None:
        if z_pred is None or z_true is None:
            raise ValueError("generator_loss: need both z_pred and z_true")
        lat = latent_loss(z_pred, z_true)
        lat_value = float(lat)
        total = total + weights.lambda2 * lat
    elif weights.lambda2 > 0:
        raise ValueError("generator_loss: lambda2 > 0 but no latent codes given")

    breakdown = {"dice": float(dice), "adversarial": adv_value, "latent": lat_value}
    return total, breakdown
