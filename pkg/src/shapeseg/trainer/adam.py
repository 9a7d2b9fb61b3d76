"""Functional Adam optimizer over named parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from shapeseg.exceptions import TrainingAbort

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8

Params = dict[str, torch.Tensor]


@dataclass
class AdamState:
    step: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)


def init_adam_state(params: Params) -> AdamState:
    return AdamState(
        step=0,
        m={name: torch.zeros_like(p) for name, p in params.items()},
        v={name: torch.zeros_like(p) for name, p in params.items()},
    )


def adam_step(
    params: Params,
    grads: Params,
    state: AdamState,
    lr: float,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPS,
) -> tuple[Params, AdamState]:
    """One Adam update. Returns fresh tensors; inputs are not modified.

    Raises :class:`TrainingAbort` if any gradient is non-finite, naming the
    offending tensor and the step at which it happened.
    """
    if set(params) != set(grads):
        raise ValueError(
            f"parameter/gradient name mismatch: {sorted(set(params) ^ set(grads))[:4]}"
        )
    t = state.step + 1
    new_params: Params = {}
    new_m: Params = {}
    new_v: Params = {}
    bias1 = 1.0 - beta1**t
    bias2 = 1.0 - beta2**t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient for {name!r} has shape {tuple(g.shape)}, expected {tuple(p.shape)}")
        if not torch.isfinite(g).all():
            raise TrainingAbort(f"non-finite gradient in tensor {name!r} at optimizer step {t}")
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        new_params[name] = p - lr * m_hat / (torch.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(step=t, m=new_m, v=new_v)
