"""Two-stage training orchestration."""

from shapeseg.trainer.adam import AdamState, adam_step, init_adam_state
from shapeseg.trainer.config import ABLATIONS, StageConfig, TrainConfig
from shapeseg.trainer.log import StepRecord, TrainLog
from shapeseg.trainer.loops import (
    STAGE_CAE,
    STAGE_SEGMENTER,
    predict_mask,
    predict_probabilities,
    train_cae,
    train_segmenter,
)

__all__ = [
    "ABLATIONS",
    "AdamState",
    "STAGE_CAE",
    "STAGE_SEGMENTER",
    "StageConfig",
    "StepRecord",
    "TrainConfig",
    "TrainLog",
    "adam_step",
    "init_adam_state",
    "predict_mask",
    "predict_probabilities",
    "train_cae",
    "train_segmenter",
]
