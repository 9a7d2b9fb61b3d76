"""Append-only structured training log."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class StepRecord:
    stage: int
    epoch: int
    step: int
    losses: dict[str, float]
    lr: float
    duration_s: float
    draw_cursor: int


@dataclass
class TrainLog:
    run_meta: dict = field(default_factory=dict)
    records: list[StepRecord] = field(default_factory=list)
    checkpoint_paths: dict[str, str] = field(default_factory=dict)

    def append(self, record: StepRecord) -> None:
        self.records.append(record)

    def epoch_means(self, stage: int, key: str = "total") -> list[float]:
        by_epoch: dict[int, list[float]] = {}
        for rec in self.records:
            if rec.stage == stage and key in rec.losses:
                by_epoch.setdefault(rec.epoch, []).append(rec.losses[key])
        return [sum(v) / len(v) for _, v in sorted(by_epoch.items())]

    def to_jsonl(self, path: Path | str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"run_meta": self.run_meta}) + "\n")
            for rec in self.records:
                fh.write(json.dumps(asdict(rec)) + "\n")
            if self.checkpoint_paths:
                fh.write(json.dumps({"checkpoints": self.checkpoint_paths}) + "\n")
