"""Leave-one-out ablation experiment over the four training variants.

For every split and every requested method the pipeline trains from scratch,
predicts the held-out subject slice by slice, post-processes the stacked
volume and scores it against the groundtruth. All methods within one
experiment see identical splits, identical augmentation draws and identical
initial generator weights, so row differences isolate the loss terms.

The auto-encoder stage depends only on the split's training masks and the
stage-1 settings, so its checkpoints are shared between the methods that use
the encoder within a split.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from shapeseg.data.io import load_mask, load_volume, save_mask, save_volume
from shapeseg.data.splits import leave_one_out_splits
from shapeseg.data.volumes import MaskVolume, Volume, extract_slices
from shapeseg.exceptions import ConfigurationError, DataFormatError, TrainingAbort
from shapeseg.metrics import (
    HausdorffResult,
    MetricsReport,
    SubjectScores,
    aggregate,
    score_subject,
)
from shapeseg.networks.checkpoint import module_from_checkpoint
from shapeseg.seeding import derive_seed
from shapeseg.trainer.config import ABLATIONS, TrainConfig
from shapeseg.trainer.loops import predict_mask, train_cae, train_segmenter

IMAGE_FILENAME = "image.vol"
MASK_FILENAME = "mask.vol"


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_root: str
    out_dir: str | None = None
    methods: tuple[str, ...] = ABLATIONS
    train: TrainConfig = field(default_factory=TrainConfig)
    train_overrides: dict = field(default_factory=dict)
    threshold: float = 0.5
    connectivity: int = 26
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.methods:
            raise ConfigurationError("methods: at least one method is required")
        unknown = sorted(set(self.methods) - set(ABLATIONS))
        if unknown:
            raise ConfigurationError(f"methods: unknown method(s) {unknown}, valid are {ABLATIONS}")
        bad = sorted(set(self.train_overrides) - set(ABLATIONS))
        if bad:
            raise ConfigurationError(f"train_overrides: unknown method(s) {bad}")

    def to_dict(self) -> dict:
        return {
            "dataset_root": self.dataset_root,
            "out_dir": self.out_dir,
            "methods": list(self.methods),
            "train": self.train.to_dict(),
            "train_overrides": self.train_overrides,
            "threshold": self.threshold,
            "connectivity": self.connectivity,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "train" in data:
            data["train"] = TrainConfig.from_dict(data["train"])
        if "methods" in data:
            data["methods"] = tuple(data["methods"])
        return ExperimentConfig(**data)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def write_dataset(root: Path | str, pairs: list[tuple[Volume, MaskVolume]]) -> None:
    root = Path(root)
    for volume, mask in pairs:
        subject_dir = root / volume.subject_id
        subject_dir.mkdir(parents=True, exist_ok=True)
        save_volume(volume, subject_dir / IMAGE_FILENAME)
        save_mask(mask, subject_dir / MASK_FILENAME)


def load_dataset(root: Path | str) -> list[tuple[Volume, MaskVolume]]:
    root = Path(root)
    if not root.is_dir():
        raise DataFormatError(f"dataset root {root} does not exist")
    pairs = []
    for subject_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        image_path = subject_dir / IMAGE_FILENAME
        mask_path = subject_dir / MASK_FILENAME
        if not image_path.exists() or not mask_path.exists():
            raise DataFormatError(f"subject directory {subject_dir} is missing {IMAGE_FILENAME} or {MASK_FILENAME}")
        volume = load_volume(image_path)
        mask = load_mask(mask_path)
        if volume.shape != mask.shape:
            raise DataFormatError(f"{subject_dir}: image shape {volume.shape} != mask shape {mask.shape}")
        pairs.append((volume, mask))
    if not pairs:
        raise DataFormatError(f"dataset root {root} contains no subject directories")
    return pairs


def method_train_config(exp: ExperimentConfig, method: str, split_index: int) -> TrainConfig:
    """Per-method config for one split.

    Seeds derive from (experiment seed, split) only, never from the method,
    so every method starts from the same generator initialization and sees
    the same augmentation stream.
    """
    base = exp.train.to_dict()
    base.update(exp.train_overrides.get(method, {}))
    cfg = TrainConfig.from_dict(base)
    split_seed = derive_seed(exp.seed, split_index)
    augmentation = replace(cfg.augmentation, seed=derive_seed(exp.seed, split_index, 1))
    return replace(cfg, ablation=method, seed=split_seed, augmentation=augmentation)


@dataclass
class AblationTable:
    methods: dict[str, MetricsReport]
    failures: dict[str, dict[str, str]]
    provenance: dict
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": "ablation-table-v1",
            "provenance": self.provenance,
            "methods": {
                name: _report_to_dict(report) for name, report in self.methods.items()
            },
            "failures": self.failures,
            "timing": self.timing,
        }

    def canonical_json(self, include_timing: bool = False) -> str:
        data = self.to_dict()
        if not include_timing:
            data.pop("timing")
        return json.dumps(data, sort_keys=True)

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @staticmethod
    def load(path: Path | str) -> "AblationTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        methods = {name: _report_from_dict(rep) for name, rep in data["methods"].items()}
        return AblationTable(
            methods=methods,
            failures=data.get("failures", {}),
            provenance=data.get("provenance", {}),
            timing=data.get("timing", {}),
        )


def tables_match(a: AblationTable, b: AblationTable) -> bool:
    """Equality of two ablation tables, ignoring wall-clock fields."""
    return a.canonical_json() == b.canonical_json()


def _report_to_dict(report: MetricsReport) -> dict:
    return {
        "per_subject": {
            sid: {
                "dice": s.dice,
                "sensitivity": s.sensitivity,
                "specificity": s.specificity,
                "jaccard": s.jaccard,
                "hausdorff_mm": s.hausdorff_mm.value_mm,
                "hausdorff_reason": s.hausdorff_mm.reason,
            }
            for sid, s in report.per_subject.items()
        },
        "aggregates": {k: list(v) for k, v in report.aggregates.items()},
        "hausdorff_undefined": report.hausdorff_undefined,
        "provenance": report.provenance,
    }


def _report_from_dict(data: dict) -> MetricsReport:
    per_subject = {
        sid: SubjectScores(
            dice=s["dice"],
            sensitivity=s["sensitivity"],
            specificity=s["specificity"],
            jaccard=s["jaccard"],
            hausdorff_mm=HausdorffResult(s["hausdorff_mm"], s.get("hausdorff_reason")),
        )
        for sid, s in data["per_subject"].items()
    }
    report = MetricsReport(
        per_subject=per_subject,
        aggregates={k: (v[0], v[1]) for k, v in data["aggregates"].items()},
        hausdorff_undefined=data["hausdorff_undefined"],
        provenance=data.get("provenance", {}),
    )
    return report


def run_loo(exp: ExperimentConfig, verbose: bool = False) -> AblationTable:
    """Run the full leave-one-out ablation described by ``exp``."""
    t_start = time.perf_counter()
    dataset = load_dataset(exp.dataset_root)
    subjects = [volume.subject_id for volume, _ in dataset]
    by_id = {volume.subject_id: (volume, mask) for volume, mask in dataset}
    splits = leave_one_out_splits(subjects)

    out_dir = Path(exp.out_dir) if exp.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    scores: dict[str, dict[str, SubjectScores]] = {m: {} for m in exp.methods}
    failures: dict[str, dict[str, str]] = {m: {} for m in exp.methods}
    checkpoint_ids: dict[str, dict[str, str]] = {m: {} for m in exp.methods}

    for split_index, (train_ids, test_id) in enumerate(splits):
        train_pairs = []
        for sid in train_ids:
            volume, mask = by_id[sid]
            train_pairs.extend(extract_slices(volume, mask))
        test_volume, test_mask = by_id[test_id]

        f_ckpt = None
        for method in exp.methods:
            cfg = method_train_config(exp, method, split_index)
            if verbose:
                print(f"[split {split_index + 1}/{len(splits)}] test={test_id} method={method}", flush=True)
            try:
                if cfg.uses_encoder and f_ckpt is None:
                    train_masks = [p.mask for p in train_pairs]
                    f_ckpt, _, _ = train_cae(train_masks, cfg)
                g_ckpt, _, _ = train_segmenter(train_pairs, f_ckpt if cfg.uses_encoder else None, cfg)
            except TrainingAbort as exc:
                failures[method][test_id] = str(exc)
                continue
            generator = module_from_checkpoint(g_ckpt, expected_role="generator")
            predicted = predict_mask(
                generator,
                test_volume,
                prob_threshold=exp.threshold,
                connectivity=exp.connectivity,
                batch_size=cfg.stage2.batch_size,
            )
            scores[method][test_id] = score_subject(predicted, test_mask)
            checkpoint_ids[method][test_id] = g_ckpt.content_id()
            if out_dir:
                pred_dir = out_dir / "predictions" / method / test_id
                pred_dir.mkdir(parents=True, exist_ok=True)
                save_mask(predicted, pred_dir / MASK_FILENAME)

    provenance = {
        "seed": exp.seed,
        "config_hash": exp.config_hash(),
        "threshold": exp.threshold,
        "connectivity": exp.connectivity,
        "subjects": subjects,
        "methods": list(exp.methods),
    }
    methods = {}
    for method in exp.methods:
        if scores[method]:
            methods[method] = aggregate(
                scores[method],
                provenance={
                    "threshold": exp.threshold,
                    "connectivity": exp.connectivity,
                    "checkpoints": checkpoint_ids[method],
                },
            )
    table = AblationTable(
        methods=methods,
        failures={m: f for m, f in failures.items() if f},
        provenance=provenance,
        timing={"wall_s": time.perf_counter() - t_start},
    )
    if out_dir:
        table.save(out_dir / "ablation.json")
    return table


def evaluate_directories(
    pred_root: Path | str,
    gt_root: Path | str,
    threshold_value: float = 0.5,
    connectivity: int = 26,
) -> MetricsReport:
    """Score externally produced mask volumes against groundtruth masks.

    Both directories must hold one subdirectory per subject containing
    ``mask.vol``; the subject sets must match exactly.
    """
    pred_root, gt_root = Path(pred_root), Path(gt_root)
    for root in (pred_root, gt_root):
        if not root.is_dir():
            raise DataFormatError(f"directory {root} does not exist")
    pred_ids = {p.name for p in pred_root.iterdir() if p.is_dir()}
    gt_ids = {p.name for p in gt_root.iterdir() if p.is_dir()}
    if pred_ids != gt_ids:
        missing = sorted(gt_ids - pred_ids)
        extra = sorted(pred_ids - gt_ids)
        raise DataFormatError(
            f"subject sets differ: missing predictions for {missing}, unexpected predictions {extra}"
        )
    if not gt_ids:
        raise DataFormatError("no subjects found")
    per_subject = {}
    for sid in sorted(gt_ids):
        pred = load_mask(pred_root / sid / MASK_FILENAME)
        gt = load_mask(gt_root / sid / MASK_FILENAME)
        per_subject[sid] = score_subject(pred, gt)
    return aggregate(
        per_subject,
        provenance={"threshold": threshold_value, "connectivity": connectivity},
    )
