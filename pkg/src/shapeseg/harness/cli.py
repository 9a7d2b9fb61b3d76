"""Command-line interface.

Subcommands: gen-data, train-cae, train-seg, evaluate, loo, report.
Exit codes: 0 success, 1 usage error, 2 data/config error, 3 training abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from shapeseg.data.splits import leave_one_out_splits
from shapeseg.data.synthetic import SyntheticConfig, generate_synthetic_dataset
from shapeseg.data.volumes import extract_slices
from shapeseg.exceptions import (
    CheckpointError,
    ConfigurationError,
    DataFormatError,
    TrainingAbort,
    UsageError,
)
from shapeseg.harness import benchmark
from shapeseg.harness.experiment import (
    AblationTable,
    ExperimentConfig,
    evaluate_directories,
    load_dataset,
    run_loo,
    write_dataset,
)
from shapeseg.harness.report import render_table, write_report
from shapeseg.networks.checkpoint import load_checkpoint, save_checkpoint
from shapeseg.trainer.config import TrainConfig
from shapeseg.trainer.loops import train_cae, train_segmenter

BENCHMARKS = {"scapula-like-v1": benchmark.scapula_like_v1}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise UsageError(message)


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"config file {p} does not exist")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"config file {p} is not valid JSON: {exc}") from exc


def _synthetic_config(args) -> SyntheticConfig:
    if args.benchmark:
        if args.benchmark not in BENCHMARKS:
            raise UsageError(f"unknown benchmark {args.benchmark!r}, available: {sorted(BENCHMARKS)}")
        cfg = BENCHMARKS[args.benchmark]()
    elif args.config:
        cfg = SyntheticConfig.from_dict(_load_json(args.config))
    else:
        raise UsageError("gen-data needs --config or --benchmark")
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _cmd_gen_data(args) -> int:
    cfg = _synthetic_config(args)
    pairs = generate_synthetic_dataset(cfg)
    write_dataset(args.out, pairs)
    manifest = {"n_subjects": cfg.n_subjects, "config": cfg.to_dict()}
    Path(args.out, "dataset.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(pairs)} subjects to {args.out}")
    return 0


def _train_config(args) -> TrainConfig:
    cfg = TrainConfig.from_dict(_load_json(args.config)) if args.config else TrainConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _training_slices(args):
    dataset = load_dataset(args.data)
    if args.subjects:
        wanted = set(args.subjects.split(","))
        available = {v.subject_id for v, _ in dataset}
        missing = sorted(wanted - available)
        if missing:
            raise DataFormatError(f"requested subjects not in dataset: {missing}")
        dataset = [(v, m) for v, m in dataset if v.subject_id in wanted]
    pairs = []
    for volume, mask in dataset:
        pairs.extend(extract_slices(volume, mask))
    return pairs


def _cmd_train_cae(args) -> int:
    cfg = _train_config(args)
    pairs = _training_slices(args)
    f_ckpt, g_ckpt, log = train_cae([p.mask for p in pairs], cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(f_ckpt, out / "encoder.ckpt")
    save_checkpoint(g_ckpt, out / "decoder.ckpt")
    log.checkpoint_paths = {"encoder": str(out / "encoder.ckpt"), "decoder": str(out / "decoder.ckpt")}
    log.to_jsonl(out / "train_cae.jsonl")
    print(f"final reconstruction loss {log.epoch_means(1)[-1]:.4f}; checkpoints in {out}")
    return 0


def _cmd_train_seg(args) -> int:
    cfg = _train_config(args)
    if args.ablation:
        cfg = cfg.with_ablation(args.ablation)
    pairs = _training_slices(args)
    f_ckpt = load_checkpoint(args.cae) if args.cae else None
    g_ckpt, d_ckpt, log = train_segmenter(pairs, f_ckpt, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(g_ckpt, out / "generator.ckpt")
    log.checkpoint_paths["generator"] = str(out / "generator.ckpt")
    if d_ckpt is not None:
        save_checkpoint(d_ckpt, out / "discriminator.ckpt")
        log.checkpoint_paths["discriminator"] = str(out / "discriminator.ckpt")
    log.to_jsonl(out / "train_seg.jsonl")
    print(f"final generator loss {log.epoch_means(2)[-1]:.4f}; checkpoints in {out}")
    return 0


def _cmd_evaluate(args) -> int:
    report = evaluate_directories(args.pred, args.gt, args.threshold, args.connectivity)
    lines = []
    for sid, s in sorted(report.per_subject.items()):
        hd = f"{s.hausdorff_mm.value_mm:.2f}" if s.hausdorff_mm.defined else f"undefined ({s.hausdorff_mm.reason})"
        lines.append(
            f"{sid}: dice {s.dice:.2f}  sens {s.sensitivity:.2f}  spec {s.specificity:.2f}  "
            f"jaccard {s.jaccard:.2f}  hausdorff {hd}"
        )
    for metric, (mean, std) in report.aggregates.items():
        lines.append(f"mean {metric}: {mean:.2f} ± {std:.2f}")
    if report.hausdorff_undefined:
        lines.append(f"hausdorff undefined for {report.hausdorff_undefined} subject(s)")
    text = "\n".join(lines)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "evaluation.txt").write_text(text + "\n", encoding="utf-8")
    return 0


def _cmd_loo(args) -> int:
    if args.benchmark:
        if args.benchmark not in BENCHMARKS:
            raise UsageError(f"unknown benchmark {args.benchmark!r}, available: {sorted(BENCHMARKS)}")
        if not args.data:
            raise UsageError("loo --benchmark needs --data pointing at the generated dataset")
        exp = benchmark.scapula_like_v1_experiment(args.data, args.out)
    elif args.config:
        exp = ExperimentConfig.from_dict(_load_json(args.config))
        if args.out:
            exp = replace(exp, out_dir=args.out)
        if args.data:
            exp = replace(exp, dataset_root=args.data)
    else:
        raise UsageError("loo needs --config or --benchmark")
    if args.seed is not None:
        exp = replace(exp, seed=args.seed)
    # fail early on an unreadable dataset before hours of training
    dataset = load_dataset(exp.dataset_root)
    leave_one_out_splits([v.subject_id for v, _ in dataset])
    table = run_loo(exp, verbose=not args.quiet)
    print(render_table(table))
    if exp.out_dir:
        print(f"table written to {Path(exp.out_dir) / 'ablation.json'}")
    return 0


def _cmd_report(args) -> int:
    table = AblationTable.load(args.table)
    predictions = args.predictions
    if predictions is None:
        default_pred = Path(args.table).parent / "predictions"
        predictions = str(default_pred) if default_pred.is_dir() else None
    written = write_report(table, args.data, predictions, args.out, args.slices)
    print(render_table(table))
    print(f"wrote {len(written['overlays'])} overlay image(s) under {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shapeseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    p.add_argument("--config", help="JSON file with dataset settings")
    p.add_argument("--benchmark", help="named pinned dataset (e.g. scapula-like-v1)")
    p.add_argument("--out", required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train-cae", help="stage 1: fit the shape auto-encoder")
    p.add_argument("--data", required=True, help="dataset root")
    p.add_argument("--config", help="JSON training config")
    p.add_argument("--out", required=True, help="output directory for checkpoints")
    p.add_argument("--subjects", help="comma-separated subject ids (default: all)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_train_cae)

    p = sub.add_parser("train-seg", help="stage 2: train the segmentation network")
    p.add_argument("--data", required=True, help="dataset root")
    p.add_argument("--config", help="JSON training config")
    p.add_argument("--out", required=True, help="output directory for checkpoints")
    p.add_argument("--cae", help="encoder checkpoint from train-cae")
    p.add_argument("--ablation", choices=("unet", "cae_unet", "cgan_unet", "full"))
    p.add_argument("--subjects", help="comma-separated subject ids (default: all)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_train_seg)

    p = sub.add_parser("evaluate", help="score predicted masks against groundtruth")
    p.add_argument("--pred", required=True, help="directory of predicted masks")
    p.add_argument("--gt", required=True, help="directory of groundtruth masks")
    p.add_argument("--out", help="optional output directory")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--connectivity", type=int, choices=(6, 18, 26), default=26)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("loo", help="leave-one-out ablation over the training variants")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--benchmark", help="named pinned experiment (e.g. scapula-like-v1)")
    p.add_argument("--data", help="dataset root (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_loo)

    p = sub.add_parser("report", help="render an ablation table and contour overlays")
    p.add_argument("--table", required=True, help="ablation.json from a loo run")
    p.add_argument("--data", required=True, help="dataset root")
    p.add_argument("--predictions", help="predictions directory (default: next to the table)")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--slices", type=int, default=3, help="overlay slices per subject")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigurationError, DataFormatError, CheckpointError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingAbort as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
