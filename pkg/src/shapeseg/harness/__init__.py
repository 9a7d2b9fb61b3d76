"""Experiment harness: CLI, leave-one-out ablation, reporting, benchmark pin."""

from shapeseg.harness.benchmark import (
    CLINICAL_REFERENCE,
    scapula_like_v1,
    scapula_like_v1_experiment,
    scapula_like_v1_train_config,
)
from shapeseg.harness.experiment import (
    AblationTable,
    ExperimentConfig,
    evaluate_directories,
    load_dataset,
    method_train_config,
    run_loo,
    tables_match,
    write_dataset,
)
from shapeseg.harness.report import render_table, select_slices, write_report

__all__ = [
    "AblationTable",
    "CLINICAL_REFERENCE",
    "ExperimentConfig",
    "evaluate_directories",
    "load_dataset",
    "method_train_config",
    "render_table",
    "run_loo",
    "scapula_like_v1",
    "scapula_like_v1_experiment",
    "scapula_like_v1_train_config",
    "select_slices",
    "tables_match",
    "write_dataset",
    "write_report",
]
