"""Volumetric evaluation scores.

Overlap scores (dice, sensitivity, specificity, jaccard) are reported in
percent from exact voxel confusion counts. The Hausdorff distance is the
symmetric max-min Euclidean distance between foreground voxel centers in
millimeters, honoring anisotropic spacing. When either foreground set is
empty the distance is undefined and carries a reason instead of a value;
undefined entries are excluded from aggregates but counted.

Degenerate-denominator conventions: if both volumes are empty, dice, jaccard
and sensitivity are 100 (perfect agreement); if only the groundtruth is
empty they are 0. Specificity is 100 when no negative voxels exist.
Aggregation uses the population (N) standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from shapeseg.data.volumes import MaskVolume


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(pred: MaskVolume, gt: MaskVolume) -> ConfusionCounts:
    """Exact voxel counts of true/false positives/negatives."""
    if pred.shape != gt.shape:
        raise ValueError(f"prediction shape {pred.shape} != groundtruth shape {gt.shape}")
    p = pred.voxels.astype(bool)
    g = gt.voxels.astype(bool)
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & g)),
        fp=int(np.count_nonzero(p & ~g)),
        tn=int(np.count_nonzero(~p & ~g)),
        fn=int(np.count_nonzero(~p & g)),
    )


def _gt_empty_convention(c: ConfusionCounts) -> float:
    return 100.0 if c.fp == 0 else 0.0


def dice_score(c: ConfusionCounts) -> float:
    """2*TP / (2*TP + FP + FN), in percent."""
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return 100.0
    if c.tp + c.fn == 0:
        return _gt_empty_convention(c)
    return 100.0 * 2 * c.tp / denom


def jaccard(c: ConfusionCounts) -> float:
    """TP / (TP + FP + FN), in percent."""
    denom = c.tp + c.fp + c.fn
    if denom == 0:
        return 100.0
    if c.tp + c.fn == 0:
        return _gt_empty_convention(c)
    return 100.0 * c.tp / denom


def sensitivity(c: ConfusionCounts) -> float:
    """TP / (TP + FN), in percent."""
    if c.tp + c.fn == 0:
        return _gt_empty_convention(c)
    return 100.0 * c.tp / (c.tp + c.fn)


def specificity(c: ConfusionCounts) -> float:
    """TN / (TN + FP), in percent."""
    if c.tn + c.fp == 0:
        return 100.0
    return 100.0 * c.tn / (c.tn + c.fp)


@dataclass(frozen=True)
class HausdorffResult:
    value_mm: float | None
    reason: str | None = None

    @property
    def defined(self) -> bool:
        return self.value_mm is not None


def hausdorff(a: MaskVolume, b: MaskVolume, spacing: tuple[float, float, float] | None = None) -> HausdorffResult:
    """Symmetric Hausdorff distance between foreground voxel sets, in mm.

    ``spacing`` defaults to the spacing stored on ``a``; both volumes are
    assumed to live on the same grid.
    """
    if a.shape != b.shape:
        raise ValueError(f"volume shapes differ: {a.shape} vs {b.shape}")
    if spacing is None:
        spacing = a.spacing
    scale = np.asarray(spacing, dtype=np.float64)
    pts_a = np.argwhere(a.voxels).astype(np.float64) * scale
    pts_b = np.argwhere(b.voxels).astype(np.float64) * scale
    if len(pts_a) == 0 and len(pts_b) == 0:
        return HausdorffResult(None, reason="both volumes empty")
    if len(pts_a) == 0:
        return HausdorffResult(None, reason="first volume empty")
    if len(pts_b) == 0:
        return HausdorffResult(None, reason="second volume empty")
    d_ab = cKDTree(pts_b).query(pts_a)[0].max()
    d_ba = cKDTree(pts_a).query(pts_b)[0].max()
    return HausdorffResult(float(max(d_ab, d_ba)))


METRIC_NAMES = ("dice", "sensitivity", "specificity", "jaccard", "hausdorff_mm")


@dataclass(frozen=True)
class SubjectScores:
    dice: float
    sensitivity: float
    specificity: float
    jaccard: float
    hausdorff_mm: HausdorffResult

    def value(self, metric: str) -> float | None:
        if metric == "hausdorff_mm":
            return self.hausdorff_mm.value_mm
        return getattr(self, metric)


def score_subject(pred: MaskVolume, gt: MaskVolume) -> SubjectScores:
    c = confusion(pred, gt)
    return SubjectScores(
        dice=dice_score(c),
        sensitivity=sensitivity(c),
        specificity=specificity(c),
        jaccard=jaccard(c),
        hausdorff_mm=hausdorff(pred, gt, gt.spacing),
    )


@dataclass
class MetricsReport:
    per_subject: dict[str, SubjectScores]
    aggregates: dict[str, tuple[float, float]]
    hausdorff_undefined: int
    provenance: dict = field(default_factory=dict)

    def mean(self, metric: str) -> float:
        return self.aggregates[metric][0]

    def std(self, metric: str) -> float:
        return self.aggregates[metric][1]


def aggregate(per_subject: dict[str, SubjectScores], provenance: dict | None = None) -> MetricsReport:
    """Mean and population standard deviation per metric over subjects.

    Subjects with an undefined Hausdorff distance are left out of the
    Hausdorff aggregate; their number is reported.
    """
    if not per_subject:
        raise ValueError("aggregate requires at least one subject")
    aggregates: dict[str, tuple[float, float]] = {}
    undefined = 0
    for metric in METRIC_NAMES:
        values = [s.value(metric) for s in per_subject.values()]
        defined = [v for v in values if v is not None]
        if metric == "hausdorff_mm":
            undefined = len(values) - len(defined)
        if defined:
            arr = np.asarray(defined, dtype=np.float64)
            aggregates[metric] = (float(arr.mean()), float(arr.std()))
        else:
            aggregates[metric] = (float("nan"), float("nan"))
    return MetricsReport(
        per_subject=dict(per_subject),
        aggregates=aggregates,
        hausdorff_undefined=undefined,
        provenance=dict(provenance or {}),
    )
