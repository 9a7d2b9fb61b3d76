"""Human-readable rendering of an ablation table, plus contour overlays."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from shapeseg.data.volumes import MaskVolume, Volume
from shapeseg.harness.experiment import MASK_FILENAME, AblationTable, load_dataset
from shapeseg.data.io import load_mask
from shapeseg.metrics import METRIC_NAMES

# Lower is better only for the distance metric.
_MINIMIZED = {"hausdorff_mm"}

GT_COLOR = (220, 40, 40)
PRED_COLOR = (40, 200, 60)


def render_table(table: AblationTable, marker: str = "*") -> str:
    """Fixed-width mean±std table with the best value per column marked."""
    methods = list(table.methods)
    best: dict[str, str | None] = {}
    for metric in METRIC_NAMES:
        candidates = {
            m: table.methods[m].mean(metric)
            for m in methods
            if not np.isnan(table.methods[m].mean(metric))
        }
        if not candidates:
            best[metric] = None
        elif metric in _MINIMIZED:
            best[metric] = min(candidates, key=candidates.get)
        else:
            best[metric] = max(candidates, key=candidates.get)

    header = ["method"] + list(METRIC_NAMES)
    rows = [header]
    for m in methods:
        row = [m]
        for metric in METRIC_NAMES:
            mean, std = table.methods[m].aggregates[metric]
            cell = "n/a" if np.isnan(mean) else f"{mean:.2f} ± {std:.2f}"
            if best[metric] == m:
                cell = marker + cell
            row.append(cell)
        rows.append(row)
    for m, subject_failures in table.failures.items():
        rows.append([m] + [f"failed on {len(subject_failures)} subject(s)"] + [""] * (len(METRIC_NAMES) - 1))

    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths))) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_csv(table: AblationTable) -> str:
    lines = ["method," + ",".join(f"{m}_mean,{m}_std" for m in METRIC_NAMES)]
    for name, report in table.methods.items():
        cells = [name]
        for metric in METRIC_NAMES:
            mean, std = report.aggregates[metric]
            cells += [f"{mean:.6f}", f"{std:.6f}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _contour(mask: np.ndarray) -> np.ndarray:
    interior = ndimage.binary_erosion(mask.astype(bool))
    return mask.astype(bool) & ~interior


def overlay_slice(image: np.ndarray, gt: np.ndarray, pred: np.ndarray, upscale: int = 3) -> np.ndarray:
    """RGB overlay: grayscale slice, groundtruth contour red, prediction green."""
    base = np.clip(image, 0.0, 1.0)
    rgb = np.repeat((base * 255).astype(np.uint8)[:, :, None], 3, axis=2)
    rgb[_contour(gt)] = GT_COLOR
    rgb[_contour(pred)] = PRED_COLOR
    if upscale > 1:
        rgb = np.repeat(np.repeat(rgb, upscale, axis=0), upscale, axis=1)
    return rgb


def select_slices(gt: MaskVolume, count: int = 3) -> list[int]:
    """Indices of the slices with the largest groundtruth area, ascending."""
    areas = gt.voxels.reshape(gt.shape[0], -1).sum(axis=1)
    if not areas.any():
        depth = gt.shape[0]
        return sorted({0, depth // 2, depth - 1})[:count]
    ranked = np.argsort(areas)[::-1][:count]
    return sorted(int(i) for i in ranked)


def write_report(
    table: AblationTable,
    dataset_root: Path | str,
    predictions_root: Path | str | None,
    out_dir: Path | str,
    slices_per_subject: int = 3,
) -> dict[str, list[str]]:
    """Write the text/CSV tables and per-subject contour overlays.

    Returns the written file paths keyed by artifact kind. Overlays require
    the prediction volumes saved by the experiment runner.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = render_table(table)
    (out_dir / "table.txt").write_text(text + "\n", encoding="utf-8")
    (out_dir / "table.csv").write_text(render_csv(table), encoding="utf-8")
    written: dict[str, list[str]] = {
        "table": [str(out_dir / "table.txt"), str(out_dir / "table.csv")],
        "overlays": [],
    }
    if predictions_root is None:
        return written

    dataset = {v.subject_id: (v, m) for v, m in load_dataset(dataset_root)}
    predictions_root = Path(predictions_root)
    for method, report in table.methods.items():
        for sid in report.per_subject:
            pred_path = predictions_root / method / sid / MASK_FILENAME
            if not pred_path.exists():
                continue
            volume, gt = dataset[sid]
            pred = load_mask(pred_path)
            for k in select_slices(gt, slices_per_subject):
                rgb = overlay_slice(volume.voxels[k], gt.voxels[k], pred.voxels[k])
                path = out_dir / "overlays" / method / f"{sid}_z{k:03d}.png"
                path.parent.mkdir(parents=True, exist_ok=True)
                Image.fromarray(rgb).save(path)
                written["overlays"].append(str(path))
    return written
