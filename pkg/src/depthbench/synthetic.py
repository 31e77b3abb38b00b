"""Synthetic KITTI-like depth maps for smoke tests and demos."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .depthio import DepthMap, save_depth_u16
from .harness import ManifestEntry, write_manifest


def road_scene(rng, shape=(48, 96), min_depth=1.0, max_depth=80.0, holes=0.3, divisor=256.0):
    """Depth growing toward the horizon with random per-pixel jitter and sparse holes.

    Values are snapped to multiples of ``1/divisor`` so they survive 16-bit
    encoding unchanged.
    """
    height, width = shape
    rows = np.linspace(1.0, 0.0, height)[:, None]
    log_depth = np.log(min_depth) + (np.log(max_depth) - np.log(min_depth)) * rows
    log_depth = log_depth + rng.normal(0.0, 0.15, size=shape)
    depth = np.clip(np.exp(log_depth), min_depth, max_depth)
    depth = np.clip(np.round(depth * divisor) / divisor, min_depth, max_depth)
    valid = rng.random(shape) >= holes
    return DepthMap(np.where(valid, depth, 0.0), valid)


def write_dataset(directory, count=20, shape=(48, 96), seed=0, divisor=256.0, with_predictions=False):
    """Write ``count`` ground-truth PNGs (and copies as predictions) plus ``manifest.tsv``."""
    directory = Path(directory)
    (directory / "gt").mkdir(parents=True, exist_ok=True)
    if with_predictions:
        (directory / "pred").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(count):
        depth = road_scene(rng, shape, divisor=divisor)
        gt_path = directory / "gt" / f"{i:04d}.png"
        save_depth_u16(depth, gt_path, divisor)
        pred_path = None
        if with_predictions:
            pred_path = directory / "pred" / f"{i:04d}.png"
            save_depth_u16(depth, pred_path, divisor)
        entries.append(ManifestEntry(gt_path, pred_path))
    manifest = directory / "manifest.tsv"
    write_manifest(entries, manifest)
    return manifest
