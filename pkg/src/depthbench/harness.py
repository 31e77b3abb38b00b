"""Manifest-driven batch evaluation.

A manifest is a text file with one entry per line, ``gt_path<TAB>pred_path``.
Relative paths resolve against the manifest's directory; blank lines and
lines starting with ``#`` are skipped. Baseline runs only need the first
column.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import baseline as baselines
from .config import EvalConfig, config_to_text
from .depthio import DepthMap, apply_crop, colorize, crop_array, load_class_map, load_depth_u16, save_depth_u16, save_rgb
from .discretization import dequantize_map
from .errors import ConfigurationError, DepthBenchError, EvaluationError
from .metrics import MetricReport, aggregate, compute_metrics, format_table_row

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2
EXIT_ERROR = 3
EXIT_TOTAL_FAILURE = 4


@dataclass(frozen=True)
class ManifestEntry:
    gt: Path
    pred: Path | None = None


@dataclass(frozen=True)
class EvalManifest:
    entries: tuple
    config: EvalConfig
    source: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ConfigurationError("manifest has no entries")
        for i, entry in enumerate(self.entries):
            if entry.pred is not None and Path(entry.gt) == Path(entry.pred):
                raise ConfigurationError(f"manifest entry {i}: ground truth and prediction are the same path")

    @property
    def scheme(self):
        return self.config.scheme

    @property
    def policy(self):
        return self.config.policy

    @property
    def crop(self):
        return self.config.crop

    @property
    def aggregation(self):
        return self.config.aggregation


def read_manifest(path) -> list:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"manifest {path} does not exist")
    base = path.parent
    entries = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = [c.strip() for c in line.split("\t")]
        if len(cols) > 2 or not cols[0]:
            raise ConfigurationError(f"{path}:{lineno}: expected 'gt_path<TAB>pred_path'")
        gt = base / cols[0]
        pred = base / cols[1] if len(cols) == 2 and cols[1] else None
        entries.append(ManifestEntry(gt, pred))
    return entries


def load_manifest(path, config: EvalConfig) -> EvalManifest:
    return EvalManifest(read_manifest(path), config, source=str(path))


def write_manifest(entries, path):
    """Write entries as a TSV manifest with paths relative to the manifest's directory."""
    path = Path(path)
    base = path.parent.resolve()
    lines = []
    for entry in entries:
        cols = [os.path.relpath(Path(entry.gt).resolve(), base)]
        if entry.pred is not None:
            cols.append(os.path.relpath(Path(entry.pred).resolve(), base))
        lines.append("\t".join(cols))
    path.write_text("\n".join(lines) + "\n")


def load_gt(manifest: EvalManifest, entry: ManifestEntry) -> DepthMap:
    cfg = manifest.config
    gt = load_depth_u16(entry.gt, cfg.scale_divisor, cfg.zero_is_invalid)
    return apply_crop(gt, cfg.crop)


def load_pred(manifest: EvalManifest, entry: ManifestEntry) -> DepthMap:
    cfg = manifest.config
    if entry.pred is None:
        raise ConfigurationError(f"entry for {entry.gt} has no prediction path")
    if cfg.prediction_format == "classes":
        return dequantize_map(crop_array(load_class_map(entry.pred), cfg.crop), cfg.scheme)
    pred = load_depth_u16(entry.pred, cfg.scale_divisor, zero_is_invalid=True)
    return apply_crop(pred, cfg.crop)


@dataclass(frozen=True)
class ImageResult:
    entry_id: int
    gt: str
    pred: str | None
    report: MetricReport

    def to_dict(self):
        return {"id": self.entry_id, "gt": self.gt, "pred": self.pred, "metrics": self.report.to_dict()}


@dataclass(frozen=True)
class Failure:
    entry_id: int
    gt: str
    error: str

    def to_dict(self):
        return {"id": self.entry_id, "gt": self.gt, "error": self.error}


@dataclass
class EvalRun:
    per_image: list
    aggregate: MetricReport | None
    config_echo: dict
    failures: list = field(default_factory=list)

    @property
    def exit_status(self):
        if not self.per_image:
            return EXIT_TOTAL_FAILURE
        return EXIT_PARTIAL if self.failures else EXIT_OK

    def to_dict(self, generated_at=None):
        out = {
            "config": self.config_echo,
            "per_image": [r.to_dict() for r in self.per_image],
            "aggregate": None if self.aggregate is None else self.aggregate.to_dict(),
            "failures": [f.to_dict() for f in self.failures],
        }
        if generated_at is not None:
            out["generated_at"] = generated_at
        return out

    def to_json(self, generated_at=None, indent=2):
        return json.dumps(self.to_dict(generated_at), indent=indent, sort_keys=True) + "\n"

    def format_table(self, label="Aggregate", per_image=False):
        width = max([len(label)] + ([len(Path(r.gt).name) for r in self.per_image] if per_image else []))
        lines = []
        if per_image:
            lines += [format_table_row(Path(r.gt).name.ljust(width), r.report) for r in self.per_image]
        if self.aggregate is not None:
            lines.append(format_table_row(label.ljust(width), self.aggregate))
        return "\n".join(lines) + "\n"


def _config_echo(manifest: EvalManifest, **extra):
    echo = manifest.config.to_dict()
    echo["manifest"] = manifest.source
    echo["entries"] = len(manifest.entries)
    echo.update(extra)
    return echo


def _collect(manifest, outcomes, echo):
    per_image, failures = [], []
    for i, (entry, outcome) in enumerate(zip(manifest.entries, outcomes)):
        if isinstance(outcome, str):
            failures.append(Failure(i, str(entry.gt), outcome))
        else:
            report, pred_path = outcome
            per_image.append(ImageResult(i, str(entry.gt), pred_path, report))
    if not per_image:
        raise EvaluationError(
            f"all {len(failures)} manifest entries failed", failures=[f.to_dict() for f in failures]
        )
    agg = aggregate([r.report for r in per_image], manifest.aggregation)
    return EvalRun(per_image, agg, echo, failures)


def _guarded(fn, index, entry):
    try:
        return fn(index, entry)
    except (DepthBenchError, OSError) as exc:
        log.warning("entry %d (%s) failed: %s", index, entry.gt, exc)
        return f"{type(exc).__name__}: {exc}"


def _map_entries(fn, manifest, jobs):
    jobs = max(1, int(jobs or 1))
    indexed = list(enumerate(manifest.entries))
    if jobs == 1:
        return [_guarded(fn, i, e) for i, e in indexed]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda item: _guarded(fn, *item), indexed))


def evaluate_entry(manifest: EvalManifest, entry: ManifestEntry) -> MetricReport:
    gt = load_gt(manifest, entry)
    pred = load_pred(manifest, entry)
    return compute_metrics(pred, gt, manifest.policy, manifest.config.thresholds)


def run_eval(manifest: EvalManifest, jobs=1) -> EvalRun:
    """Evaluate every entry; unreadable or mismatched entries become failures."""

    def work(_, entry):
        return evaluate_entry(manifest, entry), str(entry.pred)

    outcomes = _map_entries(work, manifest, jobs)
    return _collect(manifest, outcomes, _config_echo(manifest, mode="eval"))


def baseline_name(kind):
    if isinstance(kind, baselines.RoundTrip):
        return "round-trip"
    if isinstance(kind, baselines.Constant):
        return f"constant({kind.depth!r})"
    if isinstance(kind, baselines.RowPrior):
        return "row-prior"
    raise ConfigurationError(f"unknown baseline kind {kind!r}")


def run_baseline_eval(manifest: EvalManifest, kind, output_dir=None, jobs=1, figures=False) -> EvalRun:
    """Predict with a baseline from each ground-truth map and score the result.

    With ``output_dir``, each prediction is written as a 16-bit depth PNG
    plus a colorized PNG (and a comparison figure when ``figures`` is set).
    """
    if isinstance(kind, baselines.RowPrior) and kind.table is None:
        raise ConfigurationError("row-prior baseline needs a fitted table")
    name = baseline_name(kind)
    cfg = manifest.config
    out = None if output_dir is None else Path(output_dir)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    def work(idx, entry):
        gt = load_gt(manifest, entry)
        pred = baselines.predict(kind, gt.shape, cfg.scheme, gt=gt)
        report = compute_metrics(pred, gt, cfg.policy, cfg.thresholds)
        if out is not None:
            stem = f"{idx:04d}_{Path(entry.gt).stem}"
            pred_path = out / f"{stem}_pred.png"
            save_depth_u16(pred, pred_path, cfg.scale_divisor)
            save_rgb(colorize(pred, cfg.scheme), out / f"{stem}_color.png")
            if figures:
                from .report import render_comparison

                render_comparison(gt, pred, cfg.scheme, out / f"{stem}_panel.png", title=f"{name}: {Path(entry.gt).name}")
            return report, str(pred_path)
        return report, None

    outcomes = _map_entries(work, manifest, jobs)
    return _collect(manifest, outcomes, _config_echo(manifest, mode="baseline", baseline=name))


def save_resolved_config(config: EvalConfig, path):
    Path(path).write_text(config_to_text(config))
