"""Non-learned reference predictors that run through class space."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .discretization import IGNORE, DiscretizationScheme, dequantize_map, quantize_map, representatives
from .depthio import DepthMap
from .errors import ConfigurationError, DataError


@dataclass(frozen=True)
class RoundTrip:
    """Quantize the ground truth and dequantize it again: a perfect K-class classifier."""


@dataclass(frozen=True)
class Constant:
    depth: float


@dataclass(frozen=True, eq=False)
class RowPrior:
    """Per-row class table; ``table[r]`` is the class predicted for every pixel of row ``r``."""

    table: np.ndarray | None = None

    def __post_init__(self):
        if self.table is None:
            return
        table = np.array(self.table, dtype=np.int64)
        if table.ndim != 1:
            raise ConfigurationError("row-prior table must be one-dimensional")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __eq__(self, other):
        if not isinstance(other, RowPrior):
            return NotImplemented
        if self.table is None or other.table is None:
            return self.table is other.table
        return np.array_equal(self.table, other.table)

    __hash__ = None


def predict_roundtrip(gt: DepthMap, scheme) -> DepthMap:
    return dequantize_map(quantize_map(gt, scheme), scheme)


def _check_table(table, scheme):
    bad = (table != IGNORE) & ((table < 0) | (table >= scheme.num_classes))
    if np.any(bad):
        row = int(np.flatnonzero(bad)[0])
        raise ConfigurationError(f"row-prior entry {int(table[row])} at row {row} is not a class of the scheme")


def class_histograms(class_maps, scheme) -> np.ndarray:
    """Count labels per ``(row, class)`` over a sequence of equally tall class maps."""
    counts = None
    for labels in class_maps:
        labels = np.asarray(labels)
        height = labels.shape[0]
        if counts is None:
            counts = np.zeros((height, scheme.num_classes), dtype=np.int64)
        elif counts.shape[0] != height:
            raise ConfigurationError(f"training maps have inconsistent heights ({counts.shape[0]} vs {height})")
        rows, cols = np.nonzero(labels != IGNORE)
        flat = rows * scheme.num_classes + labels[rows, cols].astype(np.int64)
        counts += np.bincount(flat, minlength=counts.size).reshape(counts.shape)
    if counts is None:
        raise ConfigurationError("row prior needs at least one training map")
    return counts


def row_prior_from_histograms(counts) -> RowPrior:
    # argmax returns the first maximum, i.e. ties go to the smaller class
    table = np.argmax(counts, axis=1)
    table[counts.sum(axis=1) == 0] = IGNORE
    return RowPrior(table)


def fit_row_prior_maps(depth_maps, scheme) -> RowPrior:
    """Modal quantized class of each image row across ``depth_maps``."""
    return row_prior_from_histograms(class_histograms((quantize_map(m, scheme) for m in depth_maps), scheme))


def fit_row_prior(training_manifest, scheme=None) -> RowPrior:
    """Fit a row prior from the ground-truth side of a manifest (cropped as configured)."""
    from .harness import load_gt

    if not training_manifest.entries:
        raise ConfigurationError("training manifest is empty")
    scheme = scheme or training_manifest.scheme
    return fit_row_prior_maps((load_gt(training_manifest, e) for e in training_manifest.entries), scheme)


def predict(kind, input_shape, scheme, gt: DepthMap | None = None) -> DepthMap:
    height, width = input_shape
    if height <= 0 or width <= 0:
        raise ConfigurationError(f"prediction shape must be positive, got {input_shape}")
    if isinstance(kind, RoundTrip):
        if gt is None:
            raise ConfigurationError("round-trip prediction needs the ground-truth map")
        if gt.shape != (height, width):
            raise DataError(f"ground truth shape {gt.shape} does not match requested shape {input_shape}")
        return predict_roundtrip(gt, scheme)
    if isinstance(kind, Constant):
        if not 0 < kind.depth <= scheme.beta:
            raise ConfigurationError(f"constant depth must lie in (0, {scheme.beta}], got {kind.depth}")
        return DepthMap(np.full((height, width), float(kind.depth)), np.ones((height, width), dtype=bool))
    if isinstance(kind, RowPrior):
        if kind.table is None:
            raise ConfigurationError("row-prior baseline needs a fitted table")
        if kind.table.shape[0] != height:
            raise ConfigurationError(f"row prior has {kind.table.shape[0]} rows, image has {height}")
        _check_table(kind.table, scheme)
        labels = np.repeat(kind.table[:, None], width, axis=1)
        return dequantize_map(labels, scheme)
    raise ConfigurationError(f"unknown baseline kind {kind!r}")


def save_row_prior(prior: RowPrior, path):
    if prior.table is None:
        raise ConfigurationError("cannot save an unfitted row prior")
    Path(path).write_text("".join(f"{int(v)}\n" for v in prior.table))


def load_row_prior(path) -> RowPrior:
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.strip()
        if not text:
            continue
        if text.upper() == "IGNORE":
            values.append(IGNORE)
            continue
        try:
            values.append(int(text))
        except ValueError:
            raise ConfigurationError(f"{path}:{lineno}: expected a class index, got {text!r}") from None
    return RowPrior(np.array(values, dtype=np.int64))


def constant_for_scheme(scheme) -> Constant:
    """Constant at the single-bin representative of the scheme's range."""
    single = DiscretizationScheme(scheme.mode, scheme.alpha, scheme.beta, 1)
    return Constant(float(representatives(single)[0]))

