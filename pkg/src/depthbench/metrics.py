"""Monocular depth metrics: absRel, RMSE, RMSE(log), scale-aligned log error, delta accuracy."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigurationError, DataError, EvaluationError

DEFAULT_THRESHOLDS = (1.25, 1.25**2, 1.25**3)

TABLE_COLUMNS = ("d1", "d2", "d3", "AbsRel", "RMSE", "RMSE_log")


@dataclass(frozen=True)
class MaskPolicy:
    """Which ground-truth depths are scored and whether predictions are clamped."""

    min_depth: float = 1e-3
    max_depth: float = 80.0
    clamp_predictions: bool = True

    def __post_init__(self):
        if not 0 < self.min_depth < self.max_depth:
            raise ConfigurationError(
                f"mask policy needs 0 < min_depth < max_depth, got {self.min_depth}, {self.max_depth}"
            )

    def to_dict(self):
        return {
            "min_depth": self.min_depth,
            "max_depth": self.max_depth,
            "clamp_predictions": self.clamp_predictions,
        }


@dataclass(frozen=True)
class MetricSums:
    """Per-pixel sums from which every metric can be recomputed.

    Merging with ``+`` is associative and commutative, so per-image sums
    can be pooled in any order.
    """

    count: int = 0
    abs_rel: float = 0.0
    sq_err: float = 0.0
    log_diff: float = 0.0
    log_diff_sq: float = 0.0
    hits: tuple = (0, 0, 0)

    def __add__(self, other):
        return MetricSums(
            self.count + other.count,
            self.abs_rel + other.abs_rel,
            self.sq_err + other.sq_err,
            self.log_diff + other.log_diff,
            self.log_diff_sq + other.log_diff_sq,
            tuple(a + b for a, b in zip(self.hits, other.hits)),
        )

    def to_report(self):
        if self.count <= 0:
            raise EvaluationError("cannot build a metric report from zero pixels")
        n = self.count
        mean_log = self.log_diff / n
        mean_log_sq = self.log_diff_sq / n
        return MetricReport(
            abs_rel=self.abs_rel / n,
            rmse=math.sqrt(self.sq_err / n),
            rmse_log=math.sqrt(mean_log_sq),
            silog_sq=max(mean_log_sq - mean_log * mean_log, 0.0),
            delta1=self.hits[0] / n,
            delta2=self.hits[1] / n,
            delta3=self.hits[2] / n,
            valid_pixels=n,
            sums=self,
        )

    def to_dict(self):
        return {
            "count": self.count,
            "abs_rel": self.abs_rel,
            "sq_err": self.sq_err,
            "log_diff": self.log_diff,
            "log_diff_sq": self.log_diff_sq,
            "hits": list(self.hits),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            int(data["count"]),
            float(data["abs_rel"]),
            float(data["sq_err"]),
            float(data["log_diff"]),
            float(data["log_diff_sq"]),
            tuple(int(h) for h in data["hits"]),
        )


@dataclass(frozen=True)
class MetricReport:
    abs_rel: float
    rmse: float
    rmse_log: float
    silog_sq: float
    delta1: float
    delta2: float
    delta3: float
    valid_pixels: int
    sums: MetricSums | None = field(default=None, compare=False, repr=False)

    def to_dict(self, include_sums=True):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "sums"}
        if include_sums and self.sums is not None:
            out["sums"] = self.sums.to_dict()
        return out

    @classmethod
    def from_dict(cls, data):
        sums = MetricSums.from_dict(data["sums"]) if data.get("sums") else None
        return cls(
            abs_rel=float(data["abs_rel"]),
            rmse=float(data["rmse"]),
            rmse_log=float(data["rmse_log"]),
            silog_sq=float(data["silog_sq"]),
            delta1=float(data["delta1"]),
            delta2=float(data["delta2"]),
            delta3=float(data["delta3"]),
            valid_pixels=int(data["valid_pixels"]),
            sums=sums,
        )

    def table_values(self):
        return (self.delta1, self.delta2, self.delta3, self.abs_rel, self.rmse, self.rmse_log)


class Aggregation(str, enum.Enum):
    PER_IMAGE_MEAN = "per-image-mean"
    PIXEL_POOLED = "pixel-pooled"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("_", "-")
        try:
            return cls(text)
        except ValueError:
            raise ConfigurationError(
                f"unknown aggregation {value!r} (expected per-image-mean or pixel-pooled)"
            ) from None


def evaluation_pairs(pred, gt, policy: MaskPolicy):
    """Return the scored ``(pred, gt)`` depth vectors after masking and clamping."""
    if pred.shape != gt.shape:
        raise DataError(f"prediction shape {pred.shape} does not match ground truth shape {gt.shape}")
    mask = gt.valid & pred.valid & (gt.values >= policy.min_depth) & (gt.values <= policy.max_depth)
    d = gt.values[mask]
    d_hat = pred.values[mask]
    if d.size == 0:
        raise EvaluationError("no pixels left to evaluate after masking")
    if policy.clamp_predictions:
        d_hat = np.clip(d_hat, policy.min_depth, policy.max_depth)
    elif np.any(~(d_hat > 0)):
        raise DataError("prediction has non-positive depths on evaluated pixels and clamping is off")
    return d_hat, d


def _check_thresholds(thresholds):
    thresholds = tuple(float(t) for t in thresholds)
    if len(thresholds) != 3:
        raise ConfigurationError(f"expected three delta thresholds, got {len(thresholds)}")
    for th in thresholds:
        if not th > 1:
            raise ConfigurationError(f"delta threshold must be > 1, got {th}")
    if list(thresholds) != sorted(thresholds):
        raise ConfigurationError(f"delta thresholds must be increasing, got {thresholds}")
    return thresholds


def _pair_sums(d_hat, d, thresholds):
    log_diff = np.log(d) - np.log(d_hat)
    ratio = np.maximum(d_hat / d, d / d_hat)
    return MetricSums(
        count=int(d.size),
        abs_rel=float(np.sum(np.abs(d - d_hat) / d)),
        sq_err=float(np.sum((d - d_hat) ** 2)),
        log_diff=float(np.sum(log_diff)),
        log_diff_sq=float(np.sum(log_diff**2)),
        hits=tuple(int(np.count_nonzero(ratio < th)) for th in thresholds),
    )


def metric_sums(pred, gt, policy: MaskPolicy, thresholds=DEFAULT_THRESHOLDS) -> MetricSums:
    thresholds = _check_thresholds(thresholds)
    return _pair_sums(*evaluation_pairs(pred, gt, policy), thresholds)


def compute_metrics(pred, gt, policy: MaskPolicy = MaskPolicy(), thresholds=DEFAULT_THRESHOLDS) -> MetricReport:
    """Score ``pred`` against ``gt`` over pixels valid in both and inside the policy range.

    ``silog_sq`` is the mean squared log residual after removing the
    best constant log offset ``a = mean(log d - log d_hat)``; it is
    unchanged by uniform rescaling of the prediction. ``rmse_log`` is the
    plain root mean squared log difference.
    """
    thresholds = _check_thresholds(thresholds)
    d_hat, d = evaluation_pairs(pred, gt, policy)
    n = d.size
    sums = _pair_sums(d_hat, d, thresholds)
    log_diff = np.log(d) - np.log(d_hat)
    shift = np.mean(log_diff)
    return MetricReport(
        abs_rel=float(np.mean(np.abs(d - d_hat) / d)),
        rmse=float(np.sqrt(np.mean((d - d_hat) ** 2))),
        rmse_log=float(np.sqrt(np.mean(log_diff**2))),
        silog_sq=float(np.mean((-log_diff + shift) ** 2)),
        delta1=sums.hits[0] / n,
        delta2=sums.hits[1] / n,
        delta3=sums.hits[2] / n,
        valid_pixels=int(n),
        sums=sums,
    )


def delta_accuracy(pred, gt, threshold, policy: MaskPolicy = MaskPolicy()) -> float:
    """Fraction of scored pixels with ``max(d_hat/d, d/d_hat) < threshold``."""
    if not threshold > 1:
        raise ConfigurationError(f"delta threshold must be > 1, got {threshold}")
    d_hat, d = evaluation_pairs(pred, gt, policy)
    ratio = np.maximum(d_hat / d, d / d_hat)
    return float(np.count_nonzero(ratio < threshold)) / d.size


def aggregate(reports, mode=Aggregation.PER_IMAGE_MEAN, pooled_accumulators=None) -> MetricReport:
    """Combine per-image reports.

    PER_IMAGE_MEAN averages each metric with equal image weights.
    PIXEL_POOLED recomputes the metrics from summed per-pixel accumulators,
    taken from ``pooled_accumulators`` when given, else from each report.
    """
    reports = list(reports)
    mode = Aggregation.parse(mode)
    if not reports:
        raise EvaluationError("cannot aggregate an empty list of reports")
    if mode is Aggregation.PER_IMAGE_MEAN:
        n = len(reports)
        return MetricReport(
            abs_rel=sum(r.abs_rel for r in reports) / n,
            rmse=sum(r.rmse for r in reports) / n,
            rmse_log=sum(r.rmse_log for r in reports) / n,
            silog_sq=sum(r.silog_sq for r in reports) / n,
            delta1=sum(r.delta1 for r in reports) / n,
            delta2=sum(r.delta2 for r in reports) / n,
            delta3=sum(r.delta3 for r in reports) / n,
            valid_pixels=sum(r.valid_pixels for r in reports),
        )
    accumulators = pooled_accumulators
    if accumulators is None:
        if any(r.sums is None for r in reports):
            raise EvaluationError("pixel-pooled aggregation needs per-pixel accumulators for every report")
        accumulators = [r.sums for r in reports]
    total = MetricSums()
    for acc in accumulators:
        total = total + acc
    return total.to_report()


def format_table_header(label_width=0):
    return "Method".ljust(label_width) + "  " + "  ".join(TABLE_COLUMNS)


def format_table_row(label, report: MetricReport) -> str:
    """Table row: label, then delta1..3, AbsRel, RMSE, RMSE_log at three decimals."""
    return label + "".join(f"  {value:.3f}" for value in report.table_values())
