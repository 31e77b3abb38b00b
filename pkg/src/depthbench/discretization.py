"""Depth-space binning: UD/SID bin boundaries and depth <-> class conversion.

A scheme partitions ``[alpha, beta]`` into ``num_classes`` bins. Uniform
discretization (UD) uses equal widths; spacing-increasing discretization
(SID) uses equal widths in log-depth, so bin width grows with depth.

Class maps are ``uint8`` arrays holding labels ``0..K-1`` and the
:data:`IGNORE` sentinel for pixels that carry no class.
"""

from __future__ import annotations

import configparser
import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError, DomainError

IGNORE = 255
MAX_CLASSES = 255


class Mode(str, enum.Enum):
    UD = "ud"
    SID = "sid"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown discretization mode {value!r} (expected ud or sid)") from None


@dataclass(frozen=True)
class DiscretizationScheme:
    """Binning of ``[alpha, beta]`` (meters) into ``num_classes`` bins."""

    mode: Mode
    alpha: float
    beta: float
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if isinstance(self.num_classes, bool) or int(self.num_classes) != self.num_classes:
            raise ConfigurationError(f"num_classes must be an integer, got {self.num_classes!r}")
        object.__setattr__(self, "num_classes", int(self.num_classes))

        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ConfigurationError("alpha and beta must be finite")
        if self.alpha <= 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")
        if self.alpha >= self.beta:
            raise ConfigurationError(f"alpha must be < beta, got alpha={self.alpha}, beta={self.beta}")
        if not 1 <= self.num_classes <= MAX_CLASSES:
            raise ConfigurationError(
                f"num_classes must be in 1..{MAX_CLASSES} (255 is the ignore label), got {self.num_classes}"
            )

    def to_config_block(self, section="scheme"):
        return (
            f"[{section}]\n"
            f"mode = {self.mode.value}\n"
            f"alpha = {self.alpha!r}\n"
            f"beta = {self.beta!r}\n"
            f"num_classes = {self.num_classes}\n"
        )

    @classmethod
    def from_mapping(cls, mapping):
        missing = [k for k in ("mode", "alpha", "beta", "num_classes") if k not in mapping]
        if missing:
            raise ConfigurationError(f"scheme block is missing keys: {', '.join(missing)}")
        try:
            alpha = float(mapping["alpha"])
            beta = float(mapping["beta"])
            num_classes = int(mapping["num_classes"])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed scheme block: {exc}") from None
        return cls(mapping["mode"], alpha, beta, num_classes)

    @classmethod
    def from_config_block(cls, text, section="scheme"):
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse scheme block: {exc}") from None
        if not parser.has_section(section):
            raise ConfigurationError(f"no [{section}] section in config block")
        return cls.from_mapping(dict(parser.items(section)))

    def to_dict(self):
        return {
            "mode": self.mode.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "num_classes": self.num_classes,
        }


@functools.lru_cache(maxsize=64)
def _boundaries(scheme):
    k = scheme.num_classes
    i = np.arange(k + 1, dtype=np.float64)
    if scheme.mode is Mode.UD:
        values = scheme.alpha + (scheme.beta - scheme.alpha) * i / k
    else:
        values = np.exp(math.log(scheme.alpha) + math.log(scheme.beta / scheme.alpha) * i / k)
    # pin the endpoints so they match the scheme bit-for-bit
    values[0] = scheme.alpha
    values[-1] = scheme.beta
    values.setflags(write=False)
    return values


def boundaries(scheme: DiscretizationScheme) -> np.ndarray:
    """Return the ``K+1`` bin edges ``d_0 .. d_K`` as a read-only array.

    UD: ``d_i = alpha + (beta - alpha) * i / K``.
    SID: ``d_i = exp(log(alpha) + log(beta / alpha) * i / K)``.
    """
    return _boundaries(scheme)


@functools.lru_cache(maxsize=64)
def _representatives(scheme):
    edges = boundaries(scheme)
    if scheme.mode is Mode.UD:
        reps = (edges[:-1] + edges[1:]) / 2.0
    else:
        reps = np.sqrt(edges[:-1] * edges[1:])
    reps.setflags(write=False)
    return reps


def representatives(scheme: DiscretizationScheme) -> np.ndarray:
    """Per-class depth used on dequantization (midpoint for UD, geometric mean for SID)."""
    return _representatives(scheme)


def _quantize_array(depth, scheme):
    depth = np.asarray(depth, dtype=np.float64)
    edges = boundaries(scheme)
    k = scheme.num_classes
    out = np.full(depth.shape, IGNORE, dtype=np.uint8)

    keep = np.isfinite(depth) & (depth > 0) & (depth <= scheme.beta)
    d = np.maximum(depth[keep], scheme.alpha)
    if scheme.mode is Mode.UD:
        pos = k * (d - scheme.alpha) / (scheme.beta - scheme.alpha)
    else:
        pos = k * np.log(d / scheme.alpha) / math.log(scheme.beta / scheme.alpha)
    idx = np.clip(np.floor(pos), 0, k - 1).astype(np.int64)
    # one-step correction so the index agrees exactly with the edge table
    idx = np.where((d < edges[idx]) & (idx > 0), idx - 1, idx)
    idx = np.where((d >= edges[idx + 1]) & (idx < k - 1), idx + 1, idx)
    out[keep] = idx
    return out


def quantize(depth, scheme: DiscretizationScheme):
    """Map depth(s) to class indices.

    Returns ``i`` with ``d_i <= depth < d_{i+1}``; ``beta`` joins the last
    class and depths in ``(0, alpha)`` clamp to class 0. Depths above
    ``beta``, non-positive or non-finite depths give :data:`IGNORE`.

    Scalars return an ``int``; arrays return a ``uint8`` array.
    """
    if np.ndim(depth) == 0:
        return int(_quantize_array(np.float64(depth), scheme))
    return _quantize_array(depth, scheme)


def dequantize(label, scheme: DiscretizationScheme):
    """Map class indices back to their representative depth in meters."""
    labels = np.asarray(label)
    if labels.dtype.kind not in "iu":
        if labels.dtype.kind == "f" and np.all(np.isfinite(labels)) and np.all(labels == np.floor(labels)):
            labels = labels.astype(np.int64)
        else:
            raise DomainError(f"class labels must be integers, got {label!r}")
    bad = (labels < 0) | (labels >= scheme.num_classes)
    if np.any(bad):
        offender = labels[bad].flat[0] if labels.ndim else labels
        what = "IGNORE" if offender == IGNORE else str(int(offender))
        raise DomainError(f"class {what} outside 0..{scheme.num_classes - 1}")
    reps = representatives(scheme)
    if labels.ndim == 0:
        return float(reps[int(labels)])
    return reps[labels.astype(np.int64)]


def quantize_map(depth_map, scheme: DiscretizationScheme) -> np.ndarray:
    """Quantize a :class:`~depthbench.depthio.DepthMap`; invalid pixels become IGNORE."""
    labels = _quantize_array(np.where(depth_map.valid, depth_map.values, np.nan), scheme)
    return labels


def dequantize_map(class_map, scheme: DiscretizationScheme):
    """Turn a class map back into a DepthMap; IGNORE pixels come out invalid."""
    from .depthio import DepthMap

    labels = np.asarray(class_map)
    if labels.ndim != 2:
        raise DataError(f"class map must be 2-D, got shape {labels.shape}")
    if labels.dtype.kind not in "iu":
        raise DataError(f"class map must hold integer labels, got dtype {labels.dtype}")
    valid = labels != IGNORE
    bad = valid & ((labels < 0) | (labels >= scheme.num_classes))
    if np.any(bad):
        row, col = np.argwhere(bad)[0]
        raise DataError(
            f"label {int(labels[row, col])} at pixel (row={row}, col={col}) "
            f"is outside 0..{scheme.num_classes - 1}"
        )
    reps = representatives(scheme)
    values = np.zeros(labels.shape, dtype=np.float64)
    values[valid] = reps[labels[valid].astype(np.int64)]
    return DepthMap(values, valid)


def format_boundaries(scheme: DiscretizationScheme) -> str:
    return "".join(f"{v:.6f}\n" for v in boundaries(scheme))
