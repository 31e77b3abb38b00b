"""Depth-map container, 16-bit raster I/O, crops and colorized rendering."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigurationError, DataError, FormatError

KITTI_SCALE_DIVISOR = 256.0

# Eigen et al. evaluation crop as (top, bottom, left, right) fractions of the
# image height/width; the usual community constants for KITTI.
EIGEN_CROP_FRACTIONS = (0.40810811, 0.99189189, 0.03594771, 0.96405229)

BOTTOM_CENTER_CROP_SIZE = (420, 800)


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Dense grid of metric depths plus a validity mask.

    ``values`` and ``valid`` are ``(height, width)`` arrays. Every valid
    pixel holds a finite depth > 0; invalid pixels carry no meaning.
    """

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        valid = np.array(self.valid, dtype=bool)
        if values.ndim != 2:
            raise DataError(f"depth map must be 2-D, got shape {values.shape}")
        if valid.shape != values.shape:
            raise DataError(f"mask shape {valid.shape} does not match values shape {values.shape}")
        bad = valid & ~(np.isfinite(values) & (values > 0))
        if np.any(bad):
            row, col = np.argwhere(bad)[0]
            raise DataError(f"valid pixel (row={row}, col={col}) has non-positive or non-finite depth {values[row, col]}")
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_array(cls, values, valid=None):
        """Build a map, additionally masking out non-positive and non-finite entries."""
        values = np.asarray(values, dtype=np.float64)
        usable = np.isfinite(values) & (values > 0)
        if valid is not None:
            usable &= np.asarray(valid, dtype=bool)
        return cls(np.where(usable, values, 0.0), usable)

    @property
    def shape(self):
        return self.values.shape

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, DepthMap):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(self.values[self.valid], other.values[other.valid])
        )

    __hash__ = None


def _open_raster(path):
    path = Path(path)
    if not path.is_file():
        raise FormatError(path, "file does not exist")
    try:
        with Image.open(path) as img:
            img.load()
            return img.copy()
    except (OSError, SyntaxError, ValueError) as exc:
        raise FormatError(path, f"unreadable image ({exc})") from None


def load_depth_u16(path, scale_divisor=KITTI_SCALE_DIVISOR, zero_is_invalid=True) -> DepthMap:
    """Read a 16-bit single-channel raster; depth = stored / scale_divisor.

    With ``zero_is_invalid`` a stored 0 marks a missing measurement;
    without it a stored 0 is rejected, since 0 m is never a valid depth.
    """
    if not scale_divisor > 0:
        raise ConfigurationError(f"scale_divisor must be positive, got {scale_divisor}")
    img = _open_raster(path)
    bands = img.getbands()
    if len(bands) != 1:
        raise FormatError(path, f"expected a single channel, found {len(bands)} ({img.mode})")
    if img.mode not in ("I;16", "I;16B", "I;16L", "I"):
        raise FormatError(path, f"expected 16-bit samples, found mode {img.mode}")
    stored = np.asarray(img)
    if stored.dtype != np.uint16:
        if stored.min(initial=0) < 0 or stored.max(initial=0) > 0xFFFF:
            raise FormatError(path, "sample values exceed the 16-bit range")
        stored = stored.astype(np.uint16)
    valid = stored != 0
    if not zero_is_invalid and not np.all(valid):
        row, col = np.argwhere(~valid)[0]
        raise DataError(f"{path}: stored 0 at (row={row}, col={col}) but zeros are not marked invalid")
    values = stored.astype(np.float64) / scale_divisor
    return DepthMap(np.where(valid, values, 0.0), valid)


def encode_depth_u16(depth_map: DepthMap, scale_divisor=KITTI_SCALE_DIVISOR) -> np.ndarray:
    if not scale_divisor > 0:
        raise ConfigurationError(f"scale_divisor must be positive, got {scale_divisor}")
    scaled = np.floor(depth_map.values * scale_divisor + 0.5)
    scaled = np.where(depth_map.valid, scaled, 0.0)
    over = scaled > 0xFFFF
    if np.any(over):
        row, col = np.argwhere(over)[0]
        raise DataError(
            f"depth {depth_map.values[row, col]} at (row={row}, col={col}) does not fit in 16 bits "
            f"with divisor {scale_divisor} ({int(scaled[row, col])} > 65535)"
        )
    under = depth_map.valid & (scaled == 0)
    if np.any(under):
        row, col = np.argwhere(under)[0]
        raise DataError(
            f"valid depth {depth_map.values[row, col]} at (row={row}, col={col}) rounds to 0, "
            "which encodes a missing measurement"
        )
    return scaled.astype(np.uint16)


def save_depth_u16(depth_map: DepthMap, path, scale_divisor=KITTI_SCALE_DIVISOR):
    """Write a depth map as 16-bit PNG with round-half-up encoding; invalid -> 0."""
    encoded = encode_depth_u16(depth_map, scale_divisor)
    Image.fromarray(encoded).save(Path(path), format="PNG")


def save_class_map(labels, path):
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise DataError(f"class map must be 2-D, got shape {labels.shape}")
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 255:
        raise DataError("class labels must fit in 8 bits")
    Image.fromarray(labels.astype(np.uint8)).save(Path(path), format="PNG")


def load_class_map(path) -> np.ndarray:
    img = _open_raster(path)
    if img.mode != "L":
        raise FormatError(path, f"expected an 8-bit single-channel class map, found mode {img.mode}")
    return np.asarray(img, dtype=np.uint8).copy()


class CropKind(str, enum.Enum):
    NONE = "none"
    FIXED = "fixed"
    FRACTIONAL = "fractional"


@dataclass(frozen=True)
class CropSpec:
    """Evaluation window.

    ``window`` is ``(top, left, height, width)`` for FIXED crops; ``top`` or
    ``left`` set to ``None`` anchor the window at the bottom edge and/or
    horizontal center of the source. ``fractions`` is ``(top, bottom, left,
    right)`` for FRACTIONAL crops.
    """

    kind: CropKind = CropKind.NONE
    window: tuple | None = None
    fractions: tuple | None = None

    def __post_init__(self):
        try:
            kind = CropKind(str(getattr(self.kind, "value", self.kind)).lower())
        except ValueError:
            raise ConfigurationError(f"unknown crop kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if kind is CropKind.FIXED:
            if self.window is None or len(self.window) != 4:
                raise ConfigurationError("fixed crop needs (top, left, height, width)")
            top, left, h, w = self.window
            if h is None or w is None or int(h) <= 0 or int(w) <= 0:
                raise ConfigurationError(f"crop size must be positive, got {h}x{w}")
            if (top is not None and int(top) < 0) or (left is not None and int(left) < 0):
                raise ConfigurationError("crop offsets must be non-negative")
            object.__setattr__(
                self,
                "window",
                (None if top is None else int(top), None if left is None else int(left), int(h), int(w)),
            )
        elif kind is CropKind.FRACTIONAL:
            if self.fractions is None or len(self.fractions) != 4:
                raise ConfigurationError("fractional crop needs (top, bottom, left, right)")
            top, bottom, left, right = (float(f) for f in self.fractions)
            if not (0 <= top < bottom <= 1 and 0 <= left < right <= 1):
                raise ConfigurationError(
                    f"fractional crop bounds must satisfy 0 <= top < bottom <= 1 and 0 <= left < right <= 1, "
                    f"got {self.fractions}"
                )
            object.__setattr__(self, "fractions", (top, bottom, left, right))

    @classmethod
    def eigen(cls):
        return cls(CropKind.FRACTIONAL, fractions=EIGEN_CROP_FRACTIONS)

    @classmethod
    def bottom_center(cls, height=BOTTOM_CENTER_CROP_SIZE[0], width=BOTTOM_CENTER_CROP_SIZE[1]):
        return cls(CropKind.FIXED, window=(None, None, height, width))

    def resolve(self, height, width):
        """Pixel window ``(row0, row1, col0, col1)`` (end-exclusive) for a source size."""
        if self.kind is CropKind.NONE:
            return 0, height, 0, width
        if self.kind is CropKind.FIXED:
            top, left, h, w = self.window
            if h > height or w > width:
                raise ConfigurationError(f"crop {h}x{w} does not fit in a {height}x{width} image")
            top = height - h if top is None else top
            left = (width - w) // 2 if left is None else left
            if top + h > height or left + w > width:
                raise ConfigurationError(
                    f"crop window rows {top}..{top + h - 1}, cols {left}..{left + w - 1} "
                    f"exceeds a {height}x{width} image"
                )
            return top, top + h, left, left + w
        top, bottom, left, right = self.fractions
        return (
            math.floor(top * height),
            math.ceil(bottom * height),
            math.floor(left * width),
            math.ceil(right * width),
        )

    def to_dict(self):
        out = {"kind": self.kind.value}
        if self.window is not None:
            out["window"] = list(self.window)
        if self.fractions is not None:
            out["fractions"] = list(self.fractions)
        return out


def apply_crop(depth_map: DepthMap, crop: CropSpec) -> DepthMap:
    if crop.kind is CropKind.NONE:
        return depth_map
    r0, r1, c0, c1 = crop.resolve(depth_map.height, depth_map.width)
    return DepthMap(depth_map.values[r0:r1, c0:c1], depth_map.valid[r0:r1, c0:c1])


def crop_array(array, crop: CropSpec):
    r0, r1, c0, c1 = crop.resolve(*np.shape(array)[:2])
    return np.asarray(array)[r0:r1, c0:c1]


_ANCHORS = np.array([[0, 0, 255], [0, 255, 0], [255, 0, 0]], dtype=np.float64)


def colorize_t(t) -> np.ndarray:
    """Blue -> green -> red ramp for positions ``t`` in [0, 1]; returns float RGB in 0..255."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    s = 2.0 * t
    lo = np.minimum(np.floor(s), 1).astype(np.int64)
    frac = (s - lo)[..., None]
    return _ANCHORS[lo] * (1.0 - frac) + _ANCHORS[lo + 1] * frac


def colorize(depth_map: DepthMap, scheme) -> np.ndarray:
    """Render a depth map as ``uint8`` RGB; nearer is bluer, invalid is black.

    Depth is positioned on the ramp in log space between the scheme's
    ``alpha`` and ``beta``.
    """
    safe = np.where(depth_map.valid, depth_map.values, scheme.alpha)
    t = np.log(safe / scheme.alpha) / math.log(scheme.beta / scheme.alpha)
    rgb = np.rint(colorize_t(t))
    rgb[~depth_map.valid] = 0
    return rgb.astype(np.uint8)


def save_rgb(rgb, path):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(Path(path), format="PNG")
