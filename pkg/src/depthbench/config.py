"""Evaluation configuration: named presets, INI config files and layering.

A config file is an INI document with any of these sections::

    [scheme]   mode, alpha, beta, num_classes
    [policy]   min_depth, max_depth, clamp_predictions
    [crop]     kind = none | eigen | bottom-center | fixed | fractional
               fixed: top, left, height, width (top/left may be omitted
               to anchor bottom-center); fractional: top, bottom, left, right
    [loader]   scale_divisor, zero_is_invalid
    [eval]     aggregation, prediction_format, thresholds

Layers merge key by key: preset, then config file, then explicit overrides.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .depthio import BOTTOM_CENTER_CROP_SIZE, EIGEN_CROP_FRACTIONS, KITTI_SCALE_DIVISOR, CropKind, CropSpec
from .discretization import DiscretizationScheme
from .errors import ConfigurationError
from .metrics import DEFAULT_THRESHOLDS, Aggregation, MaskPolicy

SECTIONS = ("scheme", "policy", "crop", "loader", "eval")

_KITTI_71 = {
    "scheme": {"mode": "sid", "alpha": "1.0", "beta": "80.0", "num_classes": "71"},
    "policy": {"min_depth": "0.001", "max_depth": "80.0", "clamp_predictions": "true"},
    "crop": {"kind": "none"},
    "loader": {"scale_divisor": str(KITTI_SCALE_DIVISOR), "zero_is_invalid": "true"},
    "eval": {"aggregation": "per-image-mean", "prediction_format": "depth"},
}

PRESETS = {
    "kitti-71": _KITTI_71,
    "synthia-71": {section: dict(values) for section, values in _KITTI_71.items()},
}

DEFAULT_PRESET = "kitti-71"

PREDICTION_FORMATS = ("depth", "classes")


@dataclass(frozen=True)
class EvalConfig:
    scheme: DiscretizationScheme
    policy: MaskPolicy = field(default_factory=MaskPolicy)
    crop: CropSpec = field(default_factory=CropSpec)
    aggregation: Aggregation = Aggregation.PER_IMAGE_MEAN
    scale_divisor: float = KITTI_SCALE_DIVISOR
    zero_is_invalid: bool = True
    prediction_format: str = "depth"
    thresholds: tuple = DEFAULT_THRESHOLDS

    def __post_init__(self):
        if self.prediction_format not in PREDICTION_FORMATS:
            raise ConfigurationError(
                f"prediction_format must be one of {', '.join(PREDICTION_FORMATS)}, got {self.prediction_format!r}"
            )
        if self.prediction_format == "classes" and self.policy.max_depth > self.scheme.beta:
            raise ConfigurationError(
                f"class-space evaluation needs max_depth <= beta ({self.policy.max_depth} > {self.scheme.beta})"
            )
        if not self.scale_divisor > 0:
            raise ConfigurationError(f"scale_divisor must be positive, got {self.scale_divisor}")

    def to_dict(self):
        return {
            "scheme": self.scheme.to_dict(),
            "policy": self.policy.to_dict(),
            "crop": self.crop.to_dict(),
            "aggregation": self.aggregation.value,
            "scale_divisor": self.scale_divisor,
            "zero_is_invalid": self.zero_is_invalid,
            "prediction_format": self.prediction_format,
            "thresholds": list(self.thresholds),
        }


def _bool(text, key):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {text!r}")


def _float(section, key):
    try:
        return float(section[key])
    except KeyError:
        raise ConfigurationError(f"missing config key {key}") from None
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {section[key]!r}") from None


def _opt_int(section, key):
    text = section.get(key, "").strip().lower()
    if text in ("", "none", "auto", "bottom", "center"):
        return None
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"crop {key}: expected an integer, got {text!r}") from None


def crop_from_mapping(section) -> CropSpec:
    kind = section.get("kind", "none").strip().lower()
    if kind == "none":
        return CropSpec()
    if kind == "eigen":
        return CropSpec.eigen()
    if kind == "bottom-center":
        return CropSpec.bottom_center(*BOTTOM_CENTER_CROP_SIZE)
    if kind == CropKind.FIXED.value:
        height, width = _opt_int(section, "height"), _opt_int(section, "width")
        if height is None or width is None:
            raise ConfigurationError("fixed crop needs height and width")
        return CropSpec(CropKind.FIXED, window=(_opt_int(section, "top"), _opt_int(section, "left"), height, width))
    if kind == CropKind.FRACTIONAL.value:
        return CropSpec(
            CropKind.FRACTIONAL,
            fractions=tuple(_float(section, k) for k in ("top", "bottom", "left", "right")),
        )
    raise ConfigurationError(f"unknown crop kind {kind!r} (expected none, eigen, bottom-center, fixed or fractional)")


def read_config_file(path) -> dict:
    """Parse an INI config file into ``{section: {key: text}}``."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from None
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigurationError(f"{path}: unknown section(s) {', '.join(unknown)}")
    return {s: dict(parser.items(s)) for s in parser.sections()}


def merge_layers(*layers) -> dict:
    merged = {s: {} for s in SECTIONS}
    for layer in layers:
        for section, values in (layer or {}).items():
            if section not in merged:
                raise ConfigurationError(f"unknown config section {section!r}")
            if section == "crop" and "kind" in values:
                # a new crop kind replaces the previous crop entirely
                merged["crop"] = {}
            merged[section].update({k: str(v) for k, v in values.items() if v is not None})
    return merged


def build_config(layers: dict) -> EvalConfig:
    scheme = DiscretizationScheme.from_mapping(layers["scheme"])
    pol = layers["policy"]
    policy = MaskPolicy(
        min_depth=_float(pol, "min_depth") if "min_depth" in pol else 1e-3,
        max_depth=_float(pol, "max_depth") if "max_depth" in pol else scheme.beta,
        clamp_predictions=_bool(pol.get("clamp_predictions", "true"), "clamp_predictions"),
    )
    loader = layers["loader"]
    ev = layers["eval"]
    thresholds = DEFAULT_THRESHOLDS
    if ev.get("thresholds"):
        try:
            thresholds = tuple(float(t) for t in ev["thresholds"].replace(",", " ").split())
        except ValueError:
            raise ConfigurationError(f"thresholds: expected numbers, got {ev['thresholds']!r}") from None
    return EvalConfig(
        scheme=scheme,
        policy=policy,
        crop=crop_from_mapping(layers["crop"]),
        aggregation=Aggregation.parse(ev.get("aggregation", "per-image-mean")),
        scale_divisor=_float(loader, "scale_divisor") if "scale_divisor" in loader else KITTI_SCALE_DIVISOR,
        zero_is_invalid=_bool(loader.get("zero_is_invalid", "true"), "zero_is_invalid"),
        prediction_format=ev.get("prediction_format", "depth").strip().lower(),
        thresholds=thresholds,
    )


def resolve_config(preset=DEFAULT_PRESET, path=None, overrides=None) -> EvalConfig:
    """Resolve preset < config file < overrides into an :class:`EvalConfig`."""
    layers = []
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r} (available: {', '.join(sorted(PRESETS))})")
        layers.append(PRESETS[preset])
    if path is not None:
        layers.append(read_config_file(path))
    layers.append(overrides)
    return build_config(merge_layers(*layers))


def config_to_text(config: EvalConfig) -> str:
    """Serialize a resolved config as an INI document accepted by :func:`read_config_file`."""
    crop = config.crop
    if crop.kind is CropKind.NONE:
        crop_lines = "kind = none\n"
    elif crop.kind is CropKind.FRACTIONAL:
        if crop.fractions == EIGEN_CROP_FRACTIONS:
            crop_lines = "kind = eigen\n"
        else:
            top, bottom, left, right = crop.fractions
            crop_lines = f"kind = fractional\ntop = {top!r}\nbottom = {bottom!r}\nleft = {left!r}\nright = {right!r}\n"
    else:
        top, left, h, w = crop.window
        crop_lines = "kind = fixed\n"
        if top is not None:
            crop_lines += f"top = {top}\n"
        if left is not None:
            crop_lines += f"left = {left}\n"
        crop_lines += f"height = {h}\nwidth = {w}\n"
    policy = config.policy
    return (
        config.scheme.to_config_block()
        + "\n[policy]\n"
        + f"min_depth = {policy.min_depth!r}\nmax_depth = {policy.max_depth!r}\n"
        + f"clamp_predictions = {str(policy.clamp_predictions).lower()}\n"
        + "\n[crop]\n"
        + crop_lines
        + "\n[loader]\n"
        + f"scale_divisor = {config.scale_divisor!r}\nzero_is_invalid = {str(config.zero_is_invalid).lower()}\n"
        + "\n[eval]\n"
        + f"aggregation = {config.aggregation.value}\nprediction_format = {config.prediction_format}\n"
        + "thresholds = " + " ".join(repr(t) for t in config.thresholds) + "\n"
    )
