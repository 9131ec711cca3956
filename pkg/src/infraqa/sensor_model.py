"""Sensor, localization, and composite accuracy, plus the final accuracy
normalization.

Accuracy factors: sensor error (GSD for cameras, beam-geometry error for
lidars), registration error of the sensor pose in the global frame, the
measured detection accuracy (mAP), and the measured tracking accuracy
(HOTA). All factors are dimensionless in [0,1]; the final accuracy is the
fourth root of the product of the composite term and the tracking term.

The camera and lidar error models are pluggable by name so users can
calibrate against their own sensors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .core import SensorKind, SensorSpec

DEFAULT_X_DETECTION_M = 150.0
DEFAULT_T_MIN_MS = 0.0
DEFAULT_T_MAX_MS = 1000.0
# Registration error defaults measured for infrastructure cross sections.
DEFAULT_CAMERA_E_TRANS_M = 0.00519
DEFAULT_CAMERA_E_ROT_DEG = 0.09
DEFAULT_LIDAR_E_TRANS_M = 0.04
DEFAULT_LIDAR_E_ROT_DEG = 0.03


@dataclass(frozen=True)
class EvalConstants:
    x_detection_m: float = DEFAULT_X_DETECTION_M
    t_min_ms: float = DEFAULT_T_MIN_MS
    t_max_ms: float = DEFAULT_T_MAX_MS
    camera_e_trans_m: float = DEFAULT_CAMERA_E_TRANS_M
    camera_e_rot_deg: float = DEFAULT_CAMERA_E_ROT_DEG
    lidar_e_trans_m: float = DEFAULT_LIDAR_E_TRANS_M
    lidar_e_rot_deg: float = DEFAULT_LIDAR_E_ROT_DEG

    def __post_init__(self):
        if self.x_detection_m <= 0:
            raise ValueError("x_detection_m must be > 0")
        if self.t_max_ms <= self.t_min_ms:
            raise ValueError("t_max_ms must exceed t_min_ms")


@dataclass(frozen=True)
class AccuracyBreakdown:
    a_s: float
    a_l: float
    a_d: float
    a_sld: float
    a_t: float
    accuracy_norm: float


def camera_gsd(spec: SensorSpec, distance_m: float) -> float:
    """Worst-axis ground sampling distance of a camera at a distance."""
    if spec.kind is not SensorKind.CAMERA:
        raise ValueError(f"camera_gsd needs a camera spec, got {spec.kind.value}")
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    gsd_w = 2.0 * distance_m * math.tan(math.radians(spec.hfov_deg) / 2.0) / spec.width_px
    gsd_h = 2.0 * distance_m * math.tan(math.radians(spec.vfov_deg) / 2.0) / spec.height_px
    return max(gsd_w, gsd_h)


def lidar_range_error(spec: SensorSpec, distance_m: float) -> float:
    """Beam-geometry lidar error: angular footprints at distance combined
    with the range accuracy, root-sum-square."""
    if spec.kind is not SensorKind.LIDAR:
        raise ValueError(f"lidar_range_error needs a lidar spec, got {spec.kind.value}")
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    theta_h = math.radians(spec.hor_ang_res_deg or 0.0)
    theta_v = math.radians(spec.vert_ang_res_deg or 0.0)
    sigma_r = spec.range_accuracy_m or 0.0
    return math.sqrt((distance_m * theta_h) ** 2
                     + (distance_m * theta_v) ** 2
                     + sigma_r ** 2)


# Error models are selectable by name from the run configuration.
SENSOR_ERROR_MODELS: dict[str, Callable[[SensorSpec, float], float]] = {
    "camera_gsd": camera_gsd,
    "lidar_beam": lidar_range_error,
}


def sensor_error(spec: SensorSpec, consts: EvalConstants,
                 model: str | None = None) -> float:
    """Sensor error at the maximum detection distance, by selected model."""
    if model is None:
        model = "camera_gsd" if spec.kind is SensorKind.CAMERA else "lidar_beam"
    try:
        fn = SENSOR_ERROR_MODELS[model]
    except KeyError:
        raise ValueError(f"unknown sensor error model {model!r}") from None
    return fn(spec, consts.x_detection_m)


def sensor_accuracy(e_s: float, consts: EvalConstants) -> float:
    """1 - e_s / x_detection, floored at 0."""
    if e_s < 0:
        raise ValueError("sensor error must be >= 0")
    return max(0.0, 1.0 - e_s / consts.x_detection_m)


def localization_accuracy(e_trans_m: float, e_rot_deg: float,
                          consts: EvalConstants) -> float:
    """Registration accuracy from translational and rotational errors.

    The rotational part enters as the arc length at the maximum detection
    distance; degrees are converted to radians here.
    """
    if e_trans_m < 0 or e_rot_deg < 0:
        raise ValueError("registration errors must be >= 0")
    arc = consts.x_detection_m * math.radians(e_rot_deg)
    e_l = math.sqrt(e_trans_m ** 2 + arc ** 2)
    return max(0.0, 1.0 - e_l / consts.x_detection_m)


def registration_errors(spec: SensorSpec, consts: EvalConstants) -> tuple[float, float]:
    """Per-sensor registration errors, falling back to kind defaults."""
    if spec.e_trans_m is not None and spec.e_rot_deg is not None:
        return spec.e_trans_m, spec.e_rot_deg
    if spec.kind is SensorKind.CAMERA:
        return consts.camera_e_trans_m, consts.camera_e_rot_deg
    return consts.lidar_e_trans_m, consts.lidar_e_rot_deg


def composite_accuracy(a_s: float, a_l: float, a_d: float) -> float:
    """Product of sensor, localization, and detection accuracy."""
    for name, v in (("a_s", a_s), ("a_l", a_l), ("a_d", a_d)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name}={v} outside [0,1]")
    return a_s * a_l * a_d


def combine_composite(a_i: float, a_j: float) -> float:
    """Self-weighted combination (a_i^2 + a_j^2) / (a_i + a_j) for a
    two-sensor setup; 0 when both inputs are 0 (continuous limit)."""
    if a_i < 0 or a_j < 0:
        raise ValueError("accuracies must be >= 0")
    total = a_i + a_j
    if total == 0.0:
        return 0.0
    return (a_i * a_i + a_j * a_j) / total


def combine_tracking(t_i: float, t_j: float) -> float:
    """Arithmetic mean of two tracking accuracies."""
    return 0.5 * (t_i + t_j)


def accuracy_norm(a_sld: float, a_t: float) -> float:
    """Fourth root of a_sld * a_t; the final normalized accuracy."""
    for name, v in (("a_sld", a_sld), ("a_t", a_t)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name}={v} outside [0,1]")
    return (a_sld * a_t) ** 0.25


def single_sensor_breakdown(spec: SensorSpec, a_d: float, a_t: float,
                            consts: EvalConstants,
                            error_model: str | None = None) -> AccuracyBreakdown:
    """Full accuracy breakdown for one sensor given measured mAP and HOTA."""
    a_s = sensor_accuracy(sensor_error(spec, consts, error_model), consts)
    e_trans, e_rot = registration_errors(spec, consts)
    a_l = localization_accuracy(e_trans, e_rot, consts)
    a_sld = composite_accuracy(a_s, a_l, a_d)
    return AccuracyBreakdown(a_s, a_l, a_d, a_sld, a_t,
                             accuracy_norm(a_sld, a_t))
